#pragma once

#include <stdexcept>
#include <string>

namespace thermalize {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// No system level admits any bath state inside the shell window.
struct EmptyShell : Error {
    using Error::Error;
};

// E - eps_n(kappa) <= 0: the level is outside the shell.
struct NonPositiveEnergy : Error {
    using Error::Error;
};

struct NonPositiveDenominator : Error {
    using Error::Error;
};

struct DegenerateFit : Error {
    using Error::Error;
};

// beta*Delta too small for the small-F expansion around a finite gap.
struct DegenerateGap : Error {
    using Error::Error;
};

// Shell basis larger than the enumeration cap; carries the exact count.
struct CapExceeded : Error {
    CapExceeded(std::string count_decimal, double count_approx)
        : Error("shell basis count " + count_decimal + " exceeds cap"),
          count(std::move(count_decimal)),
          approx(count_approx) {}
    std::string count;
    double approx;
};

}  // namespace thermalize
