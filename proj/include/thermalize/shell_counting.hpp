#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "thermalize/core_model.hpp"

namespace thermalize {

/// Integer form of a per-level bath window: count occupancy vectors
/// (n_1..n_N) with sum_j n_j k_j in [max(lo,0), hi]. Weights k_j = w_j/u.
struct QuantizedShell {
    std::vector<long long> weights;
    long long lo = 0;
    long long hi = -1;
    double unit = 1.0;

    /// Quantizes [e_lo, e_lo + delta] on the bath grid. e_lo = E - eps_n(kappa).
    static QuantizedShell from_bath(const BathSpec& bath, double e_lo, double delta);

    long long lo_clipped() const { return lo > 0 ? lo : 0; }
    bool empty() const { return hi < lo_clipped(); }
};

/// Exact microstate count. Dispatches to the closed-form binomial sum when
/// all weights are equal, otherwise to the mode-by-mode convolution DP.
mpz_class count_bath_states_exact(const QuantizedShell& shell);

/// Generic DP, any weights. Exposed so tests can cross-check the dispatch.
mpz_class count_by_convolution(const QuantizedShell& shell);

/// sum_Q C(Q + N - 1, N - 1) over lattice totals in the window; requires
/// all weights equal.
mpz_class count_degenerate_closed_form(const QuantizedShell& shell);

/// Complete lexicographically ordered list of occupancy vectors in the
/// window. Throws CapExceeded when the exact count is larger than cap.
std::vector<std::vector<int>> enumerate_bath_states(const QuantizedShell& shell,
                                                    std::uint64_t cap);

/// Continuum estimate E_avail^{N-1} * delta / ((N-1)! * prod_j w_j).
/// Throws NonPositiveEnergy when e_avail <= 0.
double omega_bath_analytic(double e_avail, double delta, const BathSpec& bath);
double omega_bath_analytic_log(double e_avail, double delta, const BathSpec& bath);

enum class CountMode { exact, analytic };

/// Which levels enter the shell sum. bare: E - eps_n(kappa) > 0 and
/// eps_n >= 0. deformed: additionally eps_n(kappa) >= 0.
enum class LevelCut { bare, deformed };

struct PnOptions {
    LevelCut cut = LevelCut::bare;
    std::optional<int> max_level;  // inclusive upper bound on n, overrides nothing else
};

struct CountRecord {
    int level = 0;
    double epsilon = 0.0;           // bare eps_n
    double epsilon_deformed = 0.0;  // eps_n(kappa)
    std::optional<mpz_class> exact;
    double log_omega_analytic = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> p_exact;
    double p_analytic = std::numeric_limits<double>::quiet_NaN();
};

struct CountTable {
    std::vector<CountRecord> rows;
    std::optional<mpz_class> total_exact;
    double log_total_analytic = std::numeric_limits<double>::quiet_NaN();
    double energy = 0.0;
    double thickness = 0.0;
    double kappa = 0.0;
    int bath_modes = 0;
    int levels_included = 0;
    CountMode mode = CountMode::analytic;
};

/// P_n = Omega_N(E - eps_n(kappa), delta) / sum_m Omega_N(E - eps_m(kappa), delta).
/// Exact mode also populates the analytic columns when N >= 2.
CountTable pn_counting(const SystemSpec& system, const BathSpec& bath,
                       const ShellWindow& shell, double kappa, CountMode mode,
                       const PnOptions& options = {});

/// Per-level bath-energy band [E - eps_n(kappa), E + delta - eps_n(kappa)],
/// clipped at 0; levels whose whole band is negative are dropped.
struct DeformationBand {
    int level;
    double bath_lo;
    double bath_hi;
};

std::vector<DeformationBand> deformation_map(const SystemSpec& system,
                                             const ShellWindow& shell, double kappa);

}  // namespace thermalize
