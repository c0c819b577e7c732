#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "thermalize/errors.hpp"

namespace thermalize {

/// M-level system: bare energies eps_n and dimensionless coupling weights
/// lambda_n. Immutable after construction; the constructor validates.
struct SystemSpec {
    std::vector<double> energies;
    std::vector<double> couplings;

    SystemSpec(std::vector<double> energies_, std::vector<double> couplings_);

    /// eps_n = n*omega, lambda_n = n for n = 0..levels-1.
    static SystemSpec harmonic(double omega, std::size_t levels);

    std::size_t size() const { return energies.size(); }
};

/// Bath of N harmonic oscillators. quantum_unit is the energy grid u used
/// by exact counting: every w_j must be an integer multiple of u.
struct BathSpec {
    std::vector<double> frequencies;
    std::vector<double> strengths;
    double quantum_unit;

    BathSpec(std::vector<double> frequencies_, std::vector<double> strengths_,
             double quantum_unit_);

    /// All modes at the same frequency, u = omega.
    static BathSpec degenerate(double omega, std::size_t modes, double strength = 0.0);

    std::size_t modes() const { return frequencies.size(); }

    /// Uniformly rescaled strengths so that kappa() == kappa_target.
    BathSpec with_kappa(double kappa_target) const;

    /// kappa = sum_j g_j^2 / (4 w_j)
    double kappa() const;
};

/// kappa plus the displacement parameters alpha_{jn} = -lambda_n g_j / (2 w_j),
/// stored as an M x N matrix indexed (level n, mode j).
struct CouplingSummary {
    double kappa;
    Eigen::MatrixXd displacements;
};

/// Renormalized system levels eps_n(kappa) = eps_n - kappa * lambda_n^2.
struct DeformedSpectrum {
    std::vector<double> levels;
};

/// Total-energy window [E, E+delta] selecting the constrained subspace.
struct ShellWindow {
    double energy;
    double thickness;

    ShellWindow(double energy_, double thickness_);
};

CouplingSummary coupling_summary(const SystemSpec& system, const BathSpec& bath);

DeformedSpectrum deformed_spectrum(const SystemSpec& system, double kappa);

/// eps_{n+1}(kappa) - eps_n(kappa), valid for 0 <= n < M-1.
double level_spacing_effective(const SystemSpec& system, double kappa, std::size_t n);

/// Per-mode relative displacement alpha_{jn} - alpha_{jm} = -g_j (lambda_n - lambda_m) / (2 w_j).
double relative_displacement(const SystemSpec& system, const BathSpec& bath,
                             std::size_t n, std::size_t m, std::size_t j);

}  // namespace thermalize
