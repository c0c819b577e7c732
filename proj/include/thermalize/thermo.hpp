#pragma once

#include <complex>
#include <span>
#include <vector>

#include "thermalize/shell_counting.hpp"

namespace thermalize {

struct GibbsFit {
    double beta = 0.0;       // minus the OLS slope of ln P against energy
    double intercept = 0.0;
    int window_lo = 0;       // level range used, inclusive
    int window_hi = 0;
    double r_squared = 0.0;
    std::vector<double> residuals;
};

enum class FitAbscissa { bare, deformed };

/// OLS of ln p on energies over levels window_lo..window_hi (inclusive).
/// Levels with p <= 0 are skipped; needs >= 3 usable points.
GibbsFit fit_beta(std::span<const double> energies, std::span<const double> p,
                  std::span<const int> levels, int window_lo, int window_hi);

/// Table overload: p_exact when populated, else p_analytic. The abscissa
/// defaults to the deformed level energies eps_n(kappa) — the physical
/// spectrum of the coupled system.
GibbsFit fit_beta(const CountTable& table, int window_lo, int window_hi,
                  FitAbscissa abscissa = FitAbscissa::deformed);

/// beta_n = (N - 1) / (E + kappa * lambda_n^2).
double quasi_temperature(int bath_modes, double energy, double kappa, double lambda_n);

struct SubspaceOverlap {
    bool overlaps = false;
    double width = 0.0;  // intersection length of the two bath windows
};

/// Bath windows of levels n and m intersect iff |eps_n(kappa) - eps_m(kappa)| < delta.
SubspaceOverlap subspace_overlap(const SystemSpec& system, double kappa, double delta,
                                 std::size_t n, std::size_t m);

/// Two-level quasi-thermal state: Gibbs diagonal p_+- at inverse temperature
/// beta and gap Delta, plus coherence F. Constructor enforces positivity
/// |F|^2 <= p_+ p_-.
struct TwoLevelState {
    double beta;
    double gap;
    std::complex<double> coherence;

    TwoLevelState(double beta_, double gap_, std::complex<double> coherence_);

    double p_plus() const;   // 1 / (1 + exp(+beta*gap))
    double p_minus() const;  // 1 / (1 + exp(-beta*gap))
};

struct TwoLevelSolution {
    double p_plus;
    double p_minus;
    double entropy;    // von Neumann
    double beta_eff;   // -ln(P_+/P_-) / gap
};

/// Exact 2x2 eigendecomposition. P_+ is the eigenvalue continuously
/// connected to p_+ (the smaller one for beta > 0).
TwoLevelSolution two_level_exact(const TwoLevelState& state);

struct TwoLevelApprox {
    double p_plus;
    double p_minus;
    double entropy;
    double beta_eff;
    double gibbs_entropy;  // S(E) of the diagonal Gibbs state
};

/// Small-|F| expansion: P_+- = p_+- -+ coth(beta*gap/2) |F|^2 and the matching
/// entropy and effective-temperature corrections. Throws DegenerateGap when
/// |beta*gap| < 1e-6.
TwoLevelApprox two_level_approx(const TwoLevelState& state);

/// S = ln(count) evaluated from the big integer without overflow.
double thermodynamic_entropy(const mpz_class& count);

/// Same quantity when the count is already held in log form (e.g. from
/// omega_bath_analytic_log).
double thermodynamic_entropy_from_log(double log_count);

/// Central-difference beta = d ln Omega / dE on the analytic count.
double beta_finite_difference(const BathSpec& bath, double energy, double delta,
                              double step);

}  // namespace thermalize
