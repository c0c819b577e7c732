#include "thermalize/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermalize {

GibbsFit fit_beta(std::span<const double> energies, std::span<const double> p,
                  std::span<const int> levels, int window_lo, int window_hi) {
    if (energies.size() != p.size() || energies.size() != levels.size())
        throw DimensionMismatch("fit inputs differ in length");
    if (window_hi < window_lo) throw Error("fit window is empty");

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < energies.size(); ++i) {
        if (levels[i] < window_lo || levels[i] > window_hi) continue;
        if (!(p[i] > 0.0)) continue;
        xs.push_back(energies[i]);
        ys.push_back(std::log(p[i]));
    }
    if (xs.size() < 3)
        throw DegenerateFit("need at least 3 levels with positive probability in the window");

    const double n = static_cast<double>(xs.size());
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        x_mean += xs[i];
        y_mean += ys[i];
    }
    x_mean /= n;
    y_mean /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0, x_scale = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - x_mean;
        const double dy = ys[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        x_scale = std::max(x_scale, std::abs(xs[i]));
    }
    // equal energies up to roundoff
    const double floor_sxx = n * std::pow(1e-12 * std::max(1.0, x_scale), 2);
    if (sxx <= floor_sxx) throw DegenerateFit("all energies equal in the fit window");

    GibbsFit fit;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    const double slope = sxy / sxx;
    fit.beta = -slope;
    fit.intercept = y_mean - slope * x_mean;
    double ss_res = 0.0;
    fit.residuals.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + slope * xs[i]);
        fit.residuals.push_back(r);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

GibbsFit fit_beta(const CountTable& table, int window_lo, int window_hi,
                  FitAbscissa abscissa) {
    std::vector<double> energies, p;
    std::vector<int> levels;
    for (const CountRecord& rec : table.rows) {
        energies.push_back(abscissa == FitAbscissa::bare ? rec.epsilon
                                                         : rec.epsilon_deformed);
        p.push_back(rec.p_exact ? *rec.p_exact : rec.p_analytic);
        levels.push_back(rec.level);
    }
    return fit_beta(energies, p, levels, window_lo, window_hi);
}

double quasi_temperature(int bath_modes, double energy, double kappa, double lambda_n) {
    if (bath_modes < 2) throw Error("quasi-temperature needs at least 2 bath modes");
    const double denom = energy + kappa * lambda_n * lambda_n;
    if (!(denom > 0.0))
        throw NonPositiveDenominator("E + kappa*lambda^2 must be positive");
    return (static_cast<double>(bath_modes) - 1.0) / denom;
}

SubspaceOverlap subspace_overlap(const SystemSpec& system, double kappa, double delta,
                                 std::size_t n, std::size_t m) {
    if (n >= system.size() || m >= system.size()) throw Error("level index out of range");
    if (!(delta > 0.0)) throw Error("shell thickness must be positive");
    const DeformedSpectrum spectrum = deformed_spectrum(system, kappa);
    const double gap = std::abs(spectrum.levels[n] - spectrum.levels[m]);
    SubspaceOverlap out;
    out.overlaps = gap < delta;
    out.width = std::max(0.0, delta - gap);
    return out;
}

TwoLevelState::TwoLevelState(double beta_, double gap_, std::complex<double> coherence_)
    : beta(beta_), gap(gap_), coherence(coherence_) {
    if (!(gap > 0.0)) throw Error("two-level gap must be positive");
    const double bound = p_plus() * p_minus();
    if (std::norm(coherence) > bound * (1.0 + 1e-12))
        throw Error("|F|^2 exceeds p_+ p_-: not a density matrix");
}

double TwoLevelState::p_plus() const { return 1.0 / (1.0 + std::exp(beta * gap)); }

double TwoLevelState::p_minus() const { return 1.0 / (1.0 + std::exp(-beta * gap)); }

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

TwoLevelSolution two_level_exact(const TwoLevelState& state) {
    const double pp = state.p_plus();
    const double pm = state.p_minus();
    const double half_gap = 0.5 * (pm - pp);
    const double s = std::sqrt(half_gap * half_gap + std::norm(state.coherence));
    TwoLevelSolution out{};
    // Continuity with the F -> 0 limit: P_+ tracks p_+.
    if (pp <= pm) {
        out.p_plus = 0.5 - s;
        out.p_minus = 0.5 + s;
    } else {
        out.p_plus = 0.5 + s;
        out.p_minus = 0.5 - s;
    }
    out.entropy = -(plogp(out.p_plus) + plogp(out.p_minus));
    out.beta_eff = -std::log(out.p_plus / out.p_minus) / state.gap;
    return out;
}

TwoLevelApprox two_level_approx(const TwoLevelState& state) {
    const double bg = state.beta * state.gap;
    if (std::abs(bg) < 1e-6)
        throw DegenerateGap("beta*gap too small for the small-F expansion");
    const double pp = state.p_plus();
    const double pm = state.p_minus();
    const double f_sq = std::norm(state.coherence);
    const double coth = 1.0 / std::tanh(0.5 * bg);
    const double cosh_half = std::cosh(0.5 * bg);

    TwoLevelApprox out{};
    out.p_plus = pp - coth * f_sq;
    out.p_minus = pm + coth * f_sq;
    out.gibbs_entropy = bg / (std::exp(bg) + 1.0) + std::log(std::exp(-bg) + 1.0);
    out.entropy = out.gibbs_entropy - bg * f_sq * coth;
    out.beta_eff = state.beta + (4.0 * f_sq / state.gap) * cosh_half * cosh_half * coth;
    return out;
}

double thermodynamic_entropy(const mpz_class& count) {
    if (count <= 0) throw Error("entropy needs a positive state count");
    signed long exp2 = 0;
    const double mantissa = mpz_get_d_2exp(&exp2, count.get_mpz_t());
    return std::log(mantissa) + static_cast<double>(exp2) * std::numbers::ln2_v<double>;
}

double thermodynamic_entropy_from_log(double log_count) {
    if (!std::isfinite(log_count)) throw Error("entropy needs a finite log-count");
    return log_count;
}

double beta_finite_difference(const BathSpec& bath, double energy, double delta,
                              double step) {
    if (!(step > 0.0) || !(energy - step > 0.0))
        throw Error("finite-difference step must satisfy 0 < step < E");
    const double up = omega_bath_analytic_log(energy + step, delta, bath);
    const double down = omega_bath_analytic_log(energy - step, delta, bath);
    return (up - down) / (2.0 * step);
}

}  // namespace thermalize
