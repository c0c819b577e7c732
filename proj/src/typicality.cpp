#include "thermalize/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "thermalize/parallel.hpp"

namespace thermalize {

namespace {

struct LevelWindow {
    int level;
    QuantizedShell window;
};

// Levels admitted to the shell, same cut as pn_counting.
std::vector<LevelWindow> shell_windows(const SystemSpec& system, const BathSpec& bath,
                                       const ShellWindow& shell, double kappa,
                                       const PnOptions& options) {
    const DeformedSpectrum deformed = deformed_spectrum(system, kappa);
    std::vector<LevelWindow> out;
    for (std::size_t n = 0; n < system.size(); ++n) {
        if (options.max_level && static_cast<int>(n) > *options.max_level) break;
        const double e_avail = shell.energy - deformed.levels[n];
        if (!(e_avail > 0.0)) continue;
        if (system.energies[n] < 0.0) continue;
        if (options.cut == LevelCut::deformed && deformed.levels[n] < 0.0) continue;
        out.push_back({static_cast<int>(n),
                       QuantizedShell::from_bath(bath, e_avail, shell.thickness)});
    }
    return out;
}

}  // namespace

UniverseState sample_universe_state(const SystemSpec& system, const BathSpec& bath,
                                    const ShellWindow& shell, double kappa,
                                    std::uint64_t seed, std::uint64_t cap,
                                    const PnOptions& options) {
    const auto windows = shell_windows(system, bath, shell, kappa, options);
    if (windows.empty()) throw EmptyShell("no system level admits bath states in the shell");

    mpz_class total = 0;
    for (const auto& lw : windows) total += count_bath_states_exact(lw.window);
    if (total == 0) throw EmptyShell("every quantized window in the shell is empty");
    if (total > cap) throw CapExceeded(total.get_str(), mpz_get_d(total.get_mpz_t()));

    UniverseState state;
    state.seed = seed;
    state.basis.reserve(static_cast<std::size_t>(total.get_ui()));
    for (const auto& lw : windows) {
        const std::size_t begin = state.basis.size();
        for (auto& occ : enumerate_bath_states(lw.window, cap))
            state.basis.push_back({lw.level, std::move(occ)});
        if (state.basis.size() > begin) {
            state.blocks.emplace_back(begin, state.basis.size());
            state.block_levels.push_back(lw.level);
        }
    }

    const auto dim = static_cast<Eigen::Index>(state.basis.size());
    state.amplitudes.resize(dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double norm_sq = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        state.amplitudes[i] = {re, im};
        norm_sq += re * re + im * im;
    }
    state.amplitudes /= std::sqrt(norm_sq);
    return state;
}

double laguerre_assoc(unsigned n, unsigned k, double x) {
    if (n == 0) return 1.0;
    const double a = static_cast<double>(k);
    double prev = 1.0;            // L_0
    double curr = 1.0 + a - x;    // L_1
    for (unsigned i = 2; i <= n; ++i) {
        const double fi = static_cast<double>(i);
        const double next = ((2.0 * fi - 1.0 + a - x) * curr - (fi - 1.0 + a) * prev) / fi;
        prev = curr;
        curr = next;
    }
    return curr;
}

namespace {

// Laguerre recurrence with power-of-two renormalization so that huge
// intermediate polynomial values cannot overflow before the log-space
// prefactor is applied. Returns (sign, log|L|).
std::pair<double, double> laguerre_log(unsigned n, unsigned k, double x) {
    const double a = static_cast<double>(k);
    double prev = 1.0;
    double curr = 1.0 + a - x;
    double log_scale = 0.0;
    if (n == 0) curr = 1.0;
    for (unsigned i = 2; i <= n; ++i) {
        const double fi = static_cast<double>(i);
        double next = ((2.0 * fi - 1.0 + a - x) * curr - (fi - 1.0 + a) * prev) / fi;
        if (std::abs(next) > 1e280) {
            next = std::ldexp(next, -1024);
            curr = std::ldexp(curr, -1024);
            log_scale += 1024.0 * std::numbers::ln2_v<double>;
        }
        prev = curr;
        curr = next;
    }
    if (curr == 0.0) return {0.0, -std::numeric_limits<double>::infinity()};
    return {curr > 0.0 ? 1.0 : -1.0, std::log(std::abs(curr)) + log_scale};
}

}  // namespace

double displaced_overlap(int m, int n, double delta_alpha) {
    if (m < 0 || n < 0) throw Error("negative Fock index");
    if (delta_alpha == 0.0) return m == n ? 1.0 : 0.0;
    // <m|D(d)|n> = <n|D(-d)|m> for real d; reduce to m >= n.
    if (m < n) return displaced_overlap(n, m, -delta_alpha);

    const unsigned diff = static_cast<unsigned>(m - n);
    const double x = delta_alpha * delta_alpha;
    const auto [lag_sign, lag_log] = laguerre_log(static_cast<unsigned>(n), diff, x);
    if (lag_sign == 0.0) return 0.0;
    const double sign =
        (delta_alpha < 0.0 && (diff % 2 == 1)) ? -lag_sign : lag_sign;
    const double log_mag = static_cast<double>(diff) * std::log(std::abs(delta_alpha)) -
                           0.5 * x + lag_log +
                           0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0));
    return sign * std::exp(log_mag);
}

DecoherenceFactor decoherence_product(const SystemSpec& system, const BathSpec& bath,
                                      std::size_t n, std::size_t m,
                                      std::span<const int> occ_n,
                                      std::span<const int> occ_m) {
    if (occ_n.size() != bath.modes() || occ_m.size() != bath.modes())
        throw DimensionMismatch("occupancy length must match mode count");
    DecoherenceFactor out;
    out.factors.reserve(bath.modes());
    for (std::size_t j = 0; j < bath.modes(); ++j) {
        const double delta = relative_displacement(system, bath, n, m, j);
        const double d = displaced_overlap(occ_m[j], occ_n[j], delta);
        out.factors.push_back(d);
        out.product *= d;
    }
    return out;
}

ReducedDensityMatrix::ReducedDensityMatrix(Eigen::MatrixXcd entries)
    : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DimensionMismatch("density matrix must be square");
}

double ReducedDensityMatrix::trace_error() const {
    return std::abs(entries_.trace() - std::complex<double>(1.0, 0.0));
}

double ReducedDensityMatrix::hermiticity_error() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double ReducedDensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

ReducedDensityMatrix reduce_density_matrix(const UniverseState& state,
                                           const SystemSpec& system,
                                           const BathSpec& bath, double /*kappa*/) {
    const auto m_levels = static_cast<Eigen::Index>(system.size());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(m_levels, m_levels);

    // Diagonal: block norms.
    for (std::size_t b = 0; b < state.blocks.size(); ++b) {
        const auto [begin, end] = state.blocks[b];
        double p = 0.0;
        for (std::size_t i = begin; i < end; ++i) p += std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
        rho(state.block_levels[b], state.block_levels[b]) = p;
    }

    // Off-diagonal: F_nm as the double sum over the two level blocks with the
    // factorized decoherence overlap per basis pair. Upper triangle, mirrored.
    struct Pair {
        std::size_t bn, bm;
    };
    std::vector<Pair> pairs;
    for (std::size_t bn = 0; bn < state.blocks.size(); ++bn)
        for (std::size_t bm = bn + 1; bm < state.blocks.size(); ++bm)
            pairs.push_back({bn, bm});

    std::vector<std::complex<double>> f_values(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [bn, bm] = pairs[p];
        const auto level_n = static_cast<std::size_t>(state.block_levels[bn]);
        const auto level_m = static_cast<std::size_t>(state.block_levels[bm]);
        const auto [n_begin, n_end] = state.blocks[bn];
        const auto [m_begin, m_end] = state.blocks[bm];

        int occ_cap = 0;
        for (std::size_t a = n_begin; a < n_end; ++a)
            for (int occ : state.basis[a].occupancy) occ_cap = std::max(occ_cap, occ);
        for (std::size_t b = m_begin; b < m_end; ++b)
            for (int occ : state.basis[b].occupancy) occ_cap = std::max(occ_cap, occ);
        ++occ_cap;

        // Per-mode lookup tables: the double sum touches each (occ_m, occ_n)
        // overlap many times.
        std::vector<Eigen::MatrixXd> table(bath.modes());
        for (std::size_t j = 0; j < bath.modes(); ++j) {
            const double delta = relative_displacement(system, bath, level_n, level_m, j);
            table[j].resize(occ_cap, occ_cap);
            for (int a = 0; a < occ_cap; ++a)
                for (int b = 0; b < occ_cap; ++b)
                    table[j](a, b) = displaced_overlap(a, b, delta);
        }

        std::complex<double> f = 0.0;
        for (std::size_t a = n_begin; a < n_end; ++a) {
            const auto& occ_n = state.basis[a].occupancy;
            for (std::size_t b = m_begin; b < m_end; ++b) {
                const auto& occ_m = state.basis[b].occupancy;
                double overlap = 1.0;
                for (std::size_t j = 0; j < bath.modes() && overlap != 0.0; ++j)
                    overlap *= table[j](occ_m[j], occ_n[j]);
                if (overlap == 0.0) continue;
                f += state.amplitudes[static_cast<Eigen::Index>(a)] *
                     std::conj(state.amplitudes[static_cast<Eigen::Index>(b)]) * overlap;
            }
        }
        f_values[p] = f;
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const int n = state.block_levels[pairs[p].bn];
        const int m = state.block_levels[pairs[p].bm];
        rho(n, m) = f_values[p];
        rho(m, n) = std::conj(f_values[p]);
    }
    return ReducedDensityMatrix(std::move(rho));
}

TypicalityReport pn_typicality_check(const SystemSpec& system, const BathSpec& bath,
                                     const ShellWindow& shell, double kappa,
                                     std::span<const std::uint64_t> seeds,
                                     std::uint64_t cap, const PnOptions& options) {
    const auto windows = shell_windows(system, bath, shell, kappa, options);
    if (windows.empty()) throw EmptyShell("no system level admits bath states in the shell");

    TypicalityReport report;
    std::vector<mpz_class> counts;
    mpz_class total = 0;
    for (const auto& lw : windows) {
        mpz_class c = count_bath_states_exact(lw.window);
        if (c == 0) continue;
        report.levels.push_back(lw.level);
        total += c;
        counts.push_back(std::move(c));
    }
    if (total == 0) throw EmptyShell("every quantized window in the shell is empty");
    if (total > cap) throw CapExceeded(total.get_str(), mpz_get_d(total.get_mpz_t()));
    report.shell_dimension = total.get_ui();
    for (const auto& c : counts) {
        mpq_class q(c, total);
        q.canonicalize();
        report.reference_p.push_back(mpq_get_d(q.get_mpq_t()));
    }

    report.seeds.assign(seeds.begin(), seeds.end());
    report.deviations.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        const UniverseState state =
            sample_universe_state(system, bath, shell, kappa, seeds[i], cap, options);
        double dev = 0.0;
        for (std::size_t b = 0; b < state.blocks.size(); ++b) {
            const auto [begin, end] = state.blocks[b];
            double p = 0.0;
            for (std::size_t a = begin; a < end; ++a)
                p += std::norm(state.amplitudes[static_cast<Eigen::Index>(a)]);
            dev = std::max(dev, std::abs(p - report.reference_p[b]));
        }
        report.deviations[i] = dev;
    });

    std::vector<double> sorted = report.deviations;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    report.median_deviation = sorted.empty() ? 0.0
                              : (sorted.size() % 2 == 1 ? sorted[h]
                                                        : 0.5 * (sorted[h - 1] + sorted[h]));
    return report;
}

}  // namespace thermalize
