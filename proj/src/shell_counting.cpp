#include "thermalize/shell_counting.hpp"

#include <algorithm>
#include <cmath>

#include "thermalize/parallel.hpp"

namespace thermalize {

namespace {

// Grid snapping for window endpoints: (E - eps)/u lands a few ulps off an
// integer whenever the physical inputs are exact multiples of u, so treat
// values within 1e-9 relative of an integer as that integer.
constexpr double kGridTol = 1e-9;

long long snap_ceil(double x) {
    const double r = std::nearbyint(x);
    if (std::abs(x - r) <= kGridTol * std::max(1.0, std::abs(x)))
        return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(x));
}

long long snap_floor(double x) {
    const double r = std::nearbyint(x);
    if (std::abs(x - r) <= kGridTol * std::max(1.0, std::abs(x)))
        return static_cast<long long>(r);
    return static_cast<long long>(std::floor(x));
}

long long integer_weight(double frequency, double unit) {
    const double ratio = frequency / unit;
    const double rounded = std::nearbyint(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-12 * std::max(1.0, ratio))
        throw Error("bath frequency " + std::to_string(frequency) +
                    " is not an integer multiple of quantum_unit " + std::to_string(unit));
    return static_cast<long long>(rounded);
}

// Ratio of two non-negative big integers as a double, without intermediate
// double rounding of numerator or denominator.
double mpz_ratio(const mpz_class& num, const mpz_class& den) {
    mpq_class q(num, den);
    q.canonicalize();
    return mpq_get_d(q.get_mpq_t());
}

double log_sum_exp(const std::vector<double>& logs) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : logs) peak = std::max(peak, v);
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - peak);
    return peak + std::log(acc);
}

}  // namespace

QuantizedShell QuantizedShell::from_bath(const BathSpec& bath, double e_lo, double delta) {
    if (!(delta > 0.0)) throw Error("shell thickness must be positive");
    QuantizedShell shell;
    shell.unit = bath.quantum_unit;
    shell.weights.reserve(bath.modes());
    for (double w : bath.frequencies)
        shell.weights.push_back(integer_weight(w, bath.quantum_unit));
    shell.lo = snap_ceil(e_lo / bath.quantum_unit);
    shell.hi = snap_floor((e_lo + delta) / bath.quantum_unit);
    return shell;
}

mpz_class count_degenerate_closed_form(const QuantizedShell& shell) {
    if (shell.weights.empty()) throw Error("empty bath");
    const long long k = shell.weights.front();
    for (long long w : shell.weights)
        if (w != k) throw Error("closed form requires equal weights");
    mpz_class total = 0;
    if (shell.empty()) return total;
    const unsigned long n = static_cast<unsigned long>(shell.weights.size());
    // Lattice totals are multiples of k; quanta Q distribute over N modes
    // in C(Q + N - 1, N - 1) ways.
    const long long q_lo = (shell.lo_clipped() + k - 1) / k;
    const long long q_hi = shell.hi / k;
    mpz_class term;
    for (long long q = q_lo; q <= q_hi; ++q) {
        mpz_bin_uiui(term.get_mpz_t(), static_cast<unsigned long>(q) + n - 1, n - 1);
        total += term;
    }
    return total;
}

mpz_class count_by_convolution(const QuantizedShell& shell) {
    if (shell.weights.empty()) throw Error("empty bath");
    mpz_class zero = 0;
    if (shell.empty()) return zero;
    const std::size_t table_size = static_cast<std::size_t>(shell.hi) + 1;
    // f[q] = number of occupancy vectors with total exactly q. One pass per
    // mode with the unbounded-occupancy recurrence f'[q] = f[q] + f'[q-k].
    std::vector<mpz_class> f(table_size);
    f[0] = 1;
    for (long long k : shell.weights) {
        const std::size_t step = static_cast<std::size_t>(k);
        for (std::size_t q = step; q < table_size; ++q) f[q] += f[q - step];
    }
    mpz_class total = 0;
    for (long long q = shell.lo_clipped(); q <= shell.hi; ++q)
        total += f[static_cast<std::size_t>(q)];
    return total;
}

mpz_class count_bath_states_exact(const QuantizedShell& shell) {
    if (shell.weights.empty()) throw Error("empty bath");
    if (shell.empty()) return mpz_class(0);
    const bool degenerate =
        std::all_of(shell.weights.begin(), shell.weights.end(),
                    [&](long long w) { return w == shell.weights.front(); });
    return degenerate ? count_degenerate_closed_form(shell) : count_by_convolution(shell);
}

namespace {

void enumerate_rec(const QuantizedShell& shell, std::size_t mode, long long remaining_hi,
                   long long remaining_lo, std::vector<int>& occ,
                   std::vector<std::vector<int>>& out) {
    if (mode + 1 == shell.weights.size()) {
        const long long k = shell.weights[mode];
        const long long n_lo = remaining_lo <= 0 ? 0 : (remaining_lo + k - 1) / k;
        const long long n_hi = remaining_hi / k;
        for (long long n = n_lo; n <= n_hi; ++n) {
            occ[mode] = static_cast<int>(n);
            out.push_back(occ);
        }
        return;
    }
    const long long k = shell.weights[mode];
    for (long long n = 0; n * k <= remaining_hi; ++n) {
        occ[mode] = static_cast<int>(n);
        enumerate_rec(shell, mode + 1, remaining_hi - n * k, remaining_lo - n * k, occ, out);
    }
}

}  // namespace

std::vector<std::vector<int>> enumerate_bath_states(const QuantizedShell& shell,
                                                    std::uint64_t cap) {
    std::vector<std::vector<int>> out;
    if (shell.weights.empty() || shell.empty()) return out;
    const mpz_class count = count_bath_states_exact(shell);
    if (count > cap)
        throw CapExceeded(count.get_str(), mpz_get_d(count.get_mpz_t()));
    out.reserve(static_cast<std::size_t>(count.get_ui()));
    std::vector<int> occ(shell.weights.size(), 0);
    enumerate_rec(shell, 0, shell.hi, shell.lo_clipped(), occ, out);
    return out;
}

double omega_bath_analytic_log(double e_avail, double delta, const BathSpec& bath) {
    if (!(e_avail > 0.0))
        throw NonPositiveEnergy("available bath energy must be positive");
    if (!(delta > 0.0)) throw Error("shell thickness must be positive");
    const double n = static_cast<double>(bath.modes());
    double log_omega = (n - 1.0) * std::log(e_avail) + std::log(delta) - std::lgamma(n);
    for (double w : bath.frequencies) log_omega -= std::log(w);
    return log_omega;
}

double omega_bath_analytic(double e_avail, double delta, const BathSpec& bath) {
    return std::exp(omega_bath_analytic_log(e_avail, delta, bath));
}

CountTable pn_counting(const SystemSpec& system, const BathSpec& bath,
                       const ShellWindow& shell, double kappa, CountMode mode,
                       const PnOptions& options) {
    if (mode == CountMode::analytic && bath.modes() < 2)
        throw Error("analytic counting needs at least 2 bath modes");

    const DeformedSpectrum deformed = deformed_spectrum(system, kappa);

    CountTable table;
    table.energy = shell.energy;
    table.thickness = shell.thickness;
    table.kappa = kappa;
    table.bath_modes = static_cast<int>(bath.modes());
    table.mode = mode;

    // Summation bound: bath energy strictly positive and system energy
    // admissible. The deformed cut drops levels pushed below zero.
    for (std::size_t n = 0; n < system.size(); ++n) {
        if (options.max_level && static_cast<int>(n) > *options.max_level) break;
        const double e_avail = shell.energy - deformed.levels[n];
        if (!(e_avail > 0.0)) continue;
        if (system.energies[n] < 0.0) continue;
        if (options.cut == LevelCut::deformed && deformed.levels[n] < 0.0) continue;
        CountRecord rec;
        rec.level = static_cast<int>(n);
        rec.epsilon = system.energies[n];
        rec.epsilon_deformed = deformed.levels[n];
        table.rows.push_back(std::move(rec));
    }
    if (table.rows.empty())
        throw EmptyShell("no system level admits bath states in the shell");
    table.levels_included = static_cast<int>(table.rows.size());

    const bool want_analytic = bath.modes() >= 2;
    for (CountRecord& rec : table.rows) {
        if (want_analytic)
            rec.log_omega_analytic = omega_bath_analytic_log(
                shell.energy - rec.epsilon_deformed, shell.thickness, bath);
    }

    if (mode == CountMode::exact) {
        parallel_for(table.rows.size(), [&](std::size_t i) {
            CountRecord& rec = table.rows[i];
            const QuantizedShell window = QuantizedShell::from_bath(
                bath, shell.energy - rec.epsilon_deformed, shell.thickness);
            rec.exact = count_bath_states_exact(window);
        });
        mpz_class total = 0;
        for (const CountRecord& rec : table.rows) total += *rec.exact;
        if (total == 0)
            throw EmptyShell("every quantized window in the shell is empty");
        for (CountRecord& rec : table.rows) rec.p_exact = mpz_ratio(*rec.exact, total);
        table.total_exact = std::move(total);
    }

    if (want_analytic) {
        std::vector<double> logs;
        logs.reserve(table.rows.size());
        for (const CountRecord& rec : table.rows) logs.push_back(rec.log_omega_analytic);
        const double log_total = log_sum_exp(logs);
        table.log_total_analytic = log_total;
        for (CountRecord& rec : table.rows)
            rec.p_analytic = std::exp(rec.log_omega_analytic - log_total);
    }

    return table;
}

std::vector<DeformationBand> deformation_map(const SystemSpec& system,
                                             const ShellWindow& shell, double kappa) {
    const DeformedSpectrum deformed = deformed_spectrum(system, kappa);
    std::vector<DeformationBand> bands;
    for (std::size_t n = 0; n < system.size(); ++n) {
        const double lo = shell.energy - deformed.levels[n];
        const double hi = lo + shell.thickness;
        if (hi < 0.0) continue;
        bands.push_back({static_cast<int>(n), std::max(lo, 0.0), hi});
    }
    return bands;
}

}  // namespace thermalize
