#include "thermalize/core_model.hpp"

#include <cmath>
#include <utility>

namespace thermalize {

SystemSpec::SystemSpec(std::vector<double> energies_, std::vector<double> couplings_)
    : energies(std::move(energies_)), couplings(std::move(couplings_)) {
    if (energies.empty())
        throw DimensionMismatch("system needs at least one level");
    if (energies.size() != couplings.size())
        throw DimensionMismatch("energies and couplings differ in length");
    for (std::size_t n = 0; n < energies.size(); ++n) {
        if (!std::isfinite(energies[n]) || !std::isfinite(couplings[n]))
            throw Error("non-finite system parameter at level " + std::to_string(n));
        if (n > 0 && energies[n] < energies[n - 1])
            throw Error("system energies must be non-decreasing");
    }
}

SystemSpec SystemSpec::harmonic(double omega, std::size_t levels) {
    std::vector<double> eps(levels), lam(levels);
    for (std::size_t n = 0; n < levels; ++n) {
        eps[n] = static_cast<double>(n) * omega;
        lam[n] = static_cast<double>(n);
    }
    return SystemSpec(std::move(eps), std::move(lam));
}

BathSpec::BathSpec(std::vector<double> frequencies_, std::vector<double> strengths_,
                   double quantum_unit_)
    : frequencies(std::move(frequencies_)),
      strengths(std::move(strengths_)),
      quantum_unit(quantum_unit_) {
    if (frequencies.empty())
        throw DimensionMismatch("bath needs at least one mode");
    if (frequencies.size() != strengths.size())
        throw DimensionMismatch("frequencies and strengths differ in length");
    if (!(quantum_unit > 0.0) || !std::isfinite(quantum_unit))
        throw Error("quantum_unit must be positive");
    for (std::size_t j = 0; j < frequencies.size(); ++j) {
        if (!(frequencies[j] > 0.0) || !std::isfinite(frequencies[j]))
            throw Error("bath frequencies must be positive");
        if (!std::isfinite(strengths[j]))
            throw Error("non-finite bath strength at mode " + std::to_string(j));
    }
}

BathSpec BathSpec::degenerate(double omega, std::size_t modes, double strength) {
    return BathSpec(std::vector<double>(modes, omega),
                    std::vector<double>(modes, strength), omega);
}

double BathSpec::kappa() const {
    double k = 0.0;
    for (std::size_t j = 0; j < frequencies.size(); ++j)
        k += strengths[j] * strengths[j] / (4.0 * frequencies[j]);
    return k;
}

BathSpec BathSpec::with_kappa(double kappa_target) const {
    if (kappa_target < 0.0)
        throw Error("kappa_target must be non-negative");
    BathSpec out = *this;
    if (kappa_target == 0.0) {
        for (double& g : out.strengths) g = 0.0;
        return out;
    }
    const double base = kappa();
    if (base <= 0.0)
        throw Error("cannot rescale zero coupling strengths to a positive kappa_target");
    const double scale = std::sqrt(kappa_target / base);
    for (double& g : out.strengths) g *= scale;
    return out;
}

ShellWindow::ShellWindow(double energy_, double thickness_)
    : energy(energy_), thickness(thickness_) {
    if (!(thickness > 0.0) || !std::isfinite(thickness))
        throw Error("shell thickness must be positive");
    if (!(energy >= 0.0) || !std::isfinite(energy))
        throw Error("shell energy must be non-negative");
}

CouplingSummary coupling_summary(const SystemSpec& system, const BathSpec& bath) {
    const auto m = static_cast<Eigen::Index>(system.size());
    const auto n_modes = static_cast<Eigen::Index>(bath.modes());
    CouplingSummary out;
    out.kappa = bath.kappa();
    out.displacements.resize(m, n_modes);
    for (Eigen::Index n = 0; n < m; ++n)
        for (Eigen::Index j = 0; j < n_modes; ++j)
            out.displacements(n, j) =
                -system.couplings[static_cast<std::size_t>(n)] * bath.strengths[static_cast<std::size_t>(j)] /
                (2.0 * bath.frequencies[static_cast<std::size_t>(j)]);
    return out;
}

DeformedSpectrum deformed_spectrum(const SystemSpec& system, double kappa) {
    if (kappa < 0.0)
        throw Error("kappa must be non-negative");
    DeformedSpectrum out;
    out.levels.resize(system.size());
    for (std::size_t n = 0; n < system.size(); ++n)
        out.levels[n] = system.energies[n] - kappa * system.couplings[n] * system.couplings[n];
    return out;
}

double level_spacing_effective(const SystemSpec& system, double kappa, std::size_t n) {
    if (n + 1 >= system.size())
        throw Error("level index out of range for spacing");
    const double lam_sq_step =
        system.couplings[n + 1] * system.couplings[n + 1] - system.couplings[n] * system.couplings[n];
    return system.energies[n + 1] - system.energies[n] - kappa * lam_sq_step;
}

double relative_displacement(const SystemSpec& system, const BathSpec& bath,
                             std::size_t n, std::size_t m, std::size_t j) {
    if (n >= system.size() || m >= system.size())
        throw Error("level index out of range");
    if (j >= bath.modes())
        throw Error("mode index out of range");
    return -bath.strengths[j] * (system.couplings[n] - system.couplings[m]) /
           (2.0 * bath.frequencies[j]);
}

}  // namespace thermalize
