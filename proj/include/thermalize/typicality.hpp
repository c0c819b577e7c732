#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "thermalize/shell_counting.hpp"

namespace thermalize {

inline constexpr std::uint64_t kDefaultSamplingCap = 1'000'000;

struct BasisLabel {
    int level;
    std::vector<int> occupancy;
};

/// Random pure state of the constrained universe. Basis labels are grouped
/// by level (blocks records [begin, end) per row index into basis).
struct UniverseState {
    std::vector<BasisLabel> basis;
    Eigen::VectorXcd amplitudes;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::vector<int> block_levels;

    std::size_t dimension() const { return basis.size(); }
};

/// Amplitudes i.i.d. standard complex normal, normalized: uniform on the
/// unit sphere of the shell subspace. Deterministic given seed.
UniverseState sample_universe_state(const SystemSpec& system, const BathSpec& bath,
                                    const ShellWindow& shell, double kappa,
                                    std::uint64_t seed,
                                    std::uint64_t cap = kDefaultSamplingCap,
                                    const PnOptions& options = {});

/// Associated Laguerre polynomial L_n^{(k)}(x) by the three-term recurrence in n.
double laguerre_assoc(unsigned n, unsigned k, double x);

/// Displaced Fock overlap <m|D(delta_alpha)|n> for real displacement.
double displaced_overlap(int m, int n, double delta_alpha);

struct DecoherenceFactor {
    std::vector<double> factors;  // d_j per mode
    double product = 1.0;         // D
};

/// D = prod_j <occ_m[j](m) | occ_n[j](n)> with per-mode relative displacement
/// Delta_j = -g_j (lambda_n - lambda_m) / (2 w_j).
DecoherenceFactor decoherence_product(const SystemSpec& system, const BathSpec& bath,
                                      std::size_t n, std::size_t m,
                                      std::span<const int> occ_n,
                                      std::span<const int> occ_m);

class ReducedDensityMatrix {
public:
    explicit ReducedDensityMatrix(Eigen::MatrixXcd entries);

    int dim() const { return static_cast<int>(entries_.rows()); }
    double p(int n) const { return entries_(n, n).real(); }
    std::complex<double> f(int n, int m) const { return entries_(n, m); }
    const Eigen::MatrixXcd& matrix() const { return entries_; }

    double trace_error() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;

private:
    Eigen::MatrixXcd entries_;
};

/// Partial trace over the bath in the undisplaced Fock basis: diagonal blocks
/// give P_n, cross blocks carry the factorized decoherence overlaps.
ReducedDensityMatrix reduce_density_matrix(const UniverseState& state,
                                           const SystemSpec& system,
                                           const BathSpec& bath, double kappa);

struct TypicalityReport {
    std::vector<std::uint64_t> seeds;
    std::vector<double> deviations;  // per seed: max_n |P_n(sampled) - reference|
    double median_deviation = 0.0;
    std::vector<int> levels;
    std::vector<double> reference_p;  // Omega_N(n) / Omega_{N+1}
    std::uint64_t shell_dimension = 0;
};

/// Law-of-large-numbers check: sampled diagonals against the counting ratio.
TypicalityReport pn_typicality_check(const SystemSpec& system, const BathSpec& bath,
                                     const ShellWindow& shell, double kappa,
                                     std::span<const std::uint64_t> seeds,
                                     std::uint64_t cap = kDefaultSamplingCap,
                                     const PnOptions& options = {});

}  // namespace thermalize
