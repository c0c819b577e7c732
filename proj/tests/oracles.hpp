// Test-only reference implementations, kept independent of the library code
// paths they validate.
#pragma once

#include <Eigen/Dense>
#include <gmpxx.h>

#include <complex>
#include <vector>

#include "thermalize/typicality.hpp"

namespace oracles {

/// Matrix exponential by scaling and squaring with a Taylor series.
inline Eigen::MatrixXd expm(Eigen::MatrixXd a) {
    int squarings = 0;
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.25) {
        a *= 0.5;
        norm *= 0.5;
        ++squarings;
    }
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd term = result;
    for (int k = 1; k <= 40; ++k) {
        term = (term * a) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

/// Truncated displacement operator exp(alpha (a^dag - a)) on a dim-cut Fock
/// space. Column n is D(alpha)|n> in the Fock basis.
inline Eigen::MatrixXd displacement_matrix(double alpha, int dim) {
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) {
        const double amp = alpha * std::sqrt(static_cast<double>(n + 1));
        gen(n + 1, n) = amp;   // a^dag
        gen(n, n + 1) = -amp;  // -a
    }
    return expm(gen);
}

/// Fock cutoff rule used for oracle truncations.
inline int fock_cutoff(int max_occupancy, double alpha) {
    return max_occupancy + static_cast<int>(std::ceil(10.0 * std::abs(alpha))) + 16;
}

/// Exact associated Laguerre value L_n^{(k)}(num/den) in rational arithmetic.
inline mpq_class laguerre_rational(unsigned n, unsigned k, long num, long den) {
    const mpq_class x(num, den);
    mpq_class sum = 0;
    mpz_class binom, fact;
    mpq_class x_pow = 1;
    for (unsigned i = 0; i <= n; ++i) {
        mpz_bin_uiui(binom.get_mpz_t(), n + k, n - i);
        mpz_fac_ui(fact.get_mpz_t(), i);
        mpq_class term = mpq_class(binom) * x_pow / mpq_class(fact);
        if (i % 2 == 1) term = -term;
        sum += term;
        x_pow *= x;
    }
    sum.canonicalize();
    return sum;
}

/// Dense partial trace. Expands every basis ket of the universe state in the
/// undisplaced Fock product basis via the matrix-exponential displacement
/// operator, then contracts the bath indices explicitly.
inline Eigen::MatrixXcd dense_partial_trace(const thermalize::UniverseState& state,
                                            const thermalize::SystemSpec& system,
                                            const thermalize::BathSpec& bath) {
    const auto levels = static_cast<int>(system.size());
    const auto modes = static_cast<int>(bath.modes());

    int max_occ = 0;
    for (const auto& label : state.basis)
        for (int occ : label.occupancy) max_occ = std::max(max_occ, occ);
    double max_disp = 0.0;
    for (std::size_t n = 0; n < system.size(); ++n)
        for (std::size_t j = 0; j < bath.modes(); ++j)
            max_disp = std::max(std::abs(-system.couplings[n] * bath.strengths[j] /
                                         (2.0 * bath.frequencies[j])),
                                max_disp);
    const int cut = fock_cutoff(max_occ, max_disp);

    // Displacement columns per (level, mode).
    std::vector<std::vector<Eigen::MatrixXd>> disp(static_cast<std::size_t>(levels));
    for (int n = 0; n < levels; ++n)
        for (int j = 0; j < modes; ++j) {
            const double alpha = -system.couplings[static_cast<std::size_t>(n)] *
                                 bath.strengths[static_cast<std::size_t>(j)] /
                                 (2.0 * bath.frequencies[static_cast<std::size_t>(j)]);
            disp[static_cast<std::size_t>(n)].push_back(displacement_matrix(alpha, cut));
        }

    // psi[n][k1 + cut*k2 + ...] over the undisplaced Fock grid. Supports
    // any small mode count; index strides are cut^j.
    std::vector<std::size_t> stride(static_cast<std::size_t>(modes), 1);
    for (int j = 1; j < modes; ++j)
        stride[static_cast<std::size_t>(j)] =
            stride[static_cast<std::size_t>(j - 1)] * static_cast<std::size_t>(cut);
    const std::size_t bath_dim =
        stride.back() * static_cast<std::size_t>(cut);

    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(bath_dim), levels);
    std::vector<int> fock(static_cast<std::size_t>(modes), 0);
    for (std::size_t a = 0; a < state.basis.size(); ++a) {
        const auto& label = state.basis[a];
        const std::complex<double> amp = state.amplitudes[static_cast<Eigen::Index>(a)];
        // Tensor product of displaced Fock columns, accumulated mode by mode.
        std::vector<std::complex<double>> vec(1, amp);
        std::size_t dim_so_far = 1;
        for (int j = 0; j < modes; ++j) {
            const Eigen::VectorXd col =
                disp[static_cast<std::size_t>(label.level)][static_cast<std::size_t>(j)].col(
                    label.occupancy[static_cast<std::size_t>(j)]);
            std::vector<std::complex<double>> next(dim_so_far * static_cast<std::size_t>(cut));
            for (std::size_t base = 0; base < dim_so_far; ++base)
                for (int k = 0; k < cut; ++k)
                    next[base + stride[static_cast<std::size_t>(j)] * static_cast<std::size_t>(k)] =
                        vec[base] * col(k);
            vec = std::move(next);
            dim_so_far *= static_cast<std::size_t>(cut);
        }
        for (std::size_t i = 0; i < bath_dim; ++i)
            psi(static_cast<Eigen::Index>(i), label.level) += vec[i];
    }

    // rho(n,m) = sum_b psi(b,n) conj(psi(b,m))
    return (psi.adjoint() * psi).conjugate();
}

}  // namespace oracles
