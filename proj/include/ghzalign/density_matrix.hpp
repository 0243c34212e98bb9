#pragma once

#include "ghzalign/spin_algebra.hpp"

#include <Eigen/Sparse>

#include <bit>
#include <cstdint>
#include <string>

namespace ghzalign {

/// Hilbert space a density matrix lives on: the (2j+1)-dim spin-j irrep, or the
/// full 2^N tensor space of N qubits (needed when the state has weight outside
/// the symmetric subspace, e.g. the maximally mixed state).
enum class Space { Symmetric, FullTensor };

struct DensityMatrix {
    Spin spin = Spin::from_twice(0);
    Space space = Space::Symmetric;
    CMatrix matrix;

    int qubits() const noexcept { return spin.twice(); }

    static Eigen::Index expected_dim(Spin spin, Space space) {
        return space == Space::Symmetric ? spin.dim() : (Eigen::Index{1} << spin.twice());
    }

    /// Full validation: Hermitian (1e-12), unit trace (1e-10), eigenvalues >= -1e-10.
    static DensityMatrix make(Spin spin, Space space, CMatrix matrix) {
        DensityMatrix rho = unchecked(spin, space, std::move(matrix));
        rho.check_hermitian_unit_trace();
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho.matrix, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("density matrix: not positive semidefinite (min eigenvalue " +
                                        std::to_string(eig.eigenvalues().minCoeff()) + ")");
        return rho;
    }

    /// For channel outputs that are valid by construction; checks shape only.
    static DensityMatrix unchecked(Spin spin, Space space, CMatrix matrix) {
        const Eigen::Index d = expected_dim(spin, space);
        if (matrix.rows() != d || matrix.cols() != d)
            throw std::invalid_argument("density matrix: expected dimension " + std::to_string(d));
        return DensityMatrix{spin, space, std::move(matrix)};
    }

    static DensityMatrix pure(const SpinState& state) {
        return unchecked(state.spin, Space::Symmetric, state.amplitudes * state.amplitudes.adjoint());
    }

    void check_hermitian_unit_trace() const {
        if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("density matrix: not Hermitian");
        const Complex tr = matrix.trace();
        if (std::abs(tr - Complex(1.0)) > 1e-10)
            throw std::invalid_argument("density matrix: trace " + std::to_string(tr.real()) + " != 1");
    }
};

/// Collective S_a = (1/2) sum_k sigma_{a,k} on N qubits. Qubit k is bit k of the
/// basis index; bit value 0 is spin up.
inline SpinOperators collective_operators(int n) {
    if (n < 1 || n > 14) throw std::invalid_argument("collective_operators: N must be in [1, 14]");
    const Eigen::Index d = Eigen::Index{1} << n;
    SpinOperators ops{CMatrix::Zero(d, d), CMatrix::Zero(d, d), CMatrix::Zero(d, d)};
    for (Eigen::Index b = 0; b < d; ++b) {
        const int downs = std::popcount(static_cast<std::uint64_t>(b));
        ops.jz(b, b) = 0.5 * (n - 2 * downs);
        for (int k = 0; k < n; ++k) {
            const Eigen::Index flipped = b ^ (Eigen::Index{1} << k);
            const bool is_up = ((b >> k) & 1) == 0;
            ops.jx(flipped, b) += 0.5;
            ops.jy(flipped, b) += is_up ? Complex(0.0, 0.5) : Complex(0.0, -0.5);
        }
    }
    return ops;
}

/// Embeds a Dicke-basis state into the 2^N tensor space: |j, j-k> maps to the
/// uniform superposition of bit strings with k ones.
inline CVector embed_symmetric(const SpinState& state) {
    const int n = state.spin.twice();
    if (n > 20) throw std::invalid_argument("embed_symmetric: N too large for the tensor space");
    const Eigen::Index d = Eigen::Index{1} << n;
    CVector out = CVector::Zero(d);
    for (Eigen::Index b = 0; b < d; ++b) {
        const int k = std::popcount(static_cast<std::uint64_t>(b));
        out(b) = state.amplitudes(k) / std::sqrt(binomial(n, k));
    }
    return out;
}

inline SpinOperators operators_for(const DensityMatrix& rho) {
    return rho.space == Space::Symmetric ? spin_operators(rho.spin) : collective_operators(rho.qubits());
}

} // namespace ghzalign
