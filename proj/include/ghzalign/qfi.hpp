#pragma once

#include "ghzalign/density_matrix.hpp"
#include "ghzalign/errors.hpp"
#include "ghzalign/rng.hpp"
#include "ghzalign/spin_algebra.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

namespace ghzalign {

/// Index order of every 3x3 Fisher-type matrix.
enum Param : int { kAlpha = 0, kBeta = 1, kGamma = 2 };

inline constexpr double kSinBetaGuard = 1e-9;
inline constexpr double kDeterminantGuard = 1e-12;
inline constexpr double kDefaultEigCutoff = 1e-10;

/// H_m = i (d_m U^dagger) U for m = alpha, beta, gamma.
struct GeneratorSet {
    CMatrix h_alpha;
    CMatrix h_beta;
    CMatrix h_gamma;

    const CMatrix& operator[](int m) const { return m == kAlpha ? h_alpha : (m == kBeta ? h_beta : h_gamma); }
};

/// Coefficients c with H_m = c_m . (Jx, Jy, Jz).
inline Eigen::Matrix3d generator_coefficients(const EulerAngles& angles) {
    const double cb = std::cos(angles.beta()), sb = std::sin(angles.beta());
    const double cg = std::cos(angles.gamma()), sg = std::sin(angles.gamma());
    Eigen::Matrix3d c;
    c << sb * cg, -sb * sg, -cb,  //
        -sg, -cg, 0.0,            //
        0.0, 0.0, -1.0;
    return c;
}

inline GeneratorSet generators(const SpinOperators& ops, const EulerAngles& angles) {
    const Eigen::Matrix3d c = generator_coefficients(angles);
    auto combine = [&](int m) -> CMatrix { return c(m, 0) * ops.jx + c(m, 1) * ops.jy + c(m, 2) * ops.jz; };
    return {combine(kAlpha), combine(kBeta), -ops.jz};
}

inline GeneratorSet generators(Spin spin, const EulerAngles& angles) {
    return generators(spin_operators(spin), angles);
}

struct QfiMatrix {
    Eigen::Matrix3d entries = Eigen::Matrix3d::Zero();

    double trace() const { return entries.trace(); }
    double operator()(int m, int n) const { return entries(m, n); }
};

/// Adjugate inverse with |det| guard.
inline Eigen::Matrix3d inverse(const QfiMatrix& f) {
    const Eigen::Matrix3d& a = f.entries;
    Eigen::Matrix3d adj;
    adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
    adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
    adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
    adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double det = a(0, 0) * adj(0, 0) + a(0, 1) * adj(1, 0) + a(0, 2) * adj(2, 0);
    if (!(std::abs(det) > kDeterminantGuard))
        throw SingularRotation("Fisher matrix is singular (|det| = " + std::to_string(std::abs(det)) + ")");
    return adj / det;
}

inline double trace_inverse(const QfiMatrix& f) { return inverse(f).trace(); }

namespace detail {

// F_mn = 4 (Re<H_m psi|H_n psi> - <H_m><H_n>), using H_m psi = c_m . (J psi).
inline QfiMatrix qfi_from_spin_images(const CVector& psi, const CVector (&jpsi)[3], const Eigen::Matrix3d& coeff) {
    CVector hpsi[3];
    double mean[3];
    for (int m = 0; m < 3; ++m) {
        hpsi[m] = coeff(m, 0) * jpsi[0] + coeff(m, 1) * jpsi[1] + coeff(m, 2) * jpsi[2];
        mean[m] = psi.dot(hpsi[m]).real();
    }
    QfiMatrix f;
    for (int m = 0; m < 3; ++m)
        for (int n = m; n < 3; ++n) {
            f.entries(m, n) = 4.0 * (hpsi[m].dot(hpsi[n]).real() - mean[m] * mean[n]);
            f.entries(n, m) = f.entries(m, n);
        }
    return f;
}

} // namespace detail

/// Pure-state QFI, F_mn = 4 cov(H_m, H_n) in the unrotated probe state.
inline QfiMatrix qfi_pure(const SpinState& state, const SpinOperators& ops, const EulerAngles& angles) {
    const CVector& psi = state.amplitudes;
    const CVector jpsi[3] = {ops.jx * psi, ops.jy * psi, ops.jz * psi};
    return detail::qfi_from_spin_images(psi, jpsi, generator_coefficients(angles));
}

inline QfiMatrix qfi_pure(const SpinState& state, const EulerAngles& angles) {
    return qfi_pure(state, spin_operators(state.spin), angles);
}

namespace detail {

// Literal overlap form 2<d_m psi|d_n psi> + 2<d_n psi|d_m psi> + 4<psi|d_m psi><psi|d_n psi>
// with central differences of psi(theta) = U(theta) psi_0. Complex so callers
// can inspect the imaginary residual.
inline Eigen::Matrix3cd fd_fisher_complex(const SpinState& state, const EulerAngles& angles, double step) {
    const std::array<double, 3> theta = angles.as_array();
    auto psi_at = [&](const std::array<double, 3>& t) -> CVector {
        return rotation(state.spin, t[0], t[1], t[2]) * state.amplitudes;
    };
    const CVector psi = psi_at(theta);
    CVector d[3];
    for (int m = 0; m < 3; ++m) {
        auto plus = theta, minus = theta;
        plus[m] += step;
        minus[m] -= step;
        d[m] = (psi_at(plus) - psi_at(minus)) / (2.0 * step);
    }
    Eigen::Matrix3cd f;
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
            f(m, n) = 2.0 * d[m].dot(d[n]) + 2.0 * d[n].dot(d[m]) + 4.0 * psi.dot(d[m]) * psi.dot(d[n]);
    return f;
}

} // namespace detail

/// Finite-difference oracle for the QFI. step must lie in [1e-7, 1e-3].
inline QfiMatrix qfi_pure_fd(const SpinState& state, const EulerAngles& angles, double step = 1e-5) {
    if (!(step >= 1e-7 && step <= 1e-3)) throw std::invalid_argument("qfi_pure_fd: step outside [1e-7, 1e-3]");
    return QfiMatrix{detail::fd_fisher_complex(state, angles, step).real()};
}

/// Mixed-state QFI from the spectral decomposition of rho:
///   F_mn = sum_k 4 l_k cov_k(H_m, H_n) - sum_{k!=l} 8 l_k l_l/(l_k + l_l) Re(<k|H_m|l><l|H_n|k>)
/// The first sum keeps l_k > eig_cutoff; pairs with l_k + l_l <= eig_cutoff are skipped.
/// F is bilinear in the generators, so the same expression with (J_a, J_b) in
/// place of (H_m, H_n) gives a 3x3 tensor G and F = C G C^T for the generator
/// coefficients C. G is built once; evaluation at any angle is then O(1).
class MixedQfi {
public:
    MixedQfi(const DensityMatrix& rho, const SpinOperators& ops, double eig_cutoff = kDefaultEigCutoff) {
        if (ops.dim() != rho.matrix.rows()) throw std::invalid_argument("qfi_mixed: operator dimension mismatch");
        rho.check_hermitian_unit_trace();
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho.matrix);
        const Eigen::VectorXd& lambda = eig.eigenvalues();
        if (lambda.minCoeff() < -1e-10)
            throw std::invalid_argument("qfi_mixed: density matrix not positive semidefinite");
        const CMatrix& v = eig.eigenvectors();
        const Eigen::Index d = lambda.size();

        CMatrix spin_eig[3];
        for (int a = 0; a < 3; ++a) {
            const Eigen::SparseMatrix<Complex> sparse = ops[a].sparseView();
            spin_eig[a] = v.adjoint() * (sparse * v);
        }

        Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index k = 0; k < d; ++k)
            for (Eigen::Index l = 0; l < d; ++l) {
                const double s = lambda(k) + lambda(l);
                if (k != l && s > eig_cutoff) weight(k, l) = 8.0 * lambda(k) * lambda(l) / s;
            }

        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                // Re(J_a(k,l) J_b(l,k)) for all k, l.
                const Eigen::MatrixXd prod = (spin_eig[a].array() * spin_eig[b].transpose().array()).real();
                double total = 0.0;
                for (Eigen::Index k = 0; k < d; ++k) {
                    if (lambda(k) <= eig_cutoff) continue;
                    const double cov = prod.row(k).sum() - spin_eig[a](k, k).real() * spin_eig[b](k, k).real();
                    total += 4.0 * lambda(k) * cov;
                }
                total -= (weight.array() * prod.array()).sum();
                tensor_(a, b) = total;
                tensor_(b, a) = total;
            }
    }

    MixedQfi(const DensityMatrix& rho, double eig_cutoff = kDefaultEigCutoff)
        : MixedQfi(rho, operators_for(rho), eig_cutoff) {}

    /// G_ab, the QFI tensor of the spin components.
    const Eigen::Matrix3d& tensor() const { return tensor_; }

    QfiMatrix at(const EulerAngles& angles) const {
        const Eigen::Matrix3d c = generator_coefficients(angles);
        return QfiMatrix{c * tensor_ * c.transpose()};
    }

private:
    Eigen::Matrix3d tensor_ = Eigen::Matrix3d::Zero();
};

inline QfiMatrix qfi_mixed(const DensityMatrix& rho, const SpinOperators& ops, const EulerAngles& angles,
                           double eig_cutoff = kDefaultEigCutoff) {
    return MixedQfi(rho, ops, eig_cutoff).at(angles);
}

inline QfiMatrix qfi_mixed(const DensityMatrix& rho, const EulerAngles& angles,
                           double eig_cutoff = kDefaultEigCutoff) {
    return qfi_mixed(rho, operators_for(rho), angles, eig_cutoff);
}

// ---------------------------------------------------------------------------
// Haar averages of Tr F
// ---------------------------------------------------------------------------

struct HaarAverage {
    double value = 0.0;
    double std_error = 0.0;  ///< 0 on the analytic path
    long long n_samples = 0;  ///< 0 on the analytic path
};

/// (16/3)(dSz)^2 + (10/3)(dSx)^2 + (10/3)(dSy)^2.
inline HaarAverage haar_avg_trace_analytic(const SpinState& state) {
    const SpinOperators ops = spin_operators(state.spin);
    const Eigen::Vector3d first = first_moments(state, ops);
    const Eigen::Vector3d second = second_moments(state, ops);
    const Eigen::Vector3d var = second - first.cwiseProduct(first);
    return {16.0 / 3.0 * var.z() + 10.0 / 3.0 * (var.x() + var.y()), 0.0, 0};
}

/// Monte Carlo over the SO(3) Haar measure: alpha, gamma ~ U[0, 2pi), cos beta ~ U[-1, 1].
/// Sample i draws from its own counter substream and partial sums are reduced in
/// fixed-size chunks in index order, so the result is bit-identical for any
/// thread count.
inline HaarAverage haar_avg_trace_mc(const SpinState& state, long long n_samples, std::uint64_t seed,
                                     unsigned threads = 1) {
    if (n_samples < 100) throw std::invalid_argument("haar_avg_trace_mc: n_samples must be >= 100");
    const SpinOperators ops = spin_operators(state.spin);
    const CVector& psi = state.amplitudes;
    const CVector jpsi[3] = {ops.jx * psi, ops.jy * psi, ops.jz * psi};

    constexpr long long kChunk = 4096;
    const long long n_chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<double> sums(n_chunks, 0.0), squares(n_chunks, 0.0);

    auto run_chunk = [&](long long c) {
        double s = 0.0, s2 = 0.0;
        const long long end = std::min(n_samples, (c + 1) * kChunk);
        for (long long i = c * kChunk; i < end; ++i) {
            CounterRng rng(seed, static_cast<std::uint64_t>(i));
            const double alpha = kTwoPi * rng.uniform();
            const double beta = std::acos(std::clamp(2.0 * rng.uniform() - 1.0, -1.0, 1.0));
            const double gamma = kTwoPi * rng.uniform();
            const double t =
                detail::qfi_from_spin_images(psi, jpsi, generator_coefficients(EulerAngles(alpha, beta, gamma)))
                    .trace();
            s += t;
            s2 += t * t;
        }
        sums[c] = s;
        squares[c] = s2;
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        for (long long c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (long long c = t; c < n_chunks; c += threads) run_chunk(c);
            });
        for (auto& th : pool) th.join();
    }

    double s = 0.0, s2 = 0.0;
    for (long long c = 0; c < n_chunks; ++c) {
        s += sums[c];
        s2 += squares[c];
    }
    const double n = static_cast<double>(n_samples);
    const double mean = s / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n), n_samples};
}

// ---------------------------------------------------------------------------
// GHZ closed forms and comparison baseline
// ---------------------------------------------------------------------------

/// [[N^2 cos^2 b + N sin^2 b, 0, N^2 cos b], [0, N, 0], [N^2 cos b, 0, N^2]].
/// Matches qfi_pure on the GHZ state for N >= 3; at N = 1, 2 the true matrix
/// depends on gamma and on the GHZ phase.
inline QfiMatrix closed_form_ghz_qfi(int n, double beta) {
    if (n < 1) throw std::invalid_argument("closed_form_ghz_qfi: N must be >= 1");
    const double nn = n, cb = std::cos(beta), sb = std::sin(beta);
    QfiMatrix f;
    f.entries << nn * nn * cb * cb + nn * sb * sb, 0.0, nn * nn * cb,  //
        0.0, nn, 0.0,                                                  //
        nn * nn * cb, 0.0, nn * nn;
    return f;
}

inline void require_nonsingular_beta(double beta, const char* who) {
    if (!(std::abs(std::sin(beta)) > kSinBetaGuard))
        throw SingularRotation(std::string(who) + ": sin(beta) ~ 0, the z-y-z chart is singular (gimbal lock)");
}

/// Tr F^{-1} from the GHZ closed form: 1/N^2 + 2/(N sin^2 b). For N <= 2 the
/// computed F of the GHZ state is singular at every angle.
inline double ghz_crb_trace_inverse(int n, double beta) {
    if (n < 1) throw std::invalid_argument("ghz_crb_trace_inverse: N must be >= 1");
    require_nonsingular_beta(beta, "ghz_crb_trace_inverse");
    const double s2 = std::sin(beta) * std::sin(beta);
    return 1.0 / (static_cast<double>(n) * n) + 2.0 / (n * s2);
}

/// Published anti-coherent-state baseline 3/(N(N+1)) (1 + 2/sin^2 b).
inline double goldberg_bound(int n, double beta) {
    if (n < 1) throw std::invalid_argument("goldberg_bound: N must be >= 1");
    require_nonsingular_beta(beta, "goldberg_bound");
    const double s2 = std::sin(beta) * std::sin(beta);
    return 3.0 / (static_cast<double>(n) * (n + 1)) * (1.0 + 2.0 / s2);
}

/// Im<d_m psi|d_n psi> = Im<psi_0|H_m H_n|psi_0>. Antisymmetric; zero on the diagonal.
inline Eigen::Matrix3d saturation_check(const SpinState& state, const EulerAngles& angles) {
    const GeneratorSet h = generators(state.spin, angles);
    CVector hpsi[3];
    for (int m = 0; m < 3; ++m) hpsi[m] = h[m] * state.amplitudes;
    Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
    for (int m = 0; m < 3; ++m)
        for (int n = m + 1; n < 3; ++n) {
            out(m, n) = hpsi[m].dot(hpsi[n]).imag();
            out(n, m) = -out(m, n);
        }
    return out;
}

struct CostBounds {
    double mean_trace_qfi = 0.0;
    double nine_over_bound = 0.0;  ///< 9 / Tr(F-bar), lower bound on the averaged cost
};

inline CostBounds cost_lower_bounds(const SpinState& state) {
    const double t = haar_avg_trace_analytic(state).value;
    if (!(t > 1e-12)) throw DegenerateState("cost_lower_bounds: state is invariant under all rotations");
    return {t, 9.0 / t};
}

} // namespace ghzalign
