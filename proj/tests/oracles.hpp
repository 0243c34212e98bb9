#pragma once

// Test-only oracles. Everything here is computed along a path independent of the
// library routine it is used to check: tensor products of 2x2 rotations instead
// of spin-j exponentials, finite differences instead of closed-form generators,
// quadrature instead of the moment formula.

#include "ghzalign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace ghzalign::testing {

inline CVector random_amplitudes(Eigen::Index d, CounterRng& rng) {
    CVector a(d);
    for (Eigen::Index i = 0; i < d; ++i) a(i) = Complex(rng.normal(), rng.normal());
    return a.normalized();
}

inline SpinState random_state(Spin spin, CounterRng& rng) { return SpinState{spin, random_amplitudes(spin.dim(), rng)}; }

/// Angles away from the chart poles: beta in [0.15, pi - 0.15].
inline EulerAngles random_angles(CounterRng& rng) {
    return EulerAngles(kTwoPi * rng.uniform(), 0.15 + (kPi - 0.3) * rng.uniform(), kTwoPi * rng.uniform());
}

/// 2x2 matrix exp(-i a sz/2) exp(-i b sy/2) exp(-i g sz/2) written out by hand.
inline Eigen::Matrix2cd qubit_rotation(double a, double b, double g) {
    const double c = std::cos(b / 2), s = std::sin(b / 2);
    Eigen::Matrix2cd u;
    u << std::polar(c, -(a + g) / 2), -std::polar(s, -(a - g) / 2),  //
        std::polar(s, (a - g) / 2), std::polar(c, (a + g) / 2);
    return u;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// U^{(x) N} with qubit k on bit k (matches embed_symmetric / collective_operators).
inline CMatrix tensor_power(const Eigen::Matrix2cd& u, int n) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) out = kron(CMatrix(u), out);
    return out;
}

/// sigma_x on every qubit: flips all bits.
inline CVector apply_full_parity(const CVector& psi) {
    const Eigen::Index d = psi.size();
    CVector out(d);
    for (Eigen::Index b = 0; b < d; ++b) out(b ^ (d - 1)) = psi(b);
    return out;
}

/// H_m = i (d_m U^dagger) U by central differences of U at raw coordinates.
inline CMatrix fd_generator(Spin spin, const EulerAngles& angles, int m, double step) {
    auto t = angles.as_array();
    auto plus = t, minus = t;
    plus[m] += step;
    minus[m] -= step;
    const CMatrix dudag =
        (rotation(spin, plus[0], plus[1], plus[2]).adjoint() - rotation(spin, minus[0], minus[1], minus[2]).adjoint()) /
        (2 * step);
    return Complex(0, 1) * dudag * rotation(spin, t[0], t[1], t[2]);
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// Haar average of Tr F by quadrature of the finite-difference overlap-form QFI:
/// trapezoid rule in alpha and gamma (exact for the low trigonometric degree of
/// the integrand), Gauss-Legendre in cos(beta).
inline double haar_quadrature(const SpinState& state, int n_periodic = 6, int n_gauss = 6) {
    std::vector<double> x, w;
    gauss_legendre(n_gauss, x, w);
    double total = 0.0;
    for (int ia = 0; ia < n_periodic; ++ia)
        for (int ig = 0; ig < n_periodic; ++ig)
            for (int ib = 0; ib < n_gauss; ++ib) {
                const EulerAngles ang(kTwoPi * (ia + 0.5) / n_periodic, std::acos(x[ib]), kTwoPi * (ig + 0.5) / n_periodic);
                total += w[ib] * 0.5 * qfi_pure_fd(state, ang, 1e-5).trace();
            }
    return total / (n_periodic * n_periodic);
}

/// Min over pairings of the max angular distance between two point sets (brute force).
inline double pointset_distance(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
    if (a.size() != b.size()) return INFINITY;
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[perm[i]]).norm());
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline std::vector<Eigen::Vector3d> unit_vectors(const MajoranaPoints& p) {
    std::vector<Eigen::Vector3d> out;
    for (const auto& d : p.directions) out.push_back(d.unit_vector());
    return out;
}

/// Spin state whose Majorana points are the given directions: expands
/// prod_k (a_k z - b_k) with (a_k, b_k) the spinor of direction k, then reads the
/// amplitudes off the coefficients.
inline SpinState state_from_directions(const std::vector<SpherePoint>& dirs) {
    const int n = static_cast<int>(dirs.size());
    std::vector<Complex> poly{1.0};  // descending powers
    for (const auto& d : dirs) {
        const Complex a = std::cos(d.theta / 2), b = std::polar(std::sin(d.theta / 2), d.phi);
        std::vector<Complex> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += a * poly[i];
            next[i + 1] -= b * poly[i];
        }
        poly = next;
    }
    CVector amps(n + 1);
    for (int k = 0; k <= n; ++k) amps(k) = ((k % 2) ? -1.0 : 1.0) * poly[k] / std::sqrt(binomial(n, k));
    return SpinState::normalized(Spin::from_particles(n), amps);
}

} // namespace ghzalign::testing
