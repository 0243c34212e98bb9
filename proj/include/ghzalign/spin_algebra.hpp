#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzalign {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Spin quantum number j, stored as the integer 2j so half-integers are exact.
class Spin {
public:
    static Spin from_twice(int twice_j) {
        if (twice_j < 0) throw std::invalid_argument("spin: 2j must be non-negative, got " + std::to_string(twice_j));
        return Spin(twice_j);
    }

    static Spin from_value(double j) {
        const double twice = 2.0 * j;
        const double rounded = std::round(twice);
        if (!(j >= 0.0) || std::abs(twice - rounded) > 1e-12)
            throw std::invalid_argument("spin: j must be a non-negative half-integer, got " + std::to_string(j));
        return Spin(static_cast<int>(rounded));
    }

    /// Symmetric subspace of N spin-1/2 particles.
    static Spin from_particles(int n) { return from_twice(n); }

    int twice() const noexcept { return twice_; }
    double value() const noexcept { return 0.5 * twice_; }
    Eigen::Index dim() const noexcept { return twice_ + 1; }
    /// Magnetic quantum number at basis index i (order m = j, j-1, ..., -j).
    double m_at(Eigen::Index i) const noexcept { return value() - static_cast<double>(i); }

    friend bool operator==(Spin, Spin) = default;

private:
    explicit Spin(int twice_j) : twice_(twice_j) {}
    int twice_;
};

/// Rotation in z-y-z Euler angles. Inputs are folded into alpha, gamma in
/// [0, 2pi) and beta in [0, pi]; a beta outside [0, pi] is mapped to the same
/// SO(3) element via (alpha + pi, 2pi - beta, gamma + pi).
class EulerAngles {
public:
    EulerAngles() = default;

    EulerAngles(double alpha, double beta, double gamma) {
        double b = wrap(beta);
        if (b > kPi) {
            b = kTwoPi - b;
            alpha += kPi;
            gamma += kPi;
        }
        alpha_ = wrap(alpha);
        beta_ = b;
        gamma_ = wrap(gamma);
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }

    std::array<double, 3> as_array() const noexcept { return {alpha_, beta_, gamma_}; }

private:
    static double wrap(double x) {
        double r = std::fmod(x, kTwoPi);
        if (r < 0.0) r += kTwoPi;
        if (r >= kTwoPi) r = 0.0;
        return r;
    }

    double alpha_ = 0.0;
    double beta_ = 0.0;
    double gamma_ = 0.0;
};

/// Pure state of a spin-j system in the Dicke basis, amplitudes ordered m = j..-j.
struct SpinState {
    Spin spin = Spin::from_twice(0);
    CVector amplitudes = CVector::Ones(1);

    /// Validates dimension and normalization (tolerance on |norm^2 - 1|).
    static SpinState make(Spin spin, CVector amplitudes, double tol = 1e-12) {
        if (amplitudes.size() != spin.dim())
            throw std::invalid_argument("spin state: expected " + std::to_string(spin.dim()) + " amplitudes, got " +
                                        std::to_string(amplitudes.size()));
        const double n2 = amplitudes.squaredNorm();
        if (std::abs(n2 - 1.0) > tol)
            throw std::invalid_argument("spin state: amplitudes not normalized (norm^2 = " + std::to_string(n2) + ")");
        return SpinState{spin, std::move(amplitudes)};
    }

    static SpinState normalized(Spin spin, CVector amplitudes) {
        const double n = amplitudes.norm();
        if (n == 0.0) throw std::invalid_argument("spin state: all-zero amplitude vector");
        return make(spin, amplitudes / n, 1e-10);
    }

    Complex expectation(const CMatrix& op) const { return amplitudes.dot(op * amplitudes); }
};

struct SpinOperators {
    CMatrix jx;
    CMatrix jy;
    CMatrix jz;

    const CMatrix& operator[](int axis) const { return axis == 0 ? jx : (axis == 1 ? jy : jz); }
    Eigen::Index dim() const noexcept { return jz.rows(); }
};

/// Ladder construction in the |j,m> basis, m descending.
inline SpinOperators spin_operators(Spin spin) {
    const Eigen::Index d = spin.dim();
    const double j = spin.value();
    CMatrix raise = CMatrix::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) {
        const double m = spin.m_at(i);
        raise(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    const CMatrix lower = raise.adjoint();
    SpinOperators ops;
    ops.jx = 0.5 * (raise + lower);
    ops.jy = Complex(0.0, -0.5) * (raise - lower);
    ops.jz = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) ops.jz(i, i) = spin.m_at(i);
    return ops;
}

inline SpinOperators spin_operators(double j) { return spin_operators(Spin::from_value(j)); }

/// exp(-i t H) for Hermitian H via eigendecomposition.
inline CMatrix unitary_exp(const CMatrix& hermitian, double t) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian);
    const CVector phases = (eig.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

inline CMatrix z_rotation(Spin spin, double angle) {
    const Eigen::Index d = spin.dim();
    CMatrix z = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) z(i, i) = std::polar(1.0, -angle * spin.m_at(i));
    return z;
}

/// U = exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz) at raw coordinates, no
/// range folding. Used where angles are differentiated.
inline CMatrix rotation(Spin spin, double alpha, double beta, double gamma) {
    const SpinOperators ops = spin_operators(spin);
    return z_rotation(spin, alpha) * unitary_exp(ops.jy, beta) * z_rotation(spin, gamma);
}

inline CMatrix rotation(Spin spin, const EulerAngles& angles) {
    return rotation(spin, angles.alpha(), angles.beta(), angles.gamma());
}

/// The SO(3) matrix Rz(alpha) Ry(beta) Rz(gamma) that `rotation` represents.
inline Eigen::Matrix3d rotation_so3(const EulerAngles& angles) {
    auto rz = [](double t) {
        Eigen::Matrix3d r;
        r << std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1;
        return r;
    };
    Eigen::Matrix3d ry;
    const double b = angles.beta();
    ry << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
    return rz(angles.alpha()) * ry * rz(angles.gamma());
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

inline Complex int_power(Complex base, int exponent) {
    Complex r = 1.0;
    for (int i = 0; i < exponent; ++i) r *= base;
    return r;
}

/// Dicke-basis amplitudes of the product state (up, down)^{(x) N}.
inline CVector symmetric_product(int n, Complex up, Complex down) {
    CVector out(n + 1);
    for (int k = 0; k <= n; ++k) out(k) = std::sqrt(binomial(n, k)) * int_power(up, n - k) * int_power(down, k);
    return out;
}

/// Spin-coherent state pointing along (theta, phi).
inline SpinState coherent_state(Spin spin, double theta, double phi) {
    return SpinState::normalized(
        spin, symmetric_product(spin.twice(), std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)));
}

/// (|j,j> + e^{i delta}|j,-j>)/sqrt(2) with j = N/2. N = 1 gives |+x> at delta = 0.
inline SpinState ghz_state(int n, double delta = 0.0) {
    if (n < 1) throw std::invalid_argument("ghz_state: N must be >= 1");
    const Spin spin = Spin::from_particles(n);
    CVector a = CVector::Zero(spin.dim());
    a(0) += 1.0 / std::sqrt(2.0);
    a(n) += std::polar(1.0 / std::sqrt(2.0), delta);
    return SpinState::make(spin, std::move(a));
}

/// GHZ as seen after the rotation: (|n>^N + e^{i gamma N}|-n>^N)/sqrt(2) with
/// |n> = (cos b/2, e^{ia} sin b/2) and |-n> = (-sin b/2, e^{ia} cos b/2).
/// Equals rotation(N/2, angles) * ghz_state(N, 0) up to the global phase
/// e^{-i(alpha + gamma)N/2}.
inline SpinState rotated_ghz_closed_form(int n, const EulerAngles& angles) {
    if (n < 1) throw std::invalid_argument("rotated_ghz_closed_form: N must be >= 1");
    const double c = std::cos(angles.beta() / 2), s = std::sin(angles.beta() / 2);
    const Complex e = std::polar(1.0, angles.alpha());
    const CVector plus = symmetric_product(n, c, e * s);
    const CVector minus = symmetric_product(n, -s, e * c);
    const CVector a = (plus + std::polar(1.0, angles.gamma() * n) * minus) / std::sqrt(2.0);
    return SpinState::make(Spin::from_particles(n), a, 1e-12);
}

/// |<a|b>|^2, insensitive to global phase.
inline double fidelity(const CVector& a, const CVector& b) { return std::norm(a.dot(b)); }
inline double fidelity(const SpinState& a, const SpinState& b) { return fidelity(a.amplitudes, b.amplitudes); }

inline Eigen::Vector3d first_moments(const SpinState& state, const SpinOperators& ops) {
    return {state.expectation(ops.jx).real(), state.expectation(ops.jy).real(), state.expectation(ops.jz).real()};
}

inline Eigen::Vector3d second_moments(const SpinState& state, const SpinOperators& ops) {
    // <J_a^2> = |J_a psi|^2
    return {(ops.jx * state.amplitudes).squaredNorm(), (ops.jy * state.amplitudes).squaredNorm(),
            (ops.jz * state.amplitudes).squaredNorm()};
}

// ---------------------------------------------------------------------------
// Majorana representation
//
// Convention: p(z) = sum_k (-1)^k sqrt(C(N,k)) a_{j,j-k} z^{N-k}. A root z maps
// to the direction theta = 2 atan|z|, phi = arg z (stereographic projection from
// the south pole). With it the coherent state along n has all N roots at n, so
// |j,j> sits at the north pole and |j,-j> at the south pole. Each vanishing
// leading coefficient is a root at infinity, i.e. a south-pole point.
// ---------------------------------------------------------------------------

struct SpherePoint {
    double theta = 0.0;  ///< polar angle in [0, pi]
    double phi = 0.0;    ///< azimuth in (-pi, pi]

    Eigen::Vector3d unit_vector() const {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    }
};

struct MajoranaPoints {
    std::vector<SpherePoint> directions;
};

namespace detail {

inline Complex horner(const std::vector<Complex>& coeffs, Complex z) {
    Complex acc = 0.0;
    for (const Complex& c : coeffs) acc = acc * z + c;
    return acc;
}

inline Complex horner_derivative(const std::vector<Complex>& coeffs, Complex z) {
    Complex acc = 0.0;
    const std::size_t deg = coeffs.size() - 1;
    for (std::size_t i = 0; i < deg; ++i) acc = acc * z + coeffs[i] * static_cast<double>(deg - i);
    return acc;
}

// Newton steps, run on the reversed polynomial in w = 1/z for roots outside the unit disk.
inline Complex polish_root(const std::vector<Complex>& coeffs, Complex z) {
    const bool outside = std::abs(z) > 1.0;
    std::vector<Complex> poly = coeffs;
    if (outside) std::reverse(poly.begin(), poly.end());
    Complex x = outside ? 1.0 / z : z;
    for (int it = 0; it < 4; ++it) {
        const Complex f = horner(poly, x);
        const Complex df = horner_derivative(poly, x);
        if (std::abs(df) == 0.0) break;
        const Complex next = x - f / df;
        if (!(std::abs(horner(poly, next)) < std::abs(f))) break;
        x = next;
    }
    return outside ? (x == 0.0 ? Complex(std::numeric_limits<double>::infinity()) : 1.0 / x) : x;
}

inline SpherePoint point_from_root(Complex z) {
    if (!std::isfinite(std::abs(z))) return {kPi, 0.0};
    return {2.0 * std::atan(std::abs(z)), std::arg(z)};
}

} // namespace detail

inline MajoranaPoints majorana_roots(const SpinState& state) {
    const int n = state.spin.twice();
    const CVector& a = state.amplitudes;
    if (a.size() != n + 1) throw std::invalid_argument("majorana_roots: dimension mismatch");
    if (a.norm() == 0.0) throw std::invalid_argument("majorana_roots: all-zero amplitude vector");

    std::vector<Complex> coeffs(n + 1);  // descending powers z^N .. z^0
    for (int k = 0; k <= n; ++k) coeffs[k] = ((k % 2) ? -1.0 : 1.0) * std::sqrt(binomial(n, k)) * a(k);

    const double scale = a.cwiseAbs().maxCoeff();
    const double zero_tol = 1e-14 * scale;
    int lead = 0;
    while (lead <= n && std::abs(coeffs[lead]) <= zero_tol) ++lead;
    int trail = 0;
    while (n - trail > lead && std::abs(coeffs[n - trail]) <= zero_tol) ++trail;

    MajoranaPoints out;
    out.directions.reserve(n);
    for (int i = 0; i < lead; ++i) out.directions.push_back({kPi, 0.0});
    for (int i = 0; i < trail; ++i) out.directions.push_back({0.0, 0.0});

    std::vector<Complex> reduced(coeffs.begin() + lead, coeffs.end() - trail);
    const int deg = static_cast<int>(reduced.size()) - 1;
    if (deg >= 1) {
        CMatrix companion = CMatrix::Zero(deg, deg);
        for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
        for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -reduced[deg - i] / reduced[0];
        Eigen::ComplexEigenSolver<CMatrix> eig(companion, false);
        for (int i = 0; i < deg; ++i) {
            out.directions.push_back(detail::point_from_root(detail::polish_root(reduced, eig.eigenvalues()(i))));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Anti-coherence: <S_a> = 0 and <S_a^2> = j(j+1)/3 for a = x, y, z.
// ---------------------------------------------------------------------------

struct AnticoherenceReport {
    Eigen::Vector3d first_moments;
    Eigen::Vector3d second_moments;
    bool passes = false;
};

inline AnticoherenceReport anticoherence_check(const SpinState& state, double tol) {
    const SpinOperators ops = spin_operators(state.spin);
    const double j = state.spin.value();
    AnticoherenceReport r{first_moments(state, ops), second_moments(state, ops), false};
    const double target = j * (j + 1.0) / 3.0;
    r.passes = r.first_moments.cwiseAbs().maxCoeff() <= tol &&
               (r.second_moments.array() - target).abs().maxCoeff() <= tol;
    return r;
}

} // namespace ghzalign
