#pragma once

#include "ghzalign/density_matrix.hpp"
#include "ghzalign/qfi.hpp"
#include "ghzalign/spin_algebra.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace ghzalign {

enum class NoiseKind { Dephasing, Depolarizing };

struct NoiseModel {
    NoiseKind kind = NoiseKind::Dephasing;
    double p = 1.0;  ///< survival weight of the pure GHZ component

    static NoiseModel make(NoiseKind kind, double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise: p must lie in [0, 1], got " + std::to_string(p));
        return {kind, p};
    }
};

inline void require_probability(double p, const char* who) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(who) + ": p must lie in [0, 1], got " + std::to_string(p));
}

// ---------------------------------------------------------------------------
// Dephasing
// ---------------------------------------------------------------------------

/// ((1+p)/2)|GHZ+><GHZ+| + ((1-p)/2)|GHZ-><GHZ-|, GHZ- being the delta = pi state.
inline DensityMatrix dephase_ghz(int n, double p) {
    if (n < 2) throw std::invalid_argument("dephase_ghz: N must be >= 2");
    require_probability(p, "dephase_ghz");
    const CVector plus = ghz_state(n, 0.0).amplitudes;
    const CVector minus = ghz_state(n, kPi).amplitudes;
    CMatrix rho = 0.5 * (1.0 + p) * plus * plus.adjoint() + 0.5 * (1.0 - p) * minus * minus.adjoint();
    return DensityMatrix::unchecked(Spin::from_particles(n), Space::Symmetric, std::move(rho));
}

/// N(1 + sin^2 b) + p^2 N^2 (1 + cos^2 b). Accepts p in [-1, 1]; the form is even in p.
/// Agrees with the numerical mixed-state QFI for N >= 3.
inline double dephased_trace_qfi_closed(int n, double p, double beta) {
    if (n < 1) throw std::invalid_argument("dephased_trace_qfi_closed: N must be >= 1");
    if (!(std::abs(p) <= 1.0)) throw std::invalid_argument("dephased_trace_qfi_closed: |p| must be <= 1");
    const double nn = n, s = std::sin(beta), c = std::cos(beta);
    return nn * (1.0 + s * s) + p * p * nn * nn * (1.0 + c * c);
}

/// (<GHZ-|H_m|GHZ+>)_m from the generator matrix elements. Real for N >= 2 and
/// equal to (-(N/2) cos b, 0, -N/2); only the squares enter the QFI.
inline Eigen::Vector3d dephasing_cross_terms(int n, const EulerAngles& angles) {
    if (n < 2) throw std::invalid_argument("dephasing_cross_terms: N must be >= 2");
    const CVector plus = ghz_state(n, 0.0).amplitudes;
    const CVector minus = ghz_state(n, kPi).amplitudes;
    const GeneratorSet h = generators(Spin::from_particles(n), angles);
    Eigen::Vector3d out;
    for (int m = 0; m < 3; ++m) out(m) = minus.dot(h[m] * plus).real();
    return out;
}

// ---------------------------------------------------------------------------
// Depolarizing
// ---------------------------------------------------------------------------

/// FullTensor: p|psi><psi| + (1-p)/2^N I on the 2^N qubit space (N <= 14).
/// Symmetric: p|psi><psi| + (1-p)/(N+1) I, the same channel restricted to the
/// spin-N/2 irrep with the identity weight renormalized to unit trace.
inline DensityMatrix depolarize(const SpinState& state, double p, Space space) {
    require_probability(p, "depolarize");
    const int n = state.spin.twice();
    if (space == Space::Symmetric) {
        const Eigen::Index d = state.spin.dim();
        CMatrix rho = p * state.amplitudes * state.amplitudes.adjoint() +
                      ((1.0 - p) / static_cast<double>(d)) * CMatrix::Identity(d, d);
        return DensityMatrix::unchecked(state.spin, space, std::move(rho));
    }
    if (n < 1 || n > 14) throw std::invalid_argument("depolarize: full-space mode needs 1 <= N <= 14");
    const CVector psi = embed_symmetric(state);
    const Eigen::Index d = psi.size();
    CMatrix rho = p * psi * psi.adjoint();
    rho.diagonal().array() += (1.0 - p) / static_cast<double>(d);
    return DensityMatrix::unchecked(state.spin, space, std::move(rho));
}

struct DepolarizingFactor {
    double xi = 1.0;       ///< eigenvalue on the probe state
    double eta = 0.0;      ///< eigenvalue on its orthogonal complement
    double exact = 1.0;    ///< xi + eta - 4 xi eta/(xi + eta)
    double leading = 1.0;  ///< p, the leading term of the expansion in (1-p)/dim
};

/// QFI scale factor for p|psi><psi| + (1-p)/dim I. Equals (xi - eta)^2/(xi + eta).
inline DepolarizingFactor depolarizing_factor(double p, double dim) {
    require_probability(p, "depolarizing_factor");
    DepolarizingFactor f;
    f.eta = (1.0 - p) / dim;
    f.xi = p + f.eta;
    f.leading = p;
    f.exact = (p == 0.0) ? 0.0 : f.xi + f.eta - 4.0 * f.xi * f.eta / (f.xi + f.eta);
    return f;
}

/// Global depolarizing on N qubits (dimension 2^N).
inline DepolarizingFactor depol_qfi_factor(int n, double p) {
    if (n < 1) throw std::invalid_argument("depol_qfi_factor: N must be >= 1");
    return depolarizing_factor(p, std::ldexp(1.0, n));
}

/// Numerical check of the depolarizing factor on the full tensor space. The
/// off-diagonal ratio is measured, not assumed; NaN when F_alpha_gamma(psi) ~ 0.
struct DepolarizingComparison {
    DepolarizingFactor factor;
    double trace_pure = 0.0;
    double trace_mixed = 0.0;
    double trace_ratio = 0.0;
    double offdiag_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// One spectral decomposition of the noisy state serves every angle.
inline std::vector<DepolarizingComparison> compare_depolarized(const SpinState& state, double p,
                                                               const std::vector<EulerAngles>& angles) {
    const int n = state.spin.twice();
    if (n > 10) throw std::invalid_argument("compare_depolarized: full-space check limited to N <= 10");
    const DepolarizingFactor factor = depol_qfi_factor(n, p);
    const MixedQfi mixed_qfi(depolarize(state, p, Space::FullTensor));
    std::vector<DepolarizingComparison> out;
    out.reserve(angles.size());
    for (const EulerAngles& ang : angles) {
        DepolarizingComparison c;
        c.factor = factor;
        const QfiMatrix pure = qfi_pure(state, ang);
        const QfiMatrix mixed = mixed_qfi.at(ang);
        c.trace_pure = pure.trace();
        c.trace_mixed = mixed.trace();
        c.trace_ratio = c.trace_pure > 0.0 ? c.trace_mixed / c.trace_pure : 0.0;
        if (std::abs(pure(kAlpha, kGamma)) > 1e-9) c.offdiag_ratio = mixed(kAlpha, kGamma) / pure(kAlpha, kGamma);
        out.push_back(c);
    }
    return out;
}

inline DepolarizingComparison compare_depolarized(const SpinState& state, double p, const EulerAngles& angles) {
    return compare_depolarized(state, p, std::vector<EulerAngles>{angles}).front();
}

/// GHZ_N after the given channel. Depolarizing uses the requested space.
inline DensityMatrix noisy_ghz(const NoiseModel& model, int n, Space space = Space::FullTensor) {
    if (model.kind == NoiseKind::Dephasing) return dephase_ghz(n, model.p);
    return depolarize(ghz_state(n, 0.0), model.p, space);
}

} // namespace ghzalign
