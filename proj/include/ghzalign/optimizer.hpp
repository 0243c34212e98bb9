#pragma once

#include "ghzalign/qfi.hpp"
#include "ghzalign/rng.hpp"
#include "ghzalign/spin_algebra.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

namespace ghzalign {

/// Haar-averaged Tr F of a pure state.
inline double objective(const SpinState& state) { return haar_avg_trace_analytic(state).value; }

namespace detail {

inline constexpr double kAxisWeight[3] = {10.0 / 3.0, 10.0 / 3.0, 16.0 / 3.0};

struct ObjectiveEval {
    double value = 0.0;
    CVector gradient;  ///< Euclidean gradient w.r.t. (Re psi, Im psi), packed as a complex vector
};

// f = sum_a w_a (<A^2> - <A>^2); grad = sum_a w_a (2 A^2 psi - 4 <A> A psi).
inline ObjectiveEval evaluate(const CVector& psi, const SpinOperators& ops) {
    ObjectiveEval e{0.0, CVector::Zero(psi.size())};
    for (int a = 0; a < 3; ++a) {
        const CVector apsi = ops[a] * psi;
        const double mean = psi.dot(apsi).real();
        const double second = apsi.squaredNorm();
        e.value += kAxisWeight[a] * (second - mean * mean);
        e.gradient += kAxisWeight[a] * (2.0 * (ops[a] * apsi) - 4.0 * mean * apsi);
    }
    return e;
}

inline CVector tangent(const CVector& psi, const CVector& grad) { return grad - psi.dot(grad).real() * psi; }

} // namespace detail

/// Riemannian gradient of the objective on the unit sphere (exposed for checks).
inline CVector objective_gradient(const SpinState& state) {
    const detail::ObjectiveEval e = detail::evaluate(state.amplitudes, spin_operators(state.spin));
    return detail::tangent(state.amplitudes, e.gradient);
}

/// Rotates the largest-magnitude amplitude (lowest index on ties) to be real positive.
inline CVector fix_phase_gauge(const CVector& psi) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < psi.size(); ++i)
        if (std::abs(psi(i)) > std::abs(psi(best)) + 1e-12) best = i;
    if (std::abs(psi(best)) == 0.0) return psi;
    return psi * std::polar(1.0, -std::arg(psi(best)));
}

/// Moments invariant under rotations about z, which leave the objective unchanged.
struct MomentFingerprint {
    double transverse_mean = 0.0;     ///< |(<Sx>, <Sy>)|
    double axial_mean = 0.0;          ///< <Sz>
    Eigen::Vector2d transverse_second; ///< ascending eigenvalues of <{Sa, Sb}>/2, a, b in {x, y}
    double axial_second = 0.0;        ///< <Sz^2>

    Eigen::Vector<double, 5> packed() const {
        Eigen::Vector<double, 5> v;
        v << transverse_mean, axial_mean, transverse_second, axial_second;
        return v;
    }
};

inline MomentFingerprint moment_fingerprint(const SpinState& s, const SpinOperators& ops) {
    const CVector& psi = s.amplitudes;
    const CVector x = ops.jx * psi, y = ops.jy * psi, z = ops.jz * psi;
    MomentFingerprint fp;
    fp.transverse_mean = std::hypot(psi.dot(x).real(), psi.dot(y).real());
    fp.axial_mean = psi.dot(z).real();
    Eigen::Matrix2d t;
    t(0, 0) = x.squaredNorm();
    t(1, 1) = y.squaredNorm();
    t(0, 1) = t(1, 0) = x.dot(y).real();
    fp.transverse_second = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(t, Eigen::EigenvaluesOnly).eigenvalues();
    fp.axial_second = z.squaredNorm();
    return fp;
}

struct OptimizationResult {
    SpinState best_state;
    double best_value = 0.0;
    int restarts_used = 0;
    int iterations = 0;        ///< iterations of the winning restart
    long long total_iterations = 0;
    bool converged = false;    ///< false only if every restart exhausted max_iter
    std::vector<MomentFingerprint> distinct_maximizers;
};

struct MaximizeOptions {
    int restarts = 20;
    double tol = 1e-9;
    int max_iter = 5000;
    std::uint64_t seed = 0;
};

/// Projected gradient ascent with Armijo backtracking (constant 1e-4, halving)
/// and retraction by renormalization, from `restarts` random starts. A restart
/// stops when the Riemannian gradient norm drops below tol or the value has
/// changed by less than tol over the last 10 iterations. Best-of selection
/// breaks ties by restart index.
inline OptimizationResult maximize(Spin spin, const MaximizeOptions& opt = {}) {
    if (opt.restarts < 1) throw std::invalid_argument("maximize: restarts must be >= 1");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("maximize: tol must be > 0");
    if (opt.max_iter < 1) throw std::invalid_argument("maximize: max_iter must be >= 1");

    const SpinOperators ops = spin_operators(spin);
    const Eigen::Index d = spin.dim();
    OptimizationResult result;
    result.best_value = -1.0;

    struct Finish {
        CVector psi;
        double value;
    };
    std::vector<Finish> finishes;

    for (int r = 0; r < opt.restarts; ++r) {
        CounterRng rng(opt.seed, static_cast<std::uint64_t>(r));
        CVector psi(d);
        for (Eigen::Index i = 0; i < d; ++i) psi(i) = Complex(rng.normal(), rng.normal());
        psi.normalize();

        detail::ObjectiveEval cur = detail::evaluate(psi, ops);
        std::deque<double> history{cur.value};
        double step = 1.0;
        bool converged = false;
        int it = 0;
        for (; it < opt.max_iter; ++it) {
            const CVector g = detail::tangent(psi, cur.gradient);
            const double g2 = g.squaredNorm();
            if (std::sqrt(g2) < opt.tol) {
                converged = true;
                break;
            }
            bool accepted = false;
            step = std::min(1.0, 4.0 * step);
            for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
                const CVector trial = (psi + step * g).normalized();
                detail::ObjectiveEval next = detail::evaluate(trial, ops);
                if (next.value >= cur.value + 1e-4 * step * g2) {
                    psi = trial;
                    cur = std::move(next);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {  // no ascent direction left at double precision
                converged = true;
                break;
            }
            history.push_back(cur.value);
            if (history.size() > 11) history.pop_front();
            if (history.size() == 11 && std::abs(history.back() - history.front()) < opt.tol) {
                converged = true;
                ++it;
                break;
            }
        }
        result.total_iterations += it;
        result.converged = result.converged || converged;
        if (cur.value > result.best_value) {
            result.best_value = cur.value;
            result.best_state = SpinState::normalized(spin, fix_phase_gauge(psi));
            result.iterations = it;
        }
        finishes.push_back({psi, cur.value});
        result.restarts_used = r + 1;
    }

    for (const Finish& f : finishes) {
        if (f.value < result.best_value - 1e-6) continue;
        const SpinState s{spin, f.psi};
        const MomentFingerprint fp = moment_fingerprint(s, ops);
        bool seen = false;
        for (const auto& other : result.distinct_maximizers)
            if ((other.packed() - fp.packed()).cwiseAbs().maxCoeff() < 1e-4) seen = true;
        if (!seen) result.distinct_maximizers.push_back(fp);
    }
    return result;
}

} // namespace ghzalign
