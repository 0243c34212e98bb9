#pragma once

#include "ghzalign/errors.hpp"
#include "ghzalign/qfi.hpp"
#include "ghzalign/rng.hpp"
#include "ghzalign/spin_algebra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ghzalign {

enum class Axis { X, Y, Z, Parity };

inline const char* axis_name(Axis a) {
    switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
    case Axis::Parity: return "parity";
    }
    return "?";
}

/// Born-rule distribution of S_axis, indexed like the Dicke basis (m = j..-j).
inline Eigen::VectorXd measurement_distribution(const SpinState& state, Axis axis) {
    if (axis == Axis::Parity) throw std::invalid_argument("measurement_distribution: parity is a two-outcome setting");
    if (axis == Axis::Z) return state.amplitudes.cwiseAbs2();
    const SpinOperators ops = spin_operators(state.spin);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(axis == Axis::X ? ops.jx : ops.jy);
    const Eigen::Index d = state.spin.dim();
    Eigen::VectorXd probs(d);
    // eigenvalues come out ascending (-j..j); flip to m = j..-j
    for (Eigen::Index i = 0; i < d; ++i) probs(i) = std::norm(eig.eigenvectors().col(d - 1 - i).dot(state.amplitudes));
    return probs;
}

/// <S_x^2>, <S_y^2>, <S_z^2> on the rotated GHZ state:
/// (N + N(N-1) sin^2 b cos^2 a)/4, (N + N(N-1) sin^2 b sin^2 a)/4, (N + N(N-1) cos^2 b)/4.
/// Exact for N = 1 and N >= 3; for N = 2 the GHZ interference term adds a
/// gamma-dependent piece.
inline Eigen::Vector3d variance_formulas(int n, double alpha, double beta) {
    if (n < 1) throw std::invalid_argument("variance_formulas: N must be >= 1");
    const double k = static_cast<double>(n) * (n - 1);
    const double sb2 = std::sin(beta) * std::sin(beta), cb2 = std::cos(beta) * std::cos(beta);
    const double ca2 = std::cos(alpha) * std::cos(alpha), sa2 = std::sin(alpha) * std::sin(alpha);
    return {(n + k * sb2 * ca2) / 4.0, (n + k * sb2 * sa2) / 4.0, (n + k * cb2) / 4.0};
}

/// sigma_x^{(x) N} restricted to the symmetric subspace: i^N exp(-i pi S_x).
inline CMatrix symmetric_parity_operator(Spin spin) {
    static const Complex kPowersOfI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return kPowersOfI[spin.twice() % 4] * unitary_exp(spin_operators(spin).jx, kPi);
}

inline double parity_expectation_from_state(const SpinState& state) {
    return state.expectation(symmetric_parity_operator(state.spin)).real();
}

/// cos(N gamma), cross-checked against <Pi> on the re-aligned GHZ state Z(gamma)|GHZ>.
inline double parity_expectation(int n, double gamma) {
    if (n < 1) throw std::invalid_argument("parity_expectation: N must be >= 1");
    const double closed = std::cos(n * gamma);
    const Spin spin = Spin::from_particles(n);
    const SpinState aligned{spin, z_rotation(spin, gamma) * ghz_state(n, 0.0).amplitudes};
    const double numeric = parity_expectation_from_state(aligned);
    if (std::abs(numeric - closed) > 1e-10)
        throw std::logic_error("parity_expectation: operator and closed form disagree");
    return closed;
}

struct MeasurementRecord {
    Axis axis = Axis::Z;
    int shots = 0;
    std::vector<double> outcomes;  ///< eigenvalues m for x/y/z, +-1 for parity
    double sample_mean = 0.0;
    double sample_variance = 0.0;  ///< unbiased, about the sample mean
    double second_moment = 0.0;    ///< mean of outcome^2, the estimator of <S_a^2>
};

inline MeasurementRecord sample_measurements(const SpinState& state, Axis axis, int shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("sample_measurements: shots must be >= 1");
    MeasurementRecord rec;
    rec.axis = axis;
    rec.shots = shots;
    rec.outcomes.reserve(shots);
    CounterRng rng(seed, static_cast<std::uint64_t>(axis));

    if (axis == Axis::Parity) {
        const double p_plus = std::clamp(0.5 * (1.0 + parity_expectation_from_state(state)), 0.0, 1.0);
        for (int s = 0; s < shots; ++s) rec.outcomes.push_back(rng.uniform() < p_plus ? 1.0 : -1.0);
    } else {
        const Eigen::VectorXd probs = measurement_distribution(state, axis);
        std::vector<double> cdf(probs.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs(i));
        for (double& c : cdf) c /= acc;
        for (int s = 0; s < shots; ++s) {
            const double u = rng.uniform();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto idx = std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1);
            rec.outcomes.push_back(state.spin.m_at(idx));
        }
    }

    double sum = 0.0, sum2 = 0.0;
    for (double o : rec.outcomes) {
        sum += o;
        sum2 += o * o;
    }
    rec.sample_mean = sum / shots;
    rec.second_moment = sum2 / shots;
    rec.sample_variance = shots > 1 ? (sum2 - shots * rec.sample_mean * rec.sample_mean) / (shots - 1) : 0.0;
    return rec;
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

struct AngleInversion {
    double alpha = 0.0;  ///< principal branch in [0, pi/2]
    double beta = 0.0;   ///< principal branch in [0, pi/2]
    double quality = 0.0;  ///< residual norm of the three-moment least-squares fit
    std::array<double, 4> alpha_branches{};  ///< {a, pi - a, pi + a, 2pi - a}
    std::array<double, 2> beta_branches{};   ///< {b, pi - b}
};

/// Solves the second-moment formulas for the axis direction. With
/// t = (sin^2 b cos^2 a, sin^2 b sin^2 a, cos^2 b) the model is linear,
/// 4<S_a^2> - N = N(N-1) t_a, subject to t_x + t_y + t_z = 1; the constrained
/// least-squares residual reduces to |sum_a <S_a^2> - j(j+1)|/sqrt(3).
inline AngleInversion invert_angles(double var_x, double var_y, double var_z, int n, double consistency_tol = -1.0,
                                    double degeneracy_tol = 1e-9) {
    if (n < 2) throw std::invalid_argument("invert_angles: N must be >= 2 (N(N-1) = 0 carries no angle information)");
    const double nn = n, k = nn * (nn - 1.0);
    if (consistency_tol < 0.0) consistency_tol = 1e-9 * (1.0 + nn * nn);

    const double v[3] = {var_x, var_y, var_z};
    double t[3], rsum = 0.0;
    for (int a = 0; a < 3; ++a) rsum += (4.0 * v[a] - nn) / k;
    for (int a = 0; a < 3; ++a) t[a] = (4.0 * v[a] - nn) / k + (1.0 - rsum) / 3.0;

    AngleInversion out;
    out.quality = std::abs(v[0] + v[1] + v[2] - nn * (nn + 2.0) / 4.0) / std::sqrt(3.0);
    if (out.quality > consistency_tol)
        throw InconsistentMoments("invert_angles: second moments violate the Casimir constraint (residual " +
                                  std::to_string(out.quality) + ")");

    for (double& x : t) x = std::clamp(x, 0.0, 1.0);
    const double sin2b = t[0] + t[1];
    if (k * sin2b < degeneracy_tol)
        throw DegenerateInversion("invert_angles: axis at a pole, azimuth unidentifiable");

    out.beta = std::atan2(std::sqrt(sin2b), std::sqrt(t[2]));
    out.alpha = std::atan2(std::sqrt(t[1]), std::sqrt(t[0]));
    out.alpha_branches = {out.alpha, kPi - out.alpha, kPi + out.alpha, kTwoPi - out.alpha};
    out.beta_branches = {out.beta, kPi - out.beta};
    return out;
}

struct GammaInversion {
    double principal = 0.0;            ///< in [0, pi/N]
    std::vector<double> ambiguity_set; ///< {+-principal + 2 pi k/N} folded into [0, 2pi), ascending
};

/// gamma from <Pi> = cos(N gamma). Means outside [-1, 1] (shot noise) are clamped.
inline GammaInversion invert_gamma(double parity_mean, int n, double shot_tolerance = 1e-9) {
    if (n < 1) throw std::invalid_argument("invert_gamma: N must be >= 1");
    if (!(std::abs(parity_mean) <= 1.0 + shot_tolerance))
        throw std::invalid_argument("invert_gamma: |parity mean| exceeds 1 beyond the shot tolerance");
    GammaInversion out;
    out.principal = std::acos(std::clamp(parity_mean, -1.0, 1.0)) / n;
    const double period = kTwoPi / n;
    for (int k = 0; k < n; ++k) {
        for (double sign : {1.0, -1.0}) {
            double g = std::fmod(sign * out.principal + k * period, kTwoPi);
            if (g < 0.0) g += kTwoPi;
            if (g >= kTwoPi - 1e-12) g = 0.0;
            out.ambiguity_set.push_back(g);
        }
    }
    std::sort(out.ambiguity_set.begin(), out.ambiguity_set.end());
    out.ambiguity_set.erase(std::unique(out.ambiguity_set.begin(), out.ambiguity_set.end(),
                                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                            out.ambiguity_set.end());
    return out;
}

/// The representative of the true angles inside the estimator's fundamental
/// domain: alpha folded into [0, pi/2], beta into [0, pi/2], gamma into [0, pi/N].
inline std::array<double, 3> fundamental_domain(const EulerAngles& angles, int n) {
    double a = std::fmod(angles.alpha(), kPi);
    if (a > kPi / 2) a = kPi - a;
    double b = angles.beta();
    if (b > kPi / 2) b = kPi - b;
    const double period = kTwoPi / n;
    double g = std::fmod(angles.gamma(), period);
    if (g > period / 2) g = period - g;
    return {a, b, g};
}

// ---------------------------------------------------------------------------
// End-to-end protocol
// ---------------------------------------------------------------------------

struct ProtocolOptions {
    /// Re-align the parity copies with the true (alpha, beta) instead of the stage-1 estimates.
    bool idealized_realignment = false;
    /// Width, in shot-noise standard deviations, of the Casimir consistency check.
    double consistency_sigmas = 6.0;
};

struct EstimationRun {
    EulerAngles true_angles;
    std::array<double, 3> estimates{};  ///< principal (alpha, beta, gamma)
    std::array<double, 4> alpha_branches{};
    std::array<double, 2> beta_branches{};
    std::vector<double> gamma_set;
    std::array<double, 3> second_moments{};  ///< sampled <S_x^2>, <S_y^2>, <S_z^2>
    double parity_mean = 0.0;
    double inversion_quality = 0.0;
    int shots_per_setting = 0;
    std::array<double, 3> empirical_error{};  ///< squared errors against the fundamental-domain truth
    double crb_trace = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;  ///< inversion failure, recorded instead of thrown

    double total_squared_error() const { return empirical_error[0] + empirical_error[1] + empirical_error[2]; }
};

/// One run of the two-stage protocol: x/y/z second moments fix (alpha, beta),
/// then copies rotated back by U(alpha_hat, beta_hat, 0)^dagger are measured in
/// parity to fix gamma. Each of the four settings uses `shots` copies.
inline EstimationRun run_protocol(const EulerAngles& true_angles, int n, int shots, std::uint64_t seed,
                                  const ProtocolOptions& options = {}) {
    if (n < 2) throw std::invalid_argument("run_protocol: N must be >= 2");
    if (shots < 100) throw std::invalid_argument("run_protocol: shots must be >= 100");

    EstimationRun run;
    run.true_angles = true_angles;
    run.shots_per_setting = shots;
    run.seed = seed;
    if (std::abs(std::sin(true_angles.beta())) > kSinBetaGuard) run.crb_trace = ghz_crb_trace_inverse(n, true_angles.beta());

    const Spin spin = Spin::from_particles(n);
    const SpinState received{spin, rotation(spin, true_angles) * ghz_state(n, 0.0).amplitudes};

    const Axis axes[3] = {Axis::X, Axis::Y, Axis::Z};
    for (int a = 0; a < 3; ++a)
        run.second_moments[a] = sample_measurements(received, axes[a], shots, derive_seed(seed, a)).second_moment;

    // Each sampled <S_a^2> lies in [0, N^2/4], so its standard error is at most N^2/(8 sqrt(shots)).
    const double nn = n;
    const double sigma_sum = 3.0 * nn * nn / (8.0 * std::sqrt(static_cast<double>(shots)));
    const double tol = options.consistency_sigmas * sigma_sum / std::sqrt(3.0);

    AngleInversion inv;
    try {
        inv = invert_angles(run.second_moments[0], run.second_moments[1], run.second_moments[2], n, tol);
    } catch (const InconsistentMoments& e) {
        run.ok = false;
        run.error = e.what();
        return run;
    } catch (const DegenerateInversion& e) {
        run.ok = false;
        run.error = e.what();
        return run;
    }
    run.inversion_quality = inv.quality;
    run.alpha_branches = inv.alpha_branches;
    run.beta_branches = inv.beta_branches;

    const double align_alpha = options.idealized_realignment ? true_angles.alpha() : inv.alpha;
    const double align_beta = options.idealized_realignment ? true_angles.beta() : inv.beta;
    const SpinState realigned{spin, rotation(spin, align_alpha, align_beta, 0.0).adjoint() * received.amplitudes};
    run.parity_mean = sample_measurements(realigned, Axis::Parity, shots, derive_seed(seed, 3)).sample_mean;
    const GammaInversion g = invert_gamma(run.parity_mean, n);
    run.gamma_set = g.ambiguity_set;

    run.estimates = {inv.alpha, inv.beta, g.principal};
    const std::array<double, 3> truth = fundamental_domain(true_angles, n);
    for (int m = 0; m < 3; ++m) run.empirical_error[m] = (run.estimates[m] - truth[m]) * (run.estimates[m] - truth[m]);
    return run;
}

struct BatchSummary {
    std::vector<EstimationRun> runs;
    int failures = 0;
    std::array<double, 3> mean_squared_error{};
    double mean_total_squared_error = 0.0;
    double total_error_std_error = 0.0;
    double crb_trace = std::numeric_limits<double>::quiet_NaN();
    double crb_over_shots = std::numeric_limits<double>::quiet_NaN();
    /// Bound for all 4 * shots copies consumed by one run; the estimator can beat crb_over_shots.
    double crb_over_total_copies = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr int kProtocolSettings = 4;

/// Independent runs on substreams derive_seed(seed, 1000003 + b); aggregation in batch order.
inline BatchSummary run_batches(const EulerAngles& true_angles, int n, int shots, int batches, std::uint64_t seed,
                                const ProtocolOptions& options = {}) {
    if (batches < 1) throw std::invalid_argument("run_batches: batches must be >= 1");
    BatchSummary s;
    s.runs.reserve(batches);
    double sum = 0.0, sum2 = 0.0;
    int ok = 0;
    for (int b = 0; b < batches; ++b) {
        EstimationRun r = run_protocol(true_angles, n, shots, derive_seed(seed, 1000003ULL + b), options);
        if (r.ok) {
            ++ok;
            const double t = r.total_squared_error();
            sum += t;
            sum2 += t * t;
            for (int m = 0; m < 3; ++m) s.mean_squared_error[m] += r.empirical_error[m];
        } else {
            ++s.failures;
        }
        s.runs.push_back(std::move(r));
    }
    if (ok > 0) {
        for (double& e : s.mean_squared_error) e /= ok;
        s.mean_total_squared_error = sum / ok;
        if (ok > 1) s.total_error_std_error = std::sqrt(std::max(0.0, (sum2 - ok * s.mean_total_squared_error * s.mean_total_squared_error) / (ok - 1.0)) / ok);
    }
    if (std::abs(std::sin(true_angles.beta())) > kSinBetaGuard) {
        s.crb_trace = ghz_crb_trace_inverse(n, true_angles.beta());
        s.crb_over_shots = s.crb_trace / shots;
        s.crb_over_total_copies = s.crb_trace / (static_cast<double>(kProtocolSettings) * shots);
    }
    return s;
}

} // namespace ghzalign
