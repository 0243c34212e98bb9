#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace ghzalign;
using namespace ghzalign::testing;

namespace {

SpinState rotated_ghz(int n, const EulerAngles& ang) {
    const Spin spin = Spin::from_particles(n);
    return SpinState{spin, rotation(spin, ang) * ghz_state(n, 0.0).amplitudes};
}

bool contains(const auto& values, double x, double tol) {
    for (double v : values)
        if (std::abs(v - x) < tol || std::abs(std::abs(v - x) - kTwoPi) < tol) return true;
    return false;
}

} // namespace

TEST(Distribution, GhzAlongZ) {
    const Eigen::VectorXd p = measurement_distribution(ghz_state(5, 0.0), Axis::Z);
    EXPECT_NEAR(p(0), 0.5, 1e-15);
    EXPECT_NEAR(p(5), 0.5, 1e-15);
    EXPECT_NEAR(p.segment(1, 4).sum(), 0.0, 1e-15);
    EXPECT_THROW(measurement_distribution(ghz_state(5, 0.0), Axis::Parity), std::invalid_argument);
}

TEST(Distribution, MomentsMatchExpectationValues) {
    CounterRng rng(51);
    for (int twice = 1; twice <= 8; ++twice) {
        const Spin spin = Spin::from_twice(twice);
        const SpinState psi = random_state(spin, rng);
        const SpinOperators ops = spin_operators(spin);
        const Eigen::Vector3d first = first_moments(psi, ops), second = second_moments(psi, ops);
        const Axis axes[3] = {Axis::X, Axis::Y, Axis::Z};
        for (int a = 0; a < 3; ++a) {
            const Eigen::VectorXd p = measurement_distribution(psi, axes[a]);
            EXPECT_NEAR(p.sum(), 1.0, 1e-12);
            EXPECT_GE(p.minCoeff(), 0.0);
            double m1 = 0.0, m2 = 0.0;
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                m1 += p(i) * spin.m_at(i);
                m2 += p(i) * spin.m_at(i) * spin.m_at(i);
            }
            EXPECT_NEAR(m1, first(a), 1e-12) << axis_name(axes[a]);
            EXPECT_NEAR(m2, second(a), 1e-12) << axis_name(axes[a]);
        }
    }
}

TEST(VarianceFormulas, MatchRotatedGhzExceptTwoSpins) {
    CounterRng rng(52);
    for (int n : {1, 3, 4, 5, 6, 7, 8}) {
        for (int r = 0; r < 8; ++r) {
            const EulerAngles ang(kTwoPi * rng.uniform(), kPi * rng.uniform(), kTwoPi * rng.uniform());
            const SpinState s = rotated_ghz(n, ang);
            const Eigen::Vector3d numeric = second_moments(s, spin_operators(s.spin));
            EXPECT_LT((numeric - variance_formulas(n, ang.alpha(), ang.beta())).cwiseAbs().maxCoeff(), 1e-10) << n;
        }
    }
    double worst = 0.0;
    for (int ig = 0; ig < 8; ++ig) {
        const EulerAngles ang(0.5, 1.0, kTwoPi * ig / 8);
        const SpinState s = rotated_ghz(2, ang);
        worst = std::max(worst, (second_moments(s, spin_operators(s.spin)) - variance_formulas(2, 0.5, 1.0))
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    EXPECT_GT(worst, 0.1);
}

TEST(Parity, SymmetricOperatorMatchesTensorParity) {
    CounterRng rng(53);
    for (int n = 1; n <= 8; ++n) {
        const Spin spin = Spin::from_particles(n);
        const CMatrix pi_sym = symmetric_parity_operator(spin);
        for (int r = 0; r < 3; ++r) {
            const SpinState psi = random_state(spin, rng);
            const CVector lhs = embed_symmetric(SpinState{spin, pi_sym * psi.amplitudes});
            const CVector rhs = apply_full_parity(embed_symmetric(psi));
            EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10) << n;
        }
        // Real permutation matrix reversing the Dicke basis.
        EXPECT_LT((pi_sym - CMatrix::Identity(spin.dim(), spin.dim()).rowwise().reverse()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Parity, ExpectationIsCosNGamma) {
    for (int n = 1; n <= 10; ++n)
        for (double g : {0.0, 0.2, 1.3, 4.0}) EXPECT_NEAR(parity_expectation(n, g), std::cos(n * g), 1e-15);
    EXPECT_NEAR(parity_expectation_from_state(ghz_state(4, kPi)), -1.0, 1e-12);
}

TEST(Sampling, DeterministicPerSeedAndAxis) {
    const SpinState s = rotated_ghz(4, EulerAngles(0.4, 1.0, 0.3));
    const MeasurementRecord a = sample_measurements(s, Axis::X, 500, 99);
    const MeasurementRecord b = sample_measurements(s, Axis::X, 500, 99);
    EXPECT_EQ(a.outcomes, b.outcomes);
    EXPECT_NE(a.outcomes, sample_measurements(s, Axis::X, 500, 100).outcomes);
    for (double o : a.outcomes) EXPECT_TRUE(o == 2 || o == 1 || o == 0 || o == -1 || o == -2);
    const MeasurementRecord par = sample_measurements(s, Axis::Parity, 200, 99);
    for (double o : par.outcomes) EXPECT_TRUE(o == 1.0 || o == -1.0);
    EXPECT_THROW(sample_measurements(s, Axis::Z, 0, 1), std::invalid_argument);
}

TEST(Sampling, SecondMomentWithinShotNoise) {
    const int shots = 20000;
    const EulerAngles ang(0.9, 1.2, 0.5);
    for (int n : {3, 6}) {
        const SpinState s = rotated_ghz(n, ang);
        const Eigen::Vector3d exact = variance_formulas(n, ang.alpha(), ang.beta());
        const Axis axes[3] = {Axis::X, Axis::Y, Axis::Z};
        for (int a = 0; a < 3; ++a) {
            const MeasurementRecord rec = sample_measurements(s, axes[a], shots, 7 + a);
            double var4 = 0.0;
            const Eigen::VectorXd p = measurement_distribution(s, axes[a]);
            for (Eigen::Index i = 0; i < p.size(); ++i) var4 += p(i) * std::pow(s.spin.m_at(i), 4);
            const double sigma = std::sqrt((var4 - exact(a) * exact(a)) / shots);
            EXPECT_LT(std::abs(rec.second_moment - exact(a)), 5 * sigma + 1e-12) << n << axis_name(axes[a]);
        }
    }
}

TEST(Inversion, NoiselessRoundTrip) {
    const Eigen::Vector3d v = variance_formulas(6, 0.3, 1.1);
    const AngleInversion inv = invert_angles(v.x(), v.y(), v.z(), 6);
    EXPECT_NEAR(inv.alpha, 0.3, 1e-10);
    EXPECT_NEAR(inv.beta, 1.1, 1e-10);
    EXPECT_LT(inv.quality, 1e-12);
}

TEST(Inversion, RoundTripUpToBranchesProperty) {
    CounterRng rng(54);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 9);
        const double alpha = kTwoPi * rng.uniform();
        const double beta = 0.05 + (kPi - 0.1) * rng.uniform();
        const Eigen::Vector3d v = variance_formulas(n, alpha, beta);
        const AngleInversion inv = invert_angles(v.x(), v.y(), v.z(), n);
        EXPECT_TRUE(contains(inv.alpha_branches, alpha, 1e-9)) << "alpha " << alpha << " N=" << n;
        EXPECT_TRUE(contains(inv.beta_branches, beta, 1e-9)) << "beta " << beta << " N=" << n;
        EXPECT_GE(inv.alpha, 0.0);
        EXPECT_LE(inv.alpha, kPi / 2);
        EXPECT_LE(inv.beta, kPi / 2 + 1e-15);
    }
}

TEST(Inversion, ErrorsAtPolesAndInconsistentMoments) {
    const Eigen::Vector3d pole = variance_formulas(5, 0.7, 0.0);
    EXPECT_THROW(invert_angles(pole.x(), pole.y(), pole.z(), 5), DegenerateInversion);
    const Eigen::Vector3d v = variance_formulas(5, 0.7, 1.0);
    EXPECT_THROW(invert_angles(v.x() + 0.5, v.y(), v.z(), 5), InconsistentMoments);
    EXPECT_NO_THROW(invert_angles(v.x() + 0.5, v.y(), v.z(), 5, 1.0));
    EXPECT_THROW(invert_angles(0.25, 0.25, 0.25, 1), std::invalid_argument);
}

TEST(GammaInversion, PrincipalAndAmbiguitySet) {
    for (int n = 1; n <= 8; ++n)
        for (double g : {0.05, 0.4, 2.0, 5.5}) {
            const GammaInversion inv = invert_gamma(std::cos(n * g), n);
            EXPECT_GE(inv.principal, 0.0);
            EXPECT_LE(inv.principal, kPi / n + 1e-15);
            EXPECT_TRUE(contains(inv.ambiguity_set, g, 1e-9)) << "N=" << n << " g=" << g;
            EXPECT_LE(static_cast<int>(inv.ambiguity_set.size()), 2 * n);
            EXPECT_TRUE(std::is_sorted(inv.ambiguity_set.begin(), inv.ambiguity_set.end()));
        }
    EXPECT_EQ(invert_gamma(1.0, 4).ambiguity_set.size(), 4u);
    EXPECT_NEAR(invert_gamma(1.0 + 1e-12, 4).principal, 0.0, 1e-15);
    EXPECT_THROW(invert_gamma(1.01, 4), std::invalid_argument);
    EXPECT_NO_THROW(invert_gamma(1.01, 4, 0.05));
}

TEST(FundamentalDomain, FoldsIntoEstimatorRange) {
    const auto d = fundamental_domain(EulerAngles(2.5, 2.0, 1.0), 4);
    EXPECT_NEAR(d[0], kPi - 2.5, 1e-15);
    EXPECT_NEAR(d[1], kPi - 2.0, 1e-15);
    EXPECT_NEAR(d[2], kPi / 2 - 1.0, 1e-15);
}

TEST(Protocol, RecoversAnglesAtHighShots) {
    const EulerAngles truth(0.7, 1.1, 0.3);
    const EstimationRun run = run_protocol(truth, 4, 100000, 2024);
    ASSERT_TRUE(run.ok) << run.error;
    EXPECT_NEAR(run.estimates[0], 0.7, 0.02);
    EXPECT_NEAR(run.estimates[1], 1.1, 0.02);
    EXPECT_NEAR(run.estimates[2], 0.3, 0.02);
    EXPECT_NEAR(run.crb_trace, ghz_crb_trace_inverse(4, 1.1), 1e-15);
    EXPECT_TRUE(contains(run.gamma_set, 0.3, 0.02));
    EXPECT_THROW(run_protocol(truth, 1, 1000, 1), std::invalid_argument);
    EXPECT_THROW(run_protocol(truth, 4, 10, 1), std::invalid_argument);
}

TEST(Protocol, DeterministicGivenSeed) {
    const EulerAngles truth(0.4, 1.3, 0.2);
    const EstimationRun a = run_protocol(truth, 5, 2000, 77);
    const EstimationRun b = run_protocol(truth, 5, 2000, 77);
    EXPECT_EQ(a.estimates, b.estimates);
    EXPECT_EQ(a.second_moments, b.second_moments);
    EXPECT_EQ(a.parity_mean, b.parity_mean);
    const EstimationRun c = run_protocol(truth, 5, 2000, 78);
    EXPECT_NE(a.second_moments, c.second_moments);
}

TEST(Protocol, FailureIsRecordedNotThrown) {
    // A vanishing consistency window turns ordinary shot noise into an inconsistency.
    ProtocolOptions strict;
    strict.consistency_sigmas = 1e-9;
    const EstimationRun run = run_protocol(EulerAngles(0.4, 1.0, 0.2), 4, 1000, 5, strict);
    EXPECT_FALSE(run.ok);
    EXPECT_FALSE(run.error.empty());
    // At the pole the CRB is undefined.
    EXPECT_TRUE(std::isnan(run_protocol(EulerAngles(0.4, 0.0, 0.2), 4, 1000, 5).crb_trace));
}

TEST(Protocol, ErrorRespectsCramerRaoAndShrinksWithShots) {
    const EulerAngles truth(0.7, kPi / 2, 0.3);
    const BatchSummary lo = run_batches(truth, 4, 1000, 40, 11);
    const BatchSummary hi = run_batches(truth, 4, 20000, 40, 11);
    EXPECT_EQ(hi.failures, 0);
    EXPECT_NEAR(hi.crb_trace, 0.5625, 1e-15);
    EXPECT_NEAR(hi.crb_over_shots, 0.5625 / 20000, 1e-18);
    EXPECT_GE(hi.mean_total_squared_error + 3 * hi.total_error_std_error, hi.crb_over_shots);
    EXPECT_GE(lo.mean_total_squared_error + 3 * lo.total_error_std_error, lo.crb_over_shots);
    EXPECT_LT(hi.mean_total_squared_error, lo.mean_total_squared_error);
    const BatchSummary again = run_batches(truth, 4, 1000, 40, 11);
    EXPECT_EQ(lo.mean_total_squared_error, again.mean_total_squared_error);
}

TEST(Protocol, IdealizedRealignmentOption) {
    ProtocolOptions opts;
    opts.idealized_realignment = true;
    const EstimationRun run = run_protocol(EulerAngles(0.7, 1.1, 0.3), 4, 50000, 3, opts);
    ASSERT_TRUE(run.ok);
    EXPECT_NEAR(run.estimates[2], 0.3, 0.02);
}

// The bound applies to all copies a run consumes; scaling by shots per setting
// alone is beaten away from beta = pi/2.
TEST(Protocol, CramerRaoHoldsOverBetaAndNGrid) {
    for (int n : {3, 4, 6})
        for (double beta : {0.6, 1.0, 1.3, kPi / 2}) {
            const BatchSummary s = run_batches(EulerAngles(0.7, beta, 0.2), n, 20000, 40, 17);
            ASSERT_EQ(s.failures, 0) << n << " " << beta;
            EXPECT_NEAR(s.crb_over_total_copies, s.crb_over_shots / 4, 1e-18);
            EXPECT_GE(s.mean_total_squared_error + 3 * s.total_error_std_error, s.crb_over_total_copies)
                << "N=" << n << " beta=" << beta;
        }
}

TEST(Protocol, BetaBiasAtHalfPiShrinksWithShots) {
    const EulerAngles truth(0.7, kPi / 2, 0.3);
    double previous = INFINITY;
    for (int shots : {1000, 10000, 100000}) {
        const BatchSummary s = run_batches(truth, 4, shots, 40, 23);
        double bias = 0.0;
        for (const EstimationRun& r : s.runs) bias += (r.estimates[1] - kPi / 2) / s.runs.size();
        EXPECT_LT(std::abs(bias), previous) << shots;
        previous = std::abs(bias);
    }
}
