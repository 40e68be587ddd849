#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gaugekit/error.hpp"
#include "gaugekit/riskfree.hpp"
#include "oracles.hpp"

using namespace gaugekit;

namespace {

Eigen::MatrixXd random_sensitivities(Eigen::Index n, Eigen::Index factors, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    return Eigen::MatrixXd::NullaryExpr(n, factors, [&] { return z(rng); });
}

}  // namespace

TEST(ProjectCappedSimplex, FeasibleAndIdempotent) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    const double lo = 0.01, hi = 0.3;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(10, [&] { return z(rng); });
        const Eigen::VectorXd p = project_capped_simplex(v, lo, hi);
        EXPECT_NEAR(p.sum(), 1.0, 1e-12);
        EXPECT_GE(p.minCoeff(), lo - 1e-15);
        EXPECT_LE(p.maxCoeff(), hi + 1e-15);
        EXPECT_LT((project_capped_simplex(p, lo, hi) - p).norm(), 1e-12);
        // Optimality: no feasible point sampled nearby is closer to v.
        const Eigen::VectorXd q = project_capped_simplex(p + 0.05 * Eigen::VectorXd::NullaryExpr(10, [&] { return z(rng); }), lo, hi);
        EXPECT_LE((p - v).norm(), (q - v).norm() + 1e-12);
    }
    EXPECT_THROW(project_capped_simplex(Eigen::VectorXd::Zero(4), 0.3, 0.5), ValidationError);
}

TEST(SensitivityNeutral, MatchesBruteForceOnSmallUniverse) {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        SensitivityProblem problem;
        problem.dmu_dxi = random_sensitivities(6, 2, seed);
        problem.cap = 2.0;
        problem.floor = 0.0;
        const auto result = sensitivity_neutral_weights(problem);
        const double reference = oracle::min_residual_small(problem.dmu_dxi, 0.0, 2.0 / 6.0);
        EXPECT_NEAR(result.residual, reference, 1e-6) << seed;
    }
}

TEST(SensitivityNeutral, LargeUniverseReachesNeutrality) {
    SensitivityProblem problem;
    problem.dmu_dxi = random_sensitivities(256, 3, 11);
    const auto result = sensitivity_neutral_weights(problem);
    const Eigen::VectorXd& w = result.weights.w();
    EXPECT_TRUE(result.neutral);
    EXPECT_LE(result.residual, 1e-8);
    EXPECT_LE((problem.dmu_dxi.transpose() * w).norm(), 1e-8);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), 0.01 / 256.0 * (1.0 - 1e-9));
    EXPECT_LE(w.maxCoeff(), 2.0 / 256.0 * (1.0 + 1e-9));
    EXPECT_TRUE(result.weights.is_riskfree_candidate(2.0));
}

TEST(SensitivityNeutral, NeverWorseThanEqualWeights) {
    // All assets load the same way: nothing can cancel the factor exposure.
    SensitivityProblem problem;
    problem.dmu_dxi = Eigen::MatrixXd::Ones(20, 1);
    const auto result = sensitivity_neutral_weights(problem);
    EXPECT_FALSE(result.neutral);
    EXPECT_LE(result.residual, result.equal_weight_residual + 1e-15);
    EXPECT_NEAR(result.residual, 1.0, 1e-12);

    for (std::uint64_t seed : {21u, 22u}) {
        SensitivityProblem p;
        p.dmu_dxi = random_sensitivities(40, 5, seed).array().abs() + 0.5;
        const auto r = sensitivity_neutral_weights(p);
        EXPECT_LE(r.residual, r.equal_weight_residual + 1e-15);
    }
}

TEST(SensitivityNeutral, ValidatesProblem) {
    SensitivityProblem problem;
    problem.dmu_dxi = random_sensitivities(4, 4, 1);
    EXPECT_THROW(sensitivity_neutral_weights(problem), ValidationError);
    problem.dmu_dxi = random_sensitivities(4, 1, 1);
    problem.cap = 0.5;
    EXPECT_THROW(sensitivity_neutral_weights(problem), ValidationError);
    problem.cap = 2.0;
    problem.floor = 1.5;
    EXPECT_THROW(sensitivity_neutral_weights(problem), ValidationError);
    problem.floor = 0.01;
    problem.dmu_dxi = Eigen::MatrixXd(0, 1);
    EXPECT_THROW(sensitivity_neutral_weights(problem), ValidationError);
}
