#include <gtest/gtest.h>

#include <random>

#include "impactor/error.hpp"
#include "impactor/ssm.hpp"

using namespace impactor;

TEST(Assemble, PureLocalLevelCollapsesToOneState) {
    const RegressionSpec reg{Eigen::MatrixXd(6, 0), Eigen::VectorXd(0), {}};
    const SsmSpec spec = assemble(LocalLevelSpec{0.5}, reg, 1.0);
    EXPECT_EQ(spec.state_dim(), 1);
    EXPECT_EQ(spec.horizon(), 6);
    EXPECT_DOUBLE_EQ(spec.state_noise_cov()(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(spec.transition()(0, 0), 1.0);
}

TEST(Assemble, RegressionEntersThroughObservationVector) {
    const RegressionSpec reg{Eigen::MatrixXd::Constant(4, 1, 3.0), Eigen::VectorXd::Constant(1, 2.0), {1}};
    const SsmSpec spec = assemble(LocalLevelSpec{0.1}, reg, 1.0);
    ASSERT_EQ(spec.state_dim(), 2);
    EXPECT_TRUE(spec.transition().isIdentity());
    EXPECT_DOUBLE_EQ(spec.control()(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(spec.control()(1, 0), 0.0);
    const Eigen::Vector2d z(1.0, 1.0);
    for (Eigen::Index t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(observation_mean(spec, z, t), 7.0);
}

TEST(Assemble, ZeroBetaGivesLevel) {
    const RegressionSpec reg{Eigen::MatrixXd::Random(5, 3), Eigen::VectorXd::Zero(3), {0, 0, 0}};
    const SsmSpec spec = assemble(LocalLevelSpec{0.1}, reg, 1.0);
    for (Eigen::Index t = 0; t < 5; ++t) EXPECT_EQ(observation_mean(spec, Eigen::Vector2d(4.25, 1.0), t), 4.25);
}

TEST(ObservationMean, ProjectsState) {
    Eigen::MatrixXd H(2, 2);
    H << 1, 0, 1, 5;
    const SsmSpec spec(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 1), Eigen::MatrixXd::Identity(1, 1), H, 1.0);
    EXPECT_DOUBLE_EQ(observation_mean(spec, Eigen::Vector2d(4, 1), 0), 4.0);
    EXPECT_DOUBLE_EQ(observation_mean(spec, Eigen::Vector2d(4, 1), 1), 9.0);
    EXPECT_THROW((void)observation_mean(spec, Eigen::Vector2d(4, 1), 2), ValidationError);
    EXPECT_THROW((void)observation_mean(spec, Eigen::Vector2d(4, 1), -1), ValidationError);
}

TEST(ObservationMean, MatchesCounterfactualScale) {
    // Level 20.1 and regression contribution 80.0 give a mean of 100.1.
    const RegressionSpec reg{Eigen::MatrixXd::Constant(1, 2, 40.0), Eigen::Vector2d(1.5, 0.5), {1, 1}};
    const SsmSpec spec = assemble(LocalLevelSpec{0.0}, reg, 1.0);
    EXPECT_NEAR(observation_mean(spec, Eigen::Vector2d(20.1, 1.0), 0), 100.1, 1e-12);
}

TEST(Assemble, RandomDrawsMatchLevelPlusRegression) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(gen() % 6);
        Eigen::MatrixXd x(1, k);
        Eigen::VectorXd beta(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            x(0, j) = nd(gen);
            beta[j] = nd(gen);
        }
        const double level = nd(gen);
        const SsmSpec spec = assemble(LocalLevelSpec{0.3}, RegressionSpec{x, beta, std::vector<std::uint8_t>(static_cast<std::size_t>(k), 1)}, 1.0);
        ASSERT_NEAR(observation_mean(spec, Eigen::Vector2d(level, 1.0), 0), level + beta.dot(x.row(0).transpose()), 1e-12);
    }
}

TEST(Assemble, ExcludingCovariateEqualsDeletingIt) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd x(8, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
    Eigen::VectorXd beta(4);
    beta << 1.5, 0.0, -2.0, 0.7;
    const SsmSpec with = assemble(LocalLevelSpec{0.2}, RegressionSpec{x, beta, {1, 0, 1, 1}}, 1.0);
    Eigen::MatrixXd x_del(8, 3);
    x_del << x.col(0), x.col(2), x.col(3);
    const SsmSpec without = assemble(LocalLevelSpec{0.2}, RegressionSpec{x_del, Eigen::Vector3d(1.5, -2.0, 0.7), {1, 1, 1}}, 1.0);
    for (Eigen::Index t = 0; t < 8; ++t)
        EXPECT_NEAR(observation_mean(with, Eigen::Vector2d(0.3, 1.0), t), observation_mean(without, Eigen::Vector2d(0.3, 1.0), t), 1e-12);
}

TEST(Assemble, NoiselessSimulationKeepsConstantLevel) {
    const RegressionSpec reg{Eigen::MatrixXd::Zero(10, 2), Eigen::VectorXd::Zero(2), {0, 0}};
    const SsmSpec spec = assemble(LocalLevelSpec{0.0}, reg, 1e-12);
    Eigen::VectorXd z = assemble_initial(3.5, 0.0, true).mean;
    for (Eigen::Index t = 0; t < spec.horizon(); ++t) {
        z = spec.transition() * z;  // zero process noise
        EXPECT_EQ(observation_mean(spec, z, t), 3.5);
    }
}

TEST(Assemble, RejectsInvalidSpecs) {
    const RegressionSpec bad{Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(1), {0}};
    EXPECT_THROW((void)assemble(LocalLevelSpec{0.1}, bad, 1.0), ValidationError);
    const RegressionSpec ok{Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(1), {1}};
    EXPECT_THROW((void)assemble(LocalLevelSpec{-0.1}, ok, 1.0), ValidationError);
    EXPECT_THROW((void)assemble(LocalLevelSpec{0.1}, ok, 0.0), ValidationError);
    EXPECT_THROW(SsmSpec(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 1), -Eigen::MatrixXd::Identity(1, 1),
                         Eigen::MatrixXd::Ones(3, 2), 1.0),
                 ValidationError);
    EXPECT_THROW(SsmSpec(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 1), Eigen::MatrixXd::Identity(1, 1),
                         Eigen::MatrixXd::Ones(3, 2), 1.0),
                 ValidationError);
}
