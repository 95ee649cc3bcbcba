#include "impactor/ssm.hpp"

#include <cmath>
#include <string>

#include "impactor/error.hpp"

namespace impactor {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw ValidationError("ssm: " + what);
}

bool all_finite(const Eigen::MatrixXd& m) {
    return m.allFinite();
}

}  // namespace

SsmSpec::SsmSpec(Eigen::MatrixXd transition, Eigen::MatrixXd control, Eigen::MatrixXd state_noise_cov,
                 Eigen::MatrixXd observation, double obs_var)
    : transition_(std::move(transition)),
      control_(std::move(control)),
      state_noise_cov_(std::move(state_noise_cov)),
      observation_(std::move(observation)),
      obs_var_(obs_var) {
    const auto n = transition_.rows();
    if (n == 0 || transition_.cols() != n) fail("transition must be a non-empty square matrix");
    if (control_.rows() != n) fail("control must have as many rows as the state");
    const auto q = control_.cols();
    if (state_noise_cov_.rows() != q || state_noise_cov_.cols() != q) fail("state noise covariance must be q x q");
    if (observation_.cols() != n) fail("observation vectors must have the state dimension");
    if (!all_finite(transition_) || !all_finite(control_) || !all_finite(state_noise_cov_) || !all_finite(observation_))
        fail("model matrices must be finite");
    if (!(obs_var_ > 0.0) || !std::isfinite(obs_var_)) fail("observation noise variance must be positive");
    if (q > 0) {
        if ((state_noise_cov_ - state_noise_cov_.transpose()).cwiseAbs().maxCoeff() >
            1e-12 * (1.0 + state_noise_cov_.cwiseAbs().maxCoeff()))
            fail("state noise covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state_noise_cov_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + state_noise_cov_.cwiseAbs().maxCoeff()))
            fail("state noise covariance must be positive semidefinite");
        process_cov_ = control_ * state_noise_cov_ * control_.transpose();
    } else {
        process_cov_ = Eigen::MatrixXd::Zero(n, n);
    }
}

void RegressionSpec::validate() const {
    const auto k = covariates.cols();
    if (beta.size() != k) fail("beta length does not match covariate count");
    if (static_cast<Eigen::Index>(included.size()) != k) fail("inclusion vector length does not match covariate count");
    if (!covariates.allFinite()) fail("covariates must be finite over the modelled range");
    for (Eigen::Index j = 0; j < k; ++j)
        if (!included[static_cast<std::size_t>(j)] && beta[j] != 0.0)
            fail("coefficient " + std::to_string(j) + " is excluded but nonzero");
}

SsmSpec assemble(const LocalLevelSpec& level, const RegressionSpec& reg, double sigma_obs) {
    if (!(level.level_scale >= 0.0) || !std::isfinite(level.level_scale)) fail("level scale must be >= 0");
    if (!(sigma_obs > 0.0) || !std::isfinite(sigma_obs)) fail("observation scale must be positive");
    reg.validate();
    const double level_var = level.level_scale * level.level_scale;
    const auto T = reg.covariates.rows();
    if (reg.covariates.cols() == 0) {
        return SsmSpec(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Ones(1, 1),
                       Eigen::MatrixXd::Constant(1, 1, level_var), Eigen::MatrixXd::Ones(T, 1), sigma_obs * sigma_obs);
    }
    Eigen::MatrixXd H(T, 2);
    H.col(0).setOnes();
    H.col(1) = reg.covariates * reg.beta;
    Eigen::MatrixXd R(2, 1);
    R << 1.0, 0.0;
    return SsmSpec(Eigen::MatrixXd::Identity(2, 2), std::move(R), Eigen::MatrixXd::Constant(1, 1, level_var),
                   std::move(H), sigma_obs * sigma_obs);
}

InitialState assemble_initial(double level_mean, double level_var, bool with_regression) {
    if (!(level_var >= 0.0)) fail("initial level variance must be >= 0");
    if (!with_regression) return {Eigen::VectorXd::Constant(1, level_mean), Eigen::MatrixXd::Constant(1, 1, level_var)};
    InitialState init{Eigen::Vector2d(level_mean, 1.0), Eigen::MatrixXd::Zero(2, 2)};
    init.cov(0, 0) = level_var;
    return init;
}

double observation_mean(const SsmSpec& spec, const Eigen::VectorXd& state, Eigen::Index t) {
    if (t < 0 || t >= spec.horizon())
        fail("time index " + std::to_string(t) + " outside covariate coverage [0, " + std::to_string(spec.horizon()) + ")");
    if (state.size() != spec.state_dim()) fail("state has wrong dimension");
    return spec.observation().row(t).dot(state);
}

}  // namespace impactor
