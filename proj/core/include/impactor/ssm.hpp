#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace impactor {

/**
 * Linear Gaussian state-space model with time-invariant dynamics:
 *
 *   z_t = F z_{t-1} + R e_t,   e_t ~ N(0, Q)
 *   y_t = H_t' z_t + d_t,      d_t ~ N(0, obs_var)
 *
 * H_t is stored row-wise in `observation()` (one row per time index), so the
 * model covers exactly observation().rows() time steps.
 */
class SsmSpec {
public:
    SsmSpec(Eigen::MatrixXd transition, Eigen::MatrixXd control, Eigen::MatrixXd state_noise_cov,
            Eigen::MatrixXd observation, double obs_var);

    [[nodiscard]] Eigen::Index state_dim() const { return transition_.rows(); }
    [[nodiscard]] Eigen::Index noise_dim() const { return control_.cols(); }
    [[nodiscard]] Eigen::Index horizon() const { return observation_.rows(); }

    [[nodiscard]] const Eigen::MatrixXd& transition() const { return transition_; }
    [[nodiscard]] const Eigen::MatrixXd& control() const { return control_; }
    [[nodiscard]] const Eigen::MatrixXd& state_noise_cov() const { return state_noise_cov_; }
    [[nodiscard]] const Eigen::MatrixXd& observation() const { return observation_; }
    [[nodiscard]] double obs_var() const { return obs_var_; }

    /// R Q R', the state-space covariance of the transition noise.
    [[nodiscard]] const Eigen::MatrixXd& process_cov() const { return process_cov_; }

private:
    Eigen::MatrixXd transition_;
    Eigen::MatrixXd control_;
    Eigen::MatrixXd state_noise_cov_;
    Eigen::MatrixXd observation_;
    double obs_var_;
    Eigen::MatrixXd process_cov_;
};

/// Gaussian prior on the state before the first observation.
struct InitialState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct LocalLevelSpec {
    double level_scale = 0.0;  // sigma_l >= 0
};

/// Static regression y_t += beta' x_t with inclusion indicators; excluded coefficients must be zero.
struct RegressionSpec {
    Eigen::MatrixXd covariates;  // time x k
    Eigen::VectorXd beta;
    std::vector<std::uint8_t> included;

    void validate() const;
};

struct ModelParams {
    double sigma_level = 0.0;
    double sigma_obs = 1.0;
    Eigen::VectorXd beta;
    std::vector<std::uint8_t> included;
};

/**
 * Local level plus static regression as one LG-SSM. The state is (l_t, 1):
 * the second component is a constant unit state, and H_t = (1, beta' x_t).
 * With no covariates the model collapses to a one-dimensional local level.
 */
[[nodiscard]] SsmSpec assemble(const LocalLevelSpec& level, const RegressionSpec& reg, double sigma_obs);

/// Initial state matching assemble(): level ~ N(mean, var); the unit state is fixed at 1.
[[nodiscard]] InitialState assemble_initial(double level_mean, double level_var, bool with_regression);

/// H_t' z.
[[nodiscard]] double observation_mean(const SsmSpec& spec, const Eigen::VectorXd& state, Eigen::Index t);

}  // namespace impactor
