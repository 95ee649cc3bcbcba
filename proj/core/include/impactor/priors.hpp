#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "impactor/kalman.hpp"
#include "impactor/rng.hpp"

namespace impactor {

/// Truncated scaled inverse-chi-square prior on the level diffusion variance.
struct LevelScalePrior {
    double df = 32.0;        // prior weight nu_l
    double guess = 0.1;      // prior guess s_l for sigma_l
    double upper_bound = 1.0;

    void validate() const;
};

/**
 * Spike-and-slab prior on the regression coefficients with a conjugate
 * scaled inverse-chi-square prior on the observation variance:
 *
 *   gamma_j ~ Bernoulli(inclusion_prob[j])
 *   beta_gamma | sigma^2 ~ N(0, sigma^2 * inv(slab_information_gamma))
 *   sigma^2 ~ Scaled-Inv-chi^2(obs_df, obs_scale_sq)
 */
struct SpikeSlabPrior {
    double expected_model_size = 3.0;
    double expected_r2 = 0.8;
    double obs_df = 50.0;
    double obs_scale_sq = 0.2;
    std::vector<double> inclusion_prob;
    Eigen::MatrixXd slab_information;

    void validate() const;
};

struct InitialStatePrior {
    double level_mean = 0.0;
    double level_scale = 1.0;
};

struct PriorSet {
    LevelScalePrior level;
    SpikeSlabPrior slab;
    InitialStatePrior initial;
};

/// Hyperparameters that users may override; defaults reproduce the standard setup.
struct PriorOverrides {
    double nu_level = 32.0;
    double level_scale_factor = 0.1;  // s_l = factor * sd(y)
    double level_bound_factor = 1.0;  // upper bound = factor * sd(y)
    double expected_model_size = 3.0;
    double expected_r2 = 0.8;
    double nu_obs = 50.0;
    bool always_include_intercept = false;
    double diagonal_weight = 0.5;   // w in w*X'X + (1-w)*diag(X'X)
    double information_units = 1.0; // kappa, prior information in observations
};

/**
 * Default priors scaled to the response's sample standard deviation.
 * `intercept_column` names the column of ones, if any, so that it can be
 * forced into every model when `always_include_intercept` is set.
 */
[[nodiscard]] PriorSet default_priors(std::span<const double> y_pre, const Eigen::MatrixXd& x_pre,
                                      const PriorOverrides& overrides = {},
                                      std::optional<Eigen::Index> intercept_column = std::nullopt);

/**
 * Draw sigma_l given a level path l_0..l_m: scaled inverse-chi-square with
 * df = nu + m and sum of squares nu*s^2 + sum (l_t - l_{t-1})^2, resampled
 * until sigma_l <= upper_bound (clamped after 1000 rejections).
 */
[[nodiscard]] double sample_level_scale(std::span<const double> level_path, const LevelScalePrior& prior, Rng& rng);

/// Same, using the level component of a joint state draw including z_0.
[[nodiscard]] double sample_level_scale(const kalman::StateDraw& draw, const LevelScalePrior& prior, Rng& rng);

struct RegressionDraw {
    std::vector<std::uint8_t> included;
    Eigen::VectorXd beta;
    double sigma_obs = 1.0;
};

/**
 * Stochastic search over inclusion indicators followed by conjugate draws of
 * sigma_y and beta. Precomputes X'X so repeated sweeps over the same design
 * only pay for the target-dependent pieces.
 */
class SpikeSlabSampler {
public:
    SpikeSlabSampler(Eigen::MatrixXd x, SpikeSlabPrior prior);

    /// One sweep: random-scan Gibbs update of every gamma_j, then sigma_y, then beta.
    [[nodiscard]] RegressionDraw draw(std::span<const double> target, std::vector<std::uint8_t> included, Rng& rng) const;

    /// log p(target | gamma) + log p(gamma), up to a constant shared by all models.
    [[nodiscard]] double log_model_posterior(std::span<const double> target, const std::vector<std::uint8_t>& included) const;

    [[nodiscard]] const Eigen::MatrixXd& design() const { return x_; }
    [[nodiscard]] const SpikeSlabPrior& prior() const { return prior_; }

private:
    struct Sufficient {
        Eigen::VectorXd xty;
        double yty;
        double n;
    };
    struct ModelFit {
        double log_score;
        double ss;
        std::vector<Eigen::Index> active;
        Eigen::LLT<Eigen::MatrixXd> precision_chol;
        Eigen::VectorXd beta_mean;
    };

    [[nodiscard]] Sufficient sufficient(std::span<const double> target) const;
    [[nodiscard]] ModelFit fit(const Sufficient& s, const std::vector<std::uint8_t>& included) const;
    [[nodiscard]] double log_prior(const std::vector<std::uint8_t>& included) const;

    Eigen::MatrixXd x_;
    SpikeSlabPrior prior_;
    Eigen::MatrixXd xtx_;
};

[[nodiscard]] RegressionDraw sample_coeffs_and_obs_var(std::span<const double> target, const Eigen::MatrixXd& x,
                                                       const SpikeSlabPrior& prior,
                                                       std::vector<std::uint8_t> included, Rng& rng);

}  // namespace impactor
