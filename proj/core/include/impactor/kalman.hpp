#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "impactor/rng.hpp"
#include "impactor/ssm.hpp"

namespace impactor::kalman {

/// Moments at one time step. Missing observations (NaN) leave filtered == predicted.
struct FilterStep {
    Eigen::VectorXd predicted_mean;
    Eigen::MatrixXd predicted_cov;
    Eigen::VectorXd filtered_mean;
    Eigen::MatrixXd filtered_cov;
    double obs_mean = 0.0;  // one-step predictive mean of y_t
    double obs_var = 0.0;   // one-step predictive variance of y_t
    bool observed = true;
};

struct FilterResult {
    InitialState initial;
    std::vector<FilterStep> steps;  // t = 1..T
    double loglik = 0.0;
};

struct SmoothedState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// One joint draw of the states. `trajectory` row t-1 holds z_t for t = 1..T.
struct StateDraw {
    Eigen::VectorXd initial;  // z_0
    Eigen::MatrixXd trajectory;
};

/**
 * Kalman filter over y_1..y_T with the prior `init` on z_0.
 *
 * Predict-then-update each step, Joseph-form covariance update, and
 * symmetrisation afterwards. A NaN entry in `y` marks a missing observation:
 * the update is skipped and nothing is added to the log-likelihood. Throws
 * NumericError on non-finite intermediates or on a covariance diagonal below
 * -1e-10; smaller negative diagonals are clamped to zero.
 */
[[nodiscard]] FilterResult filter(const SsmSpec& spec, const InitialState& init, std::span<const double> y);

/// Rauch-Tung-Striebel smoother; returns smoothed moments for t = 1..T.
[[nodiscard]] std::vector<SmoothedState> smooth(const SsmSpec& spec, const InitialState& init, std::span<const double> y);
[[nodiscard]] std::vector<SmoothedState> smooth(const SsmSpec& spec, const FilterResult& filtered);

/// Forward-filter backward-sample draw from p(z_0..z_T | y_1..y_T).
[[nodiscard]] StateDraw simulate_states(const SsmSpec& spec, const InitialState& init, std::span<const double> y,
                                        Rng& rng);

/// Sum of one-step predictive log densities (the filter's own accumulator).
[[nodiscard]] double loglik(const SsmSpec& spec, const InitialState& init, std::span<const double> y);

/// m + L u with L L' = cov for a PSD `cov`; consumes exactly cov.rows() normals.
[[nodiscard]] Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

}  // namespace impactor::kalman
