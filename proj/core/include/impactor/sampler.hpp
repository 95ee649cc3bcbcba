#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "impactor/priors.hpp"
#include "impactor/ssm.hpp"

namespace impactor {

struct McmcConfig {
    std::size_t total_draws = 20000;
    std::size_t burn_in = 2000;
    std::uint64_t seed = 1;
    std::size_t thinning = 1;

    [[nodiscard]] std::size_t retained() const { return (total_draws - burn_in) / thinning; }
    void validate() const;
};

/// Knobs for special-purpose runs (tests, calibration). Defaults give the standard sampler.
struct SamplerOptions {
    std::optional<double> fixed_level_scale;               // skip the sigma_l update
    std::optional<Eigen::Index> intercept_column;          // included in the starting model
    std::optional<std::vector<std::uint8_t>> initial_inclusion;
    double response_offset = 0.0;                          // recorded for de-standardisation
    double response_scale = 1.0;
    double divergence_limit = 1e6;
};

struct PosteriorDraw {
    ModelParams params;
    double terminal_level = 0.0;  // l_T sampled jointly with params
};

struct PosteriorDraws {
    std::vector<PosteriorDraw> draws;
    double response_offset = 0.0;
    double response_scale = 1.0;
    std::size_t covariate_count = 0;
    McmcConfig config;
};

/**
 * Gibbs sampler over the pre-intervention period. Each iteration draws the
 * level path by forward-filter backward-sample, then sigma_l from the level
 * increments, then (gamma, beta, sigma_y) from the level-adjusted residuals.
 * Inputs are expected on the standardised scale. Fully determined by
 * config.seed. Throws NumericError when a sampled scale exceeds
 * options.divergence_limit.
 */
[[nodiscard]] PosteriorDraws run_gibbs(std::span<const double> y_pre, const Eigen::MatrixXd& x_pre,
                                       const PriorSet& priors, const McmcConfig& config,
                                       const SamplerOptions& options = {});

/// Fraction of retained draws in which each covariate is included.
[[nodiscard]] std::vector<double> inclusion_matrix(const PosteriorDraws& draws);

struct ChainDiagnostics {
    double ess_level_scale;
    double ess_obs_scale;
};

[[nodiscard]] ChainDiagnostics diagnostics(const PosteriorDraws& draws);

}  // namespace impactor
