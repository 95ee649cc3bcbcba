#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "impactor/rng.hpp"
#include "impactor/sampler.hpp"
#include "impactor/stats.hpp"

namespace impactor {

/// Posterior-predictive counterfactual paths in original units: draw x post-period step.
struct CounterfactualDraws {
    Eigen::MatrixXd values;
};

struct ImpactRow {
    double actual = 0.0;
    stats::Interval predicted{};
    stats::Interval abs_effect{};
    stats::Interval rel_effect{};  // percent: 100 * (sum y / sum y_hat - 1), per draw
    double p = 1.0;
};

struct ImpactSummary {
    ImpactRow average;
    ImpactRow cumulative;
    double level = 0.95;
    std::size_t draws = 0;
    std::size_t relative_excluded = 0;  // draws with zero predicted total
};

struct SeriesPoint {
    double observed = 0.0;
    stats::Interval counterfactual{};
    stats::Interval pointwise{};
    stats::Interval cumulative{};
};

struct ImpactSeries {
    std::vector<SeriesPoint> points;  // one per post-period step
    double level = 0.95;
};

/**
 * For each retained draw, propagate its terminal level through the random
 * walk with that draw's sigma_l, add beta' x_t and observation noise, and map
 * back to original units. `x_post` rows are post-period steps on the same
 * (standardised) scale the sampler saw. Draw j uses its own substream derived
 * from (stream seed, j), so the result does not depend on `threads`.
 */
[[nodiscard]] CounterfactualDraws forecast_counterfactual(const PosteriorDraws& draws, const Eigen::MatrixXd& x_post,
                                                          Rng& rng, unsigned threads = 1);

/**
 * One-sided tail-area probability of the cumulative effect. Counts of draws
 * on either side of zero get +1 smoothing; exact zeros count half to each
 * side so a degenerate null lands at ~0.5 rather than 1.
 */
[[nodiscard]] double tail_probability(std::span<const double> cumulative_effects);

[[nodiscard]] ImpactSummary summarize(std::span<const double> y_post, const CounterfactualDraws& cf,
                                      double level = 0.95);

[[nodiscard]] ImpactSeries impact_series(std::span<const double> y_post, const CounterfactualDraws& cf,
                                         double level = 0.95);

}  // namespace impactor
