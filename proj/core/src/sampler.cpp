#include "impactor/sampler.hpp"

#include <cmath>
#include <string>

#include "impactor/error.hpp"
#include "impactor/kalman.hpp"
#include "impactor/stats.hpp"

namespace impactor {

void McmcConfig::validate() const {
    if (total_draws < 100) throw ValidationError("sampler: total draws must be at least 100");
    if (burn_in >= total_draws) throw ValidationError("sampler: burn-in must be smaller than total draws");
    if (thinning == 0) throw ValidationError("sampler: thinning must be at least 1");
    if (retained() < 100)
        throw ValidationError("sampler: configuration retains " + std::to_string(retained()) +
                              " draws; at least 100 are required");
}

PosteriorDraws run_gibbs(std::span<const double> y_pre, const Eigen::MatrixXd& x_pre, const PriorSet& priors,
                         const McmcConfig& config, const SamplerOptions& options) {
    config.validate();
    priors.level.validate();
    const auto T = static_cast<Eigen::Index>(y_pre.size());
    const auto k = x_pre.cols();
    if (T < 3) throw ValidationError("sampler: need at least 3 pre-period observations");
    if (x_pre.rows() != T) throw ValidationError("sampler: covariate rows must match response length");
    for (double v : y_pre)
        if (!std::isfinite(v)) throw ValidationError("sampler: pre-period response must be finite");
    if (options.fixed_level_scale && !(*options.fixed_level_scale >= 0.0))
        throw ValidationError("sampler: fixed level scale must be >= 0");

    const SpikeSlabSampler regression(x_pre, priors.slab);
    const InitialState init =
        assemble_initial(priors.initial.level_mean, priors.initial.level_scale * priors.initial.level_scale, k > 0);
    Rng rng(config.seed);

    ModelParams params;
    params.sigma_level = options.fixed_level_scale.value_or(priors.level.guess);
    params.sigma_obs = stats::sample_sd(y_pre);
    params.beta = Eigen::VectorXd::Zero(k);
    params.included.assign(static_cast<std::size_t>(k), 0);
    if (options.initial_inclusion) {
        if (static_cast<Eigen::Index>(options.initial_inclusion->size()) != k)
            throw ValidationError("sampler: initial inclusion vector length mismatch");
        params.included = *options.initial_inclusion;
    } else if (options.intercept_column) {
        if (*options.intercept_column < 0 || *options.intercept_column >= k)
            throw ValidationError("sampler: intercept column out of range");
        params.included[static_cast<std::size_t>(*options.intercept_column)] = 1;
    }

    PosteriorDraws out;
    out.response_offset = options.response_offset;
    out.response_scale = options.response_scale;
    out.covariate_count = static_cast<std::size_t>(k);
    out.config = config;
    out.draws.reserve(config.retained());

    std::vector<double> residual(y_pre.size());
    for (std::size_t iter = 0; iter < config.total_draws; ++iter) {
        const SsmSpec spec =
            assemble(LocalLevelSpec{params.sigma_level}, RegressionSpec{x_pre, params.beta, params.included},
                     params.sigma_obs);
        const kalman::StateDraw states = kalman::simulate_states(spec, init, y_pre, rng);

        if (!options.fixed_level_scale) params.sigma_level = sample_level_scale(states, priors.level, rng);

        for (Eigen::Index t = 0; t < T; ++t)
            residual[static_cast<std::size_t>(t)] = y_pre[static_cast<std::size_t>(t)] - states.trajectory(t, 0);
        RegressionDraw reg = regression.draw(residual, std::move(params.included), rng);
        params.included = std::move(reg.included);
        params.beta = std::move(reg.beta);
        params.sigma_obs = reg.sigma_obs;

        if (!(params.sigma_level <= options.divergence_limit) || !(params.sigma_obs <= options.divergence_limit))
            throw NumericError("sampler: divergence at iteration " + std::to_string(iter) + " (sigma_level=" +
                               std::to_string(params.sigma_level) + ", sigma_obs=" + std::to_string(params.sigma_obs) +
                               ")");

        if (iter >= config.burn_in && (iter - config.burn_in + 1) % config.thinning == 0)
            out.draws.push_back({params, states.trajectory(T - 1, 0)});
    }
    return out;
}

std::vector<double> inclusion_matrix(const PosteriorDraws& draws) {
    if (draws.draws.empty()) throw ValidationError("sampler: no retained draws");
    std::vector<double> freq(draws.covariate_count, 0.0);
    for (const auto& d : draws.draws)
        for (std::size_t j = 0; j < freq.size(); ++j) freq[j] += d.params.included[j] ? 1.0 : 0.0;
    for (double& f : freq) f /= static_cast<double>(draws.draws.size());
    return freq;
}

ChainDiagnostics diagnostics(const PosteriorDraws& draws) {
    std::vector<double> level(draws.draws.size()), obs(draws.draws.size());
    for (std::size_t i = 0; i < draws.draws.size(); ++i) {
        level[i] = draws.draws[i].params.sigma_level;
        obs[i] = draws.draws[i].params.sigma_obs;
    }
    return {stats::effective_sample_size(level), stats::effective_sample_size(obs)};
}

}  // namespace impactor
