#include "impactor/impact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "impactor/error.hpp"

namespace impactor {

namespace {

void check_dims(std::span<const double> y_post, const CounterfactualDraws& cf) {
    if (cf.values.rows() == 0) throw ValidationError("impact: no counterfactual draws");
    if (cf.values.cols() != static_cast<Eigen::Index>(y_post.size()))
        throw ValidationError("impact: observed post period has " + std::to_string(y_post.size()) +
                              " steps, counterfactual has " + std::to_string(cf.values.cols()));
    if (y_post.empty()) throw ValidationError("impact: empty post period");
    for (double v : y_post)
        if (!std::isfinite(v)) throw ValidationError("impact: observed post-period values must be finite");
}

}  // namespace

CounterfactualDraws forecast_counterfactual(const PosteriorDraws& draws, const Eigen::MatrixXd& x_post, Rng& rng,
                                            unsigned threads) {
    if (draws.draws.empty()) throw ValidationError("impact: no posterior draws");
    if (x_post.cols() != static_cast<Eigen::Index>(draws.covariate_count))
        throw ValidationError("impact: post-period covariates have " + std::to_string(x_post.cols()) +
                              " columns, model expects " + std::to_string(draws.covariate_count));
    if (!x_post.allFinite()) throw ValidationError("impact: missing post-period covariate values");
    const auto J = static_cast<Eigen::Index>(draws.draws.size());
    const auto P = x_post.rows();
    const std::uint64_t stream_seed = rng.engine()();

    CounterfactualDraws cf{Eigen::MatrixXd(J, P)};
    auto work = [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index j = begin; j < end; ++j) {
            const PosteriorDraw& d = draws.draws[static_cast<std::size_t>(j)];
            Rng local = Rng::substream(stream_seed, static_cast<std::uint64_t>(j));
            const Eigen::VectorXd regression = x_post * d.params.beta;
            double level = d.terminal_level;
            for (Eigen::Index t = 0; t < P; ++t) {
                level += d.params.sigma_level * local.normal();
                const double y = level + regression[t] + d.params.sigma_obs * local.normal();
                cf.values(j, t) = draws.response_offset + draws.response_scale * y;
            }
        }
    };
    const auto n_threads = static_cast<Eigen::Index>(std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(J))));
    if (n_threads == 1) {
        work(0, J);
    } else {
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (J + n_threads - 1) / n_threads;
        for (Eigen::Index b = 0; b < J; b += chunk) pool.emplace_back(work, b, std::min(J, b + chunk));
        for (auto& th : pool) th.join();
    }
    if (!cf.values.allFinite()) throw NumericError("impact: non-finite counterfactual draw");
    return cf;
}

double tail_probability(std::span<const double> cumulative_effects) {
    if (cumulative_effects.size() < 100)
        throw ValidationError("impact: tail probability needs at least 100 draws, got " +
                              std::to_string(cumulative_effects.size()));
    double below = 0.0, above = 0.0;
    for (double c : cumulative_effects) {
        if (c < 0.0) below += 1.0;
        else if (c > 0.0) above += 1.0;
        else {
            below += 0.5;
            above += 0.5;
        }
    }
    const double denom = 1.0 + static_cast<double>(cumulative_effects.size());
    return std::min((1.0 + below) / denom, (1.0 + above) / denom);
}

ImpactSummary summarize(std::span<const double> y_post, const CounterfactualDraws& cf, double level) {
    check_dims(y_post, cf);
    const auto J = static_cast<std::size_t>(cf.values.rows());
    const double n_post = static_cast<double>(y_post.size());
    const double actual_total = std::accumulate(y_post.begin(), y_post.end(), 0.0);

    std::vector<double> pred_total(J), pred_avg(J), cum_effect(J), avg_effect(J), relative;
    relative.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double total = cf.values.row(static_cast<Eigen::Index>(j)).sum();
        pred_total[j] = total;
        pred_avg[j] = total / n_post;
        double effect = 0.0;
        for (std::size_t t = 0; t < y_post.size(); ++t)
            effect += y_post[t] - cf.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t));
        cum_effect[j] = effect;
        avg_effect[j] = cum_effect[j] / n_post;
        if (total != 0.0) relative.push_back(100.0 * (actual_total / total - 1.0));
    }
    if (relative.empty()) throw NumericError("impact: every counterfactual draw sums to zero; relative effect undefined");

    ImpactSummary s;
    s.level = level;
    s.draws = J;
    s.relative_excluded = J - relative.size();
    const double p = tail_probability(cum_effect);
    const stats::Interval rel = stats::summarize(relative, level);
    s.average = {actual_total / n_post, stats::summarize(pred_avg, level), stats::summarize(avg_effect, level), rel, p};
    s.cumulative = {actual_total, stats::summarize(pred_total, level), stats::summarize(cum_effect, level), rel, p};
    return s;
}

ImpactSeries impact_series(std::span<const double> y_post, const CounterfactualDraws& cf, double level) {
    check_dims(y_post, cf);
    const auto J = cf.values.rows();
    const auto P = cf.values.cols();
    ImpactSeries out;
    out.level = level;
    out.points.resize(static_cast<std::size_t>(P));
    std::vector<double> running(static_cast<std::size_t>(J), 0.0), pred(static_cast<std::size_t>(J)),
        pointwise(static_cast<std::size_t>(J));
    for (Eigen::Index t = 0; t < P; ++t) {
        const double y = y_post[static_cast<std::size_t>(t)];
        for (Eigen::Index j = 0; j < J; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            pred[jj] = cf.values(j, t);
            pointwise[jj] = y - pred[jj];
            running[jj] += pointwise[jj];
        }
        auto& pt = out.points[static_cast<std::size_t>(t)];
        pt.observed = y;
        pt.counterfactual = stats::summarize(pred, level);
        pt.pointwise = stats::summarize(pointwise, level);
        pt.cumulative = stats::summarize(running, level);
    }
    return out;
}

}  // namespace impactor
