#include "impactor/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "impactor/error.hpp"
#include "impactor/stats.hpp"

namespace impactor {

namespace {

constexpr int kMaxTruncationAttempts = 1000;

[[noreturn]] void fail(const std::string& what) {
    throw ValidationError("priors: " + what);
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

void LevelScalePrior::validate() const {
    if (!(df > 0.0)) fail("level prior degrees of freedom must be positive");
    if (!(guess > 0.0)) fail("level prior guess must be positive");
    if (!(upper_bound >= guess)) fail("level prior upper bound must be >= the prior guess");
}

void SpikeSlabPrior::validate() const {
    if (!(expected_r2 > 0.0 && expected_r2 < 1.0)) fail("expected R2 must lie in (0, 1)");
    if (!(obs_df > 0.0)) fail("observation prior degrees of freedom must be positive");
    if (!(obs_scale_sq > 0.0)) fail("observation prior scale must be positive");
    const auto k = static_cast<Eigen::Index>(inclusion_prob.size());
    if (slab_information.rows() != k || slab_information.cols() != k) fail("slab information must be k x k");
    for (double p : inclusion_prob)
        if (!(p >= 0.0 && p <= 1.0)) fail("inclusion probabilities must lie in [0, 1]");
}

PriorSet default_priors(std::span<const double> y_pre, const Eigen::MatrixXd& x_pre, const PriorOverrides& o,
                        std::optional<Eigen::Index> intercept_column) {
    if (y_pre.size() < 3) fail("need at least 3 pre-period observations");
    if (x_pre.rows() != static_cast<Eigen::Index>(y_pre.size())) fail("covariate rows must match response length");
    if (!x_pre.allFinite()) fail("pre-period covariates must be finite");
    const double sd = stats::sample_sd(y_pre);
    if (!(sd > 0.0)) fail("zero-variance response");
    if (!(o.expected_model_size > 0.0)) fail("expected model size must be positive");
    if (!(o.diagonal_weight >= 0.0 && o.diagonal_weight <= 1.0)) fail("diagonal weight must lie in [0, 1]");
    if (!(o.information_units > 0.0)) fail("prior information units must be positive");

    PriorSet p;
    p.level = {o.nu_level, o.level_scale_factor * sd, o.level_bound_factor * sd};
    p.level.validate();

    const auto k = x_pre.cols();
    const double T = static_cast<double>(x_pre.rows());
    const Eigen::MatrixXd xtx = x_pre.transpose() * x_pre;
    Eigen::MatrixXd info = o.diagonal_weight * xtx;
    info.diagonal() += (1.0 - o.diagonal_weight) * xtx.diagonal();
    info *= o.information_units / T;

    p.slab.expected_model_size = o.expected_model_size;
    p.slab.expected_r2 = o.expected_r2;
    p.slab.obs_df = o.nu_obs;
    p.slab.obs_scale_sq = (1.0 - o.expected_r2) * sd * sd;
    p.slab.slab_information = std::move(info);
    p.slab.inclusion_prob.assign(static_cast<std::size_t>(k),
                                 k > 0 ? std::min(1.0, o.expected_model_size / static_cast<double>(k)) : 0.0);
    if (o.always_include_intercept && intercept_column) {
        if (*intercept_column < 0 || *intercept_column >= k) fail("intercept column out of range");
        p.slab.inclusion_prob[static_cast<std::size_t>(*intercept_column)] = 1.0;
    }
    p.slab.validate();

    p.initial = {y_pre.front(), sd};
    return p;
}

double sample_level_scale(std::span<const double> level_path, const LevelScalePrior& prior, Rng& rng) {
    if (level_path.size() < 2) fail("level path needs at least 2 states");
    double ss = prior.df * prior.guess * prior.guess;
    for (std::size_t t = 1; t < level_path.size(); ++t) {
        const double d = level_path[t] - level_path[t - 1];
        ss += d * d;
    }
    const double df = prior.df + static_cast<double>(level_path.size() - 1);
    for (int attempt = 0; attempt < kMaxTruncationAttempts; ++attempt) {
        const double sigma = std::sqrt(ss / rng.chi_square(df));
        if (sigma <= prior.upper_bound) return sigma;
    }
    return prior.upper_bound;
}

double sample_level_scale(const kalman::StateDraw& draw, const LevelScalePrior& prior, Rng& rng) {
    std::vector<double> path(static_cast<std::size_t>(draw.trajectory.rows()) + 1);
    path[0] = draw.initial[0];
    for (Eigen::Index t = 0; t < draw.trajectory.rows(); ++t) path[static_cast<std::size_t>(t) + 1] = draw.trajectory(t, 0);
    return sample_level_scale(path, prior, rng);
}

SpikeSlabSampler::SpikeSlabSampler(Eigen::MatrixXd x, SpikeSlabPrior prior) : x_(std::move(x)), prior_(std::move(prior)) {
    prior_.validate();
    if (static_cast<Eigen::Index>(prior_.inclusion_prob.size()) != x_.cols())
        fail("prior covariate count does not match design");
    if (!x_.allFinite()) fail("design must be finite");
    xtx_ = x_.transpose() * x_;
}

SpikeSlabSampler::Sufficient SpikeSlabSampler::sufficient(std::span<const double> target) const {
    if (static_cast<Eigen::Index>(target.size()) != x_.rows()) fail("target length must equal design rows");
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(target.size()));
    if (!y.allFinite()) throw NumericError("priors: non-finite regression target");
    return {x_.transpose() * y, y.squaredNorm(), static_cast<double>(target.size())};
}

double SpikeSlabSampler::log_prior(const std::vector<std::uint8_t>& included) const {
    double lp = 0.0;
    for (std::size_t j = 0; j < included.size(); ++j) {
        const double pi = prior_.inclusion_prob[j];
        const double p = included[j] ? pi : 1.0 - pi;
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

SpikeSlabSampler::ModelFit SpikeSlabSampler::fit(const Sufficient& s, const std::vector<std::uint8_t>& included) const {
    ModelFit f;
    for (std::size_t j = 0; j < included.size(); ++j)
        if (included[j]) f.active.push_back(static_cast<Eigen::Index>(j));
    const auto m = static_cast<Eigen::Index>(f.active.size());
    const double prior_ss = prior_.obs_df * prior_.obs_scale_sq;
    double log_det_ratio = 0.0;
    f.ss = prior_ss + s.yty;
    if (m > 0) {
        Eigen::MatrixXd info(m, m), precision(m, m);
        Eigen::VectorXd xty(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            xty[a] = s.xty[f.active[a]];
            for (Eigen::Index b = 0; b < m; ++b) {
                info(a, b) = prior_.slab_information(f.active[a], f.active[b]);
                precision(a, b) = xtx_(f.active[a], f.active[b]) + info(a, b);
            }
        }
        Eigen::LLT<Eigen::MatrixXd> info_chol(info);
        f.precision_chol.compute(precision);
        if (info_chol.info() != Eigen::Success || f.precision_chol.info() != Eigen::Success)
            throw NumericError("priors: singular conditional information matrix for the included covariates");
        f.beta_mean = f.precision_chol.solve(xty);
        f.ss -= xty.dot(f.beta_mean);
        log_det_ratio = log_det_from_llt(info_chol) - log_det_from_llt(f.precision_chol);
    }
    if (!(f.ss > 0.0) || !std::isfinite(f.ss)) throw NumericError("priors: non-positive posterior sum of squares");
    f.log_score = 0.5 * log_det_ratio - 0.5 * (prior_.obs_df + s.n) * std::log(f.ss) + log_prior(included);
    return f;
}

double SpikeSlabSampler::log_model_posterior(std::span<const double> target,
                                             const std::vector<std::uint8_t>& included) const {
    if (static_cast<Eigen::Index>(included.size()) != x_.cols()) fail("inclusion vector length mismatch");
    return fit(sufficient(target), included).log_score;
}

RegressionDraw SpikeSlabSampler::draw(std::span<const double> target, std::vector<std::uint8_t> included,
                                      Rng& rng) const {
    const auto k = static_cast<std::size_t>(x_.cols());
    if (included.size() != k) fail("inclusion vector length mismatch");
    for (std::size_t j = 0; j < k; ++j) {
        if (prior_.inclusion_prob[j] >= 1.0) included[j] = 1;
        if (prior_.inclusion_prob[j] <= 0.0) included[j] = 0;
    }
    const Sufficient s = sufficient(target);

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double current = fit(s, included).log_score;
    for (std::size_t j : order) {
        const double pi = prior_.inclusion_prob[j];
        if (pi <= 0.0 || pi >= 1.0) {
            rng.uniform();  // keep the stream aligned regardless of fixed coordinates
            continue;
        }
        included[j] ^= 1;
        const double flipped = fit(s, included).log_score;
        const double log_on = included[j] ? flipped : current;
        const double log_off = included[j] ? current : flipped;
        const double p_on = 1.0 / (1.0 + std::exp(log_off - log_on));
        const bool on = rng.uniform() < p_on;
        included[j] = on ? 1 : 0;
        current = on ? log_on : log_off;
    }

    ModelFit f = fit(s, included);
    RegressionDraw out{std::move(included), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k)), 0.0};
    const double sigma2 = f.ss / rng.chi_square(prior_.obs_df + s.n);
    out.sigma_obs = std::sqrt(sigma2);
    const auto m = static_cast<Eigen::Index>(f.active.size());
    if (m > 0) {
        Eigen::VectorXd u(m);
        for (Eigen::Index a = 0; a < m; ++a) u[a] = rng.normal();
        // precision = L L'; beta ~ N(mean, sigma^2 * inv(precision)) via L' v = u.
        const Eigen::VectorXd v = f.precision_chol.matrixU().solve(u);
        const Eigen::VectorXd beta = f.beta_mean + out.sigma_obs * v;
        for (Eigen::Index a = 0; a < m; ++a) out.beta[f.active[a]] = beta[a];
    }
    if (!std::isfinite(out.sigma_obs) || !out.beta.allFinite()) throw NumericError("priors: non-finite regression draw");
    return out;
}

RegressionDraw sample_coeffs_and_obs_var(std::span<const double> target, const Eigen::MatrixXd& x,
                                         const SpikeSlabPrior& prior, std::vector<std::uint8_t> included, Rng& rng) {
    return SpikeSlabSampler(x, prior).draw(target, std::move(included), rng);
}

}  // namespace impactor
