// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "impactor/analysis.hpp"
#include "impactor/kalman.hpp"
#include "impactor/priors.hpp"
#include "impactor/report.hpp"
#include "impactor/sampler.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace impactor;
using namespace impactor::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Eigen::MatrixXd gaussian_matrix(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(gen);
    return m;
}

AnalysisConfig full_config(const std::string& target, Year year, std::uint64_t seed) {
    AnalysisConfig c;
    c.target = target;
    c.intervention_year = year;
    c.mcmc.seed = seed;
    c.data_path = "synthetic";
    return c;
}

Outcome exact_inference() {
    const auto start = Clock::now();
    std::mt19937_64 gen(31337);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto m = random_model(gen, rep % 5 == 0);
        const DenseGaussianOracle oracle(m.spec, m.init);
        const auto f = kalman::filter(m.spec, m.init, m.y);
        const auto s = kalman::smooth(m.spec, m.init, m.y);
        for (Eigen::Index t = 1; t <= m.spec.horizon(); ++t) {
            const auto& step = f.steps[static_cast<std::size_t>(t - 1)];
            const auto& sm = s[static_cast<std::size_t>(t - 1)];
            const auto rf = oracle.filtered(m.y, t);
            const auto rs = oracle.smoothed(m.y, t);
            worst = std::max({worst, (step.filtered_mean - rf.mean).cwiseAbs().maxCoeff(),
                              (step.filtered_cov - rf.cov).cwiseAbs().maxCoeff(), (sm.mean - rs.mean).cwiseAbs().maxCoeff(),
                              (sm.cov - rs.cov).cwiseAbs().maxCoeff()});
        }
        worst = std::max(worst, std::abs(f.loglik - oracle.log_density(m.y)));
    }
    const double secs = seconds_since(start);
    return {worst < 1e-8 && secs < 5.0,
            fmt("exact-inference oracle: max abs error %.2e over 50 models (limit 1e-8), %.2f s (limit 5 s)", worst, secs)};
}

Outcome ffbs_moments() {
    const auto start = Clock::now();
    const double sl = 0.7, sy = 1.0;
    const SsmSpec spec(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Constant(1, 1, sl * sl),
                       Eigen::MatrixXd::Ones(5, 1), sy * sy);
    const InitialState init{Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Constant(1, 1, 1.5)};
    const std::vector<double> y{0.3, 1.4, 0.9, 2.2, 1.7};
    const DenseGaussianOracle oracle(spec, init);
    constexpr int N = 50000;
    Eigen::MatrixXd draws(N, 5);
    Rng rng(2718);
    for (int i = 0; i < N; ++i) draws.row(i) = kalman::simulate_states(spec, init, y, rng).trajectory.col(0).transpose();
    const Eigen::RowVectorXd mean = draws.colwise().mean();
    double worst = 0.0;
    for (Eigen::Index t = 0; t < 5; ++t) {
        const auto ref = oracle.smoothed(y, t + 1);
        const double se = std::sqrt(ref.cov(0, 0) / N);
        worst = std::max(worst, std::abs(mean[t] - ref.mean[0]) / se);
    }
    for (Eigen::Index t = 0; t + 1 < 5; ++t) {
        const auto ref = oracle.smoothed_pair(y, t + 1);
        const Eigen::ArrayXd prod = (draws.col(t).array() - mean[t]) * (draws.col(t + 1).array() - mean[t + 1]);
        const double cov = prod.sum() / (N - 1);
        const double se = std::sqrt((prod - prod.mean()).square().sum() / (N - 1) / N);
        worst = std::max(worst, std::abs(cov - ref.cov(0, 1)) / se);
    }
    const double secs = seconds_since(start);
    return {worst < 4.0 && secs < 30.0,
            fmt("FFBS moments: worst deviation %.2f MC SE over means and lag-1 covariances (limit 4), %.2f s (limit 30 s)",
                worst, secs)};
}

Outcome spike_slab_enumeration() {
    std::mt19937_64 gen(4242);
    const Eigen::Index T = 30;
    Eigen::MatrixXd x = gaussian_matrix(gen, T, 3);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXd::Identity(T, 3) * std::sqrt(static_cast<double>(T));
    std::normal_distribution<double> nd;
    std::vector<double> y(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t) y[static_cast<std::size_t>(t)] = 0.3 * x(t, 0) + 0.15 * x(t, 1) + nd(gen);
    SpikeSlabPrior prior;
    prior.inclusion_prob = {0.5, 0.5, 0.5};
    prior.slab_information = (x.transpose() * x) / static_cast<double>(T);
    prior.obs_scale_sq = 0.5;
    prior.obs_df = 5.0;

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), T);
    std::vector<double> exact(8);
    double norm = 0.0;
    for (int m = 0; m < 8; ++m) {
        const std::vector<std::uint8_t> g{static_cast<std::uint8_t>(m & 1), static_cast<std::uint8_t>((m >> 1) & 1),
                                          static_cast<std::uint8_t>((m >> 2) & 1)};
        exact[static_cast<std::size_t>(m)] =
            std::exp(conjugate_log_marginal(yv, x, prior.slab_information, g, prior.obs_df, prior.obs_scale_sq));
        norm += exact[static_cast<std::size_t>(m)];
    }
    for (double& e : exact) e /= norm;

    const SpikeSlabSampler sampler(x, prior);
    Rng rng(99);
    constexpr int N = 10000;
    std::vector<std::vector<double>> visits(8, std::vector<double>(N, 0.0));
    std::vector<std::uint8_t> g{0, 0, 0};
    for (int i = 0; i < N; ++i) {
        g = sampler.draw(y, g, rng).included;
        visits[static_cast<std::size_t>(g[0] | (g[1] << 1) | (g[2] << 2))][static_cast<std::size_t>(i)] = 1.0;
    }
    double worst = 0.0;
    for (std::size_t m = 0; m < 8; ++m) {
        const auto est = batch_means(visits[m]);
        const double se = std::max(est.se, std::sqrt(exact[m] * (1.0 - exact[m]) / N));
        worst = std::max(worst, std::abs(est.mean - exact[m]) / se);
    }
    return {worst < 3.0, fmt("spike-and-slab enumeration: worst model-frequency deviation %.2f MC SE over 8 models, "
                             "10000 sweeps (limit 3)", worst)};
}

Outcome conjugate_cross_check() {
    std::mt19937_64 gen(808);
    const Eigen::Index T = 30, k = 3;
    const Eigen::MatrixXd x = gaussian_matrix(gen, T, k);
    std::normal_distribution<double> nd;
    std::vector<double> y(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t) y[static_cast<std::size_t>(t)] = 1.2 * x(t, 0) - 0.7 * x(t, 2) + 0.5 * nd(gen);
    PriorSet priors = default_priors(y, x);
    priors.slab.inclusion_prob.assign(3, 1.0);
    priors.initial = {0.0, 1e-9};
    SamplerOptions opt;
    opt.fixed_level_scale = 0.0;
    const auto out = run_gibbs(y, x, priors, McmcConfig{21000, 1000, 17, 1}, opt);

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), T);
    const Eigen::MatrixXd V = (x.transpose() * x + priors.slab.slab_information).inverse();
    const Eigen::VectorXd mean = V * x.transpose() * yv;
    const Eigen::MatrixXd C =
        Eigen::MatrixXd::Identity(T, T) + x * priors.slab.slab_information.inverse() * x.transpose();
    const double ss = priors.slab.obs_df * priors.slab.obs_scale_sq + yv.dot(C.fullPivLu().solve(yv));
    const Eigen::MatrixXd cov = ss / (priors.slab.obs_df + static_cast<double>(T) - 2.0) * V;

    const auto N = static_cast<Eigen::Index>(out.draws.size());
    Eigen::MatrixXd beta(N, k);
    for (Eigen::Index i = 0; i < N; ++i) beta.row(i) = out.draws[static_cast<std::size_t>(i)].params.beta.transpose();
    double worst = 0.0;
    const Eigen::RowVectorXd m = beta.colwise().mean();
    for (Eigen::Index j = 0; j < k; ++j) {
        const std::vector<double> chain(beta.col(j).data(), beta.col(j).data() + N);
        const auto est = batch_means(chain);
        worst = std::max(worst, std::abs(est.mean - mean[j]) / est.se);
        for (Eigen::Index l = j; l < k; ++l) {
            const Eigen::VectorXd prod = (beta.col(j).array() - m[j]) * (beta.col(l).array() - m[l]);
            const std::vector<double> pc(prod.data(), prod.data() + N);
            const auto pe = batch_means(pc);
            worst = std::max(worst, std::abs(pe.mean * N / (N - 1) - cov(j, l)) / pe.se);
        }
    }
    return {worst < 3.0, fmt("conjugate cross-check: worst beta mean/covariance deviation %.2f MC SE over %ld draws "
                             "(limit 3)", worst, static_cast<long>(N))};
}

Outcome detection_power() {
    const auto start = Clock::now();
    int detected = 0, covered = 0, false_pos = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto lifted = synthetic_panel(1000 + s, {"PL"}, {{"PL", {2004, 0.5}}});
        const auto null = synthetic_panel(1000 + s, {"PL"});
        const auto r = analyze(lifted, full_config("PL", 2004, s));
        const auto n = analyze(null, full_config("PL", 2004, s));
        if (r.summary.cumulative.p < 0.05) ++detected;
        if (r.summary.cumulative.rel_effect.lower <= 50.0 && 50.0 <= r.summary.cumulative.rel_effect.upper) ++covered;
        if (n.summary.cumulative.p < 0.05) ++false_pos;
    }
    const double secs = seconds_since(start);
    return {detected >= 18 && covered >= 18 && false_pos <= 3 && secs < 300.0,
            fmt("detection power: +50%% lift detected %d/20 (need 18), CI covers +50%% %d/20 (need 18), null false "
                "positives %d/20 (max 3), %.1f s (limit 300 s)",
                detected, covered, false_pos, secs)};
}

Outcome scale_equivariance() {
    const auto panel = synthetic_panel(606, {"PL"}, {{"PL", {2004, 0.5}}});
    Eigen::MatrixXd v = panel.values();
    v.col(static_cast<Eigen::Index>(panel.column("PL"))) *= 10.0;
    const PatentPanel scaled(panel.first_year(), panel.countries(), v);
    const auto a = analyze(panel, full_config("PL", 2004, 6));
    const auto b = analyze(scaled, full_config("PL", 2004, 6));
    double rel = 0.0, pred = 0.0;
    for (auto row : {&ImpactSummary::average, &ImpactSummary::cumulative}) {
        const auto& ra = a.summary.*row;
        const auto& rb = b.summary.*row;
        for (auto f : {&stats::Interval::median, &stats::Interval::lower, &stats::Interval::upper}) {
            rel = std::max(rel, std::abs(ra.rel_effect.*f - rb.rel_effect.*f));
            pred = std::max(pred, std::abs(rb.predicted.*f / (10.0 * (ra.predicted.*f)) - 1.0));
        }
    }
    const double dp = std::abs(a.summary.cumulative.p - b.summary.cumulative.p);
    return {rel <= 1e-12 && dp <= 1e-12 && pred <= 1e-9,
            fmt("scale equivariance (x10): relative effect diff %.1e, p diff %.1e (limit 1e-12), predicted relative "
                "error %.1e (limit 1e-9)", rel, dp, pred)};
}

Outcome calibration() {
    const auto start = Clock::now();
    const LevelScalePrior level{8.0, 0.3, 2.0};
    const double obs_df = 8.0, obs_s2 = 0.25, pi = 0.5;
    const Eigen::Index T = 30, k = 3;
    constexpr int reps = 200, bins = 10;
    std::vector<int> hist_l(bins, 0), hist_y(bins, 0);
    for (int rep = 0; rep < reps; ++rep) {
        std::mt19937_64 gen(50000 + static_cast<std::uint64_t>(rep));
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const Eigen::MatrixXd x = gaussian_matrix(gen, T, k);
        const Eigen::MatrixXd xtx = x.transpose() * x;
        Eigen::MatrixXd info = 0.5 * xtx;
        info.diagonal() = xtx.diagonal();
        info /= static_cast<double>(T);

        double sigma_l;
        do {
            std::chi_squared_distribution<double> chi(level.df);
            sigma_l = std::sqrt(level.df * level.guess * level.guess / chi(gen));
        } while (sigma_l > level.upper_bound);
        std::chi_squared_distribution<double> chi_y(obs_df);
        const double sigma_y = std::sqrt(obs_df * obs_s2 / chi_y(gen));
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < k; ++j)
            if (unif(gen) < pi) active.push_back(j);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
        if (!active.empty()) {
            const auto a = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd sub(a, a);
            for (Eigen::Index i = 0; i < a; ++i)
                for (Eigen::Index j = 0; j < a; ++j) sub(i, j) = info(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
            const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(sub.inverse()).matrixL();
            Eigen::VectorXd z(a);
            for (Eigen::Index i = 0; i < a; ++i) z[i] = nd(gen);
            const Eigen::VectorXd b = sigma_y * (L * z);
            for (Eigen::Index i = 0; i < a; ++i) beta[active[static_cast<std::size_t>(i)]] = b[i];
        }
        double l = nd(gen);
        std::vector<double> y(static_cast<std::size_t>(T));
        for (Eigen::Index t = 0; t < T; ++t) {
            l += sigma_l * nd(gen);
            y[static_cast<std::size_t>(t)] = l + x.row(t).dot(beta) + sigma_y * nd(gen);
        }

        PriorSet priors;
        priors.level = level;
        priors.slab.obs_df = obs_df;
        priors.slab.obs_scale_sq = obs_s2;
        priors.slab.inclusion_prob.assign(static_cast<std::size_t>(k), pi);
        priors.slab.slab_information = info;
        priors.initial = {0.0, 1.0};
        // 100 retained, ranked against the first 99 so the 100 possible ranks split evenly into bins.
        const auto out = run_gibbs(y, x, priors, McmcConfig{3000, 500, 70000 + static_cast<std::uint64_t>(rep), 25});
        constexpr int L = 99;
        int rank_l = 0, rank_y = 0;
        for (int i = 0; i < L; ++i) {
            const auto& d = out.draws[static_cast<std::size_t>(i)];
            rank_l += d.params.sigma_level < sigma_l;
            rank_y += d.params.sigma_obs < sigma_y;
        }
        constexpr int per_bin = (L + 1) / bins;
        ++hist_l[static_cast<std::size_t>(rank_l / per_bin)];
        ++hist_y[static_cast<std::size_t>(rank_y / per_bin)];
    }
    auto chi2 = [&](const std::vector<int>& h) {
        const double e = static_cast<double>(reps) / bins;
        double s = 0.0;
        for (int c : h) s += (c - e) * (c - e) / e;
        return s;
    };
    const double crit = boost::math::quantile(boost::math::chi_squared(bins - 1), 0.99);
    const double cl = chi2(hist_l), cy = chi2(hist_y);
    const double secs = seconds_since(start);
    return {cl < crit && cy < crit,
            fmt("simulation-based calibration: rank chi-square sigma_level %.2f, sigma_obs %.2f (1%% critical %.3f, "
                "200 replications, %.1f s)", cl, cy, crit, secs)};
}

std::vector<std::string> table_columns(const std::string& text, std::size_t* header_line = nullptr) {
    std::istringstream in(text);
    std::size_t i = 0;
    for (std::string l; std::getline(in, l); ++i)
        if (l.find("Stat") != std::string::npos) {
            std::istringstream cols(l);
            std::vector<std::string> names;
            for (std::string w; cols >> w;) names.push_back(w);
            if (header_line) *header_line = i;
            return names;
        }
    return {};
}

const std::vector<std::string> kTableColumns{"Stat", "Actual", "Val", "lower", "upper", "Val", "lower", "upper", "p"};

Outcome report_fidelity() {
    const auto panel = synthetic_panel(707, {"CZ"}, {{"CZ", {2004, 0.5}}});
    const auto r = analyze(panel, full_config("CZ", 2004, 8));
    const std::string text = report::render(r, OutputFormat::Text);
    const bool layout = table_columns(text) == kTableColumns && text.find("Prediction") != std::string::npos &&
                        text.find("Relative") != std::string::npos && text.find("Avg") != std::string::npos &&
                        text.find("Cum") != std::string::npos;
    const double n = static_cast<double>(r.split.post_years.size());
    double identity = std::abs(r.summary.average.actual - r.summary.cumulative.actual / n) /
                      std::max(1.0, std::abs(r.summary.average.actual));
    for (auto f : {&stats::Interval::median, &stats::Interval::lower, &stats::Interval::upper}) {
        for (auto col : {&ImpactRow::predicted, &ImpactRow::abs_effect}) {
            const double avg = r.summary.average.*col.*f, cum = r.summary.cumulative.*col.*f;
            identity = std::max(identity, std::abs(avg - cum / n) / std::max(1.0, std::abs(avg)));
        }
    }
    std::size_t sparse_ok = 0;
    for (const auto& d : r.draws.draws) {
        bool ok = true;
        for (std::size_t j = 0; j < d.params.included.size(); ++j)
            ok = ok && ((d.params.included[j] == 0) == (d.params.beta[static_cast<Eigen::Index>(j)] == 0.0));
        sparse_ok += ok;
    }
    return {layout && identity <= 1e-9 && sparse_ok == r.draws.draws.size(),
            fmt("report fidelity: table columns %s, Avg = Cum/|post| max relative error %.1e (limit 1e-9), "
                "sparsity identity %zu/%zu draws",
                layout ? "match" : "DIFFER", identity, sparse_ok, r.draws.draws.size())};
}

std::vector<std::string> eu13_codes() {
    std::vector<std::string> codes;
    for (const auto& [c, y] : kEu13Accession) codes.push_back(c);
    return codes;
}

PatentPanel accession_panel() {
    std::map<std::string, Effect> effects;
    for (const char* c : {"RO", "EE", "PL", "CZ"}) effects[c] = {kEu13Accession.at(c), 0.8};
    for (const char* c : {"HR", "LT"}) effects[c] = {kEu13Accession.at(c), -0.4};
    return synthetic_panel(2013, eu13_codes(), effects);
}

Outcome batch_reproduction() {
    const auto panel = accession_panel();
    const AnalysisConfig base = full_config("", 0, 20);
    const auto b = batch(panel, BatchSpec{}, base, 4);
    const std::string text = report::render(b, base, OutputFormat::Text);

    bool sorted = true;
    for (std::size_t i = 1; i < b.entries.size(); ++i)
        sorted = sorted && b.entries[i - 1].result && b.entries[i].result &&
                 b.entries[i - 1].result->summary.cumulative.p <= b.entries[i].result->summary.cumulative.p;
    std::size_t rows = 0;
    {
        std::istringstream in(text);
        for (std::string l; std::getline(in, l);)
            if (l.find(" Avg ") != std::string::npos || l.find(" Cum ") != std::string::npos) ++rows;
    }
    const bool format = table_columns(text) == kTableColumns && rows == 2 * 14 && b.aggregate && b.aggregate->result;

    const std::set<std::string> up{"RO", "EE", "PL", "CZ"}, down{"HR", "LT"};
    std::string wrong;
    for (const auto& e : b.entries) {
        if (!e.result) {
            wrong += " " + e.country + "(failed)";
            continue;
        }
        const bool sig = e.result->significant();
        const double eff = e.result->summary.cumulative.abs_effect.median;
        const bool ok = up.count(e.country) ? sig && eff > 0 : down.count(e.country) ? sig && eff < 0 : !sig;
        if (!ok) wrong += " " + e.country + fmt("(p=%.3f)", e.result->summary.cumulative.p);
    }
    return {b.entries.size() == 13 && sorted && format && wrong.empty(),
            fmt("batch reproduction: %zu countries + aggregate, sorted by p: %s, table format: %s, significance "
                "partition {RO,EE,PL,CZ +; HR,LT -; rest n.s.}: %s",
                b.entries.size(), sorted ? "yes" : "no", format ? "ok" : "BROKEN",
                wrong.empty() ? "reproduced" : ("mismatch" + wrong).c_str())};
}

Outcome performance() {
    const auto panel = accession_panel();
    auto start = Clock::now();
    (void)analyze(panel, full_config("PL", 2004, 1));
    const double single = seconds_since(start);
    start = Clock::now();
    const auto b = batch(panel, BatchSpec{}, full_config("", 0, 1), 4);
    const double batch_secs = seconds_since(start);
    return {single < 10.0 && batch_secs < 60.0 && !b.any_failed(),
            fmt("performance: one analysis (T=33, 15 covariates, 20000 draws) %.2f s (limit 10 s); 13-country batch "
                "with 4 jobs %.1f s (limit 60 s)", single, batch_secs)};
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{
        exact_inference, ffbs_moments,       spike_slab_enumeration, conjugate_cross_check, detection_power,
        scale_equivariance, calibration, report_fidelity,        batch_reproduction,    performance};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %zu: %s\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
