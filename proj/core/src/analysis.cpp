#include "impactor/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "impactor/error.hpp"

namespace impactor {

const std::vector<std::string> kEu15 = {"AT", "BE", "DE", "DK", "EL", "ES", "FI", "FR",
                                        "IE", "IT", "LU", "NL", "PT", "SE", "UK"};

const std::map<std::string, Year> kEu13Accession = {
    {"CZ", 2004}, {"EE", 2004}, {"HU", 2004}, {"LV", 2004}, {"LT", 2004}, {"PL", 2004}, {"SK", 2004},
    {"SI", 2004}, {"MT", 2004}, {"CY", 2004}, {"BG", 2007}, {"RO", 2007}, {"HR", 2013}};

namespace {

// Seeds for the forecast stream and for extra chains are derived from the user seed.
constexpr std::uint64_t kForecastStream = 0xf0ecu;
constexpr std::uint64_t kChainStream = 0xc4a1u;
constexpr std::uint64_t kBatchStream = 0xba7cu;

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return Rng::substream(seed ^ (stream << 48), index).engine()();
}

void validate_config(const PatentPanel& panel, const AnalysisConfig& c) {
    if (c.target.empty()) throw ValidationError("analysis: no target country given");
    if (!panel.has_country(c.target)) throw ValidationError("analysis: target '" + c.target + "' not found in data");
    if (std::find(c.covariates.begin(), c.covariates.end(), c.target) != c.covariates.end())
        throw ValidationError("analysis: target cannot be a covariate");
    std::set<std::string> seen;
    for (const auto& cov : c.covariates) {
        if (!panel.has_country(cov)) throw ValidationError("analysis: covariate '" + cov + "' not found in data");
        if (!seen.insert(cov).second) throw ValidationError("analysis: covariate '" + cov + "' listed twice");
    }
    if (!(c.level > 0.0 && c.level < 1.0)) throw ValidationError("analysis: credible level must lie in (0, 1)");
    if (c.chains == 0) throw ValidationError("analysis: at least one chain is required");
    c.mcmc.validate();
}

}  // namespace

AnalysisResult analyze(const PatentPanel& panel, const AnalysisConfig& config) {
    validate_config(panel, config);
    AnalysisResult r;
    r.config = config;
    r.split = split_periods(panel, config.intervention_year);
    const auto n_pre = r.split.pre_years.size();
    const auto n_post = r.split.post_years.size();
    const auto n_all = panel.year_count();

    const std::vector<double> y = panel.series(config.target);
    const Standardized ys = standardize(y, 0, n_pre);
    r.response_offset = ys.offset;
    r.response_scale = ys.scale;

    const auto k = static_cast<Eigen::Index>(config.covariates.size()) + 1;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n_all), k);
    x.col(0).setOnes();
    r.covariate_names.push_back(kInterceptName);
    for (std::size_t c = 0; c < config.covariates.size(); ++c) {
        const Standardized xs = standardize(panel.series(config.covariates[c]), 0, n_pre);
        x.col(static_cast<Eigen::Index>(c) + 1) = Eigen::Map<const Eigen::VectorXd>(xs.values.data(), static_cast<Eigen::Index>(n_all));
        r.covariate_names.push_back(config.covariates[c]);
    }
    const Eigen::MatrixXd x_pre = x.topRows(static_cast<Eigen::Index>(n_pre));
    const Eigen::MatrixXd x_post = x.bottomRows(static_cast<Eigen::Index>(n_post));
    const std::span<const double> y_pre(ys.values.data(), n_pre);

    r.priors = default_priors(y_pre, x_pre, config.priors, Eigen::Index{0});

    SamplerOptions opts;
    opts.intercept_column = 0;
    opts.response_offset = ys.offset;
    opts.response_scale = ys.scale;
    for (unsigned chain = 0; chain < config.chains; ++chain) {
        McmcConfig mc = config.mcmc;
        if (chain > 0) mc.seed = derived_seed(config.mcmc.seed, kChainStream, chain);
        PosteriorDraws d = run_gibbs(y_pre, x_pre, r.priors, mc, opts);
        if (chain == 0) {
            r.draws = std::move(d);
        } else {
            r.draws.draws.insert(r.draws.draws.end(), std::make_move_iterator(d.draws.begin()),
                                 std::make_move_iterator(d.draws.end()));
        }
    }
    r.inclusion = inclusion_matrix(r.draws);
    r.diagnostics = diagnostics(r.draws);

    Rng forecast_rng(derived_seed(config.mcmc.seed, kForecastStream, 0));
    const CounterfactualDraws cf = forecast_counterfactual(r.draws, x_post, forecast_rng, config.threads);
    r.observed_post.assign(y.begin() + static_cast<std::ptrdiff_t>(n_pre), y.end());
    r.summary = summarize(r.observed_post, cf, config.level);
    r.series = impact_series(r.observed_post, cf, config.level);
    return r;
}

bool BatchResult::any_failed() const {
    if (aggregate && !aggregate->result) return true;
    return std::any_of(entries.begin(), entries.end(), [](const BatchEntry& e) { return !e.result; });
}

BatchResult batch(const PatentPanel& panel, const BatchSpec& spec, const AnalysisConfig& base, unsigned jobs) {
    if (spec.intervention_by_country.empty()) throw ValidationError("batch: no countries to analyse");

    std::vector<BatchEntry> work;
    for (const auto& [country, year] : spec.intervention_by_country) work.push_back({country, year, std::nullopt, "", 0});
    PatentPanel aggregated_panel = panel;
    bool run_aggregate = spec.include_aggregate;
    if (run_aggregate) {
        std::set<std::string> members;
        Year year = spec.intervention_by_country.begin()->second;
        for (const auto& [country, y] : spec.intervention_by_country) {
            if (panel.has_country(country)) members.insert(country);
            year = std::min(year, y);
        }
        BatchEntry agg{spec.aggregate_name, year, std::nullopt, "", 0};
        try {
            aggregated_panel = aggregate_group(panel, members, spec.aggregate_name);
        } catch (const ValidationError& e) {
            agg.error = e.what();
            agg.error_code = 2;
            run_aggregate = false;
        }
        work.push_back(std::move(agg));
    }

    auto run_one = [&](std::size_t i) {
        BatchEntry& e = work[i];
        if (!e.error.empty()) return;
        AnalysisConfig cfg = base;
        cfg.target = e.country;
        cfg.intervention_year = e.intervention_year;
        cfg.threads = 1;
        cfg.mcmc.seed = derived_seed(base.mcmc.seed, kBatchStream, i);
        cfg.covariates.erase(std::remove(cfg.covariates.begin(), cfg.covariates.end(), e.country), cfg.covariates.end());
        const bool is_aggregate = spec.include_aggregate && i + 1 == work.size();
        try {
            e.result = analyze(is_aggregate ? aggregated_panel : panel, cfg);
        } catch (const ValidationError& ex) {
            e.error = ex.what();
            e.error_code = 2;
        } catch (const NumericError& ex) {
            e.error = ex.what();
            e.error_code = 3;
        }
    };

    const unsigned n_jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
    if (n_jobs == 1) {
        for (std::size_t i = 0; i < work.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < work.size(); i = next++) run_one(i);
            });
        for (auto& th : pool) th.join();
    }

    BatchResult out;
    if (spec.include_aggregate) {
        out.aggregate = std::move(work.back());
        work.pop_back();
    }
    std::stable_sort(work.begin(), work.end(), [](const BatchEntry& a, const BatchEntry& b) {
        if (a.result && b.result) return a.result->summary.cumulative.p < b.result->summary.cumulative.p;
        return a.result.has_value() && !b.result.has_value();
    });
    out.entries = std::move(work);
    return out;
}

DescriptiveSummary describe(const PatentPanel& panel, const std::map<std::string, Year>& intervention_by_country,
                            const std::map<std::string, std::vector<std::string>>& groups) {
    DescriptiveSummary s = describe_change(panel, intervention_by_country, groups);
    std::stable_sort(s.countries.begin(), s.countries.end(),
                     [](const CountryChange& a, const CountryChange& b) { return a.sum_after > b.sum_after; });
    return s;
}

std::map<std::string, Year> default_describe_years(const PatentPanel& panel, Year reference_year) {
    std::map<std::string, Year> out;
    for (const auto& c : panel.countries()) {
        auto it = kEu13Accession.find(c);
        out[c] = it != kEu13Accession.end() ? it->second : reference_year;
    }
    return out;
}

std::map<std::string, std::vector<std::string>> default_groups(const PatentPanel& panel) {
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& c : kEu15)
        if (panel.has_country(c)) groups["EU-15"].push_back(c);
    for (const auto& [c, year] : kEu13Accession)
        if (panel.has_country(c)) groups["EU-13"].push_back(c);
    return groups;
}

void emit_plot_data(const AnalysisResult& result, const std::filesystem::path& dir) {
    if (result.series.points.empty()) throw ValidationError("plot-data: empty impact series");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ValidationError("plot-data: cannot create '" + dir.string() + "': " + ec.message());

    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw ValidationError("plot-data: cannot write '" + (dir / name).string() + "'");
        f.precision(17);
        return f;
    };
    auto write_band = [&](const char* name, auto band_of, bool with_observed) {
        std::ofstream f = open(name);
        f << (with_observed ? "year,observed,median,lower,upper\n" : "year,median,lower,upper\n");
        for (std::size_t i = 0; i < result.series.points.size(); ++i) {
            const auto& pt = result.series.points[i];
            const stats::Interval b = band_of(pt);
            f << result.split.post_years[i] << ',';
            if (with_observed) f << pt.observed << ',';
            f << b.median << ',' << b.lower << ',' << b.upper << '\n';
        }
        if (!f) throw ValidationError(std::string("plot-data: write failed for ") + name);
    };
    write_band("original.csv", [](const SeriesPoint& p) { return p.counterfactual; }, true);
    write_band("pointwise.csv", [](const SeriesPoint& p) { return p.pointwise; }, false);
    write_band("cumulative.csv", [](const SeriesPoint& p) { return p.cumulative; }, false);

    nlohmann::ordered_json meta;
    meta["target"] = result.config.target;
    meta["intervention_year"] = result.split.intervention_year;
    meta["first_post_year"] = result.split.post_years.front();
    meta["last_post_year"] = result.split.post_years.back();
    meta["credible_level"] = result.series.level;
    std::ofstream f = open("metadata.json");
    f << meta.dump(2) << '\n';
    if (!f) throw ValidationError("plot-data: write failed for metadata.json");
}

}  // namespace impactor
