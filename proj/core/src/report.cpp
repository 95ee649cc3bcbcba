#include "impactor/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "impactor/error.hpp"

#ifndef IMPACTOR_VERSION
#define IMPACTOR_VERSION "0.0.0"
#endif

namespace impactor::report {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

// One decimal with thousands separators, e.g. 4,058.5.
std::string grouped(double v) {
    std::string s = fmt("%.1f", std::abs(v));
    const auto dot = s.find('.');
    for (auto i = static_cast<std::ptrdiff_t>(dot) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
    return (v < 0.0 && s != "0.0" ? "-" : "") + s;
}

std::string percent(double v) {
    std::string s = fmt("%.0f%%", v);
    return s == "-0%" ? "0%" : s;
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string level_label(double level) {
    return fmt("%g", 100.0 * level) + "% CI";
}

std::string format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::Json: return "json";
        case OutputFormat::Csv: return "csv";
        default: return "text";
    }
}

std::string verdict(const AnalysisResult& r) {
    const auto& cum = r.summary.cumulative;
    std::string dir = cum.abs_effect.median > 0.0 ? "positive" : cum.abs_effect.median < 0.0 ? "negative" : "zero";
    if (r.significant()) return "significant " + dir + " effect";
    return "not statistically significant";
}

json row_json(const ImpactRow& row) {
    return json{{"actual", row.actual},
                {"predicted", row.predicted.median},
                {"predicted_lower", row.predicted.lower},
                {"predicted_upper", row.predicted.upper},
                {"abs_effect", row.abs_effect.median},
                {"abs_effect_lower", row.abs_effect.lower},
                {"abs_effect_upper", row.abs_effect.upper},
                {"rel_effect", row.rel_effect.median},
                {"rel_effect_lower", row.rel_effect.lower},
                {"rel_effect_upper", row.rel_effect.upper},
                {"p", row.p}};
}

json band_json(const stats::Interval& b) {
    return json{{"median", b.median}, {"lower", b.lower}, {"upper", b.upper}};
}

json config_json(const AnalysisConfig& c) {
    json pri{{"nu_level", c.priors.nu_level},
             {"level_scale_factor", c.priors.level_scale_factor},
             {"level_bound_factor", c.priors.level_bound_factor},
             {"expected_model_size", c.priors.expected_model_size},
             {"expected_r2", c.priors.expected_r2},
             {"nu_obs", c.priors.nu_obs},
             {"always_include_intercept", c.priors.always_include_intercept},
             {"slab_diagonal_weight", c.priors.diagonal_weight},
             {"slab_information_units", c.priors.information_units}};
    return json{{"data", c.data_path},
                {"target", c.target},
                {"covariates", c.covariates},
                {"intervention_year", c.intervention_year},
                {"draws", c.mcmc.total_draws},
                {"burnin", c.mcmc.burn_in},
                {"thin", c.mcmc.thinning},
                {"seed", c.mcmc.seed},
                {"chains", c.chains},
                {"level", c.level},
                {"format", format_name(c.format)},
                {"priors", pri}};
}

json metadata_json() {
    return json{{"tool", "impactor"},
                {"version", version()},
                {"interval_method", "equal-tailed percentiles, linear interpolation between order statistics"},
                {"relative_effect_method", "per draw: 100 * (sum observed / sum predicted - 1), then summarised"},
                {"p_method", "one-sided tail area of per-draw cumulative effect, +1 smoothing, zeros split evenly"},
                {"disclaimers", disclaimers()}};
}

json result_json(const AnalysisResult& r) {
    json inclusion = json::object();
    for (std::size_t j = 0; j < r.covariate_names.size(); ++j) inclusion[r.covariate_names[j]] = r.inclusion[j];
    json series = json::array();
    for (std::size_t i = 0; i < r.series.points.size(); ++i) {
        const auto& pt = r.series.points[i];
        series.push_back(json{{"year", r.split.post_years[i]},
                              {"observed", pt.observed},
                              {"counterfactual", band_json(pt.counterfactual)},
                              {"pointwise", band_json(pt.pointwise)},
                              {"cumulative", band_json(pt.cumulative)}});
    }
    const auto& pr = r.priors;
    return json{
        {"country", r.config.target},
        {"intervention_year", r.split.intervention_year},
        {"pre_period", {r.split.pre_years.front(), r.split.pre_years.back()}},
        {"post_period", {r.split.post_years.front(), r.split.post_years.back()}},
        {"summary", {{"average", row_json(r.summary.average)}, {"cumulative", row_json(r.summary.cumulative)}}},
        {"significant", r.significant()},
        {"verdict", verdict(r)},
        {"credible_level", r.summary.level},
        {"retained_draws", r.summary.draws},
        {"relative_effect_excluded_draws", r.summary.relative_excluded},
        {"effective_sample_size", {{"sigma_level", r.diagnostics.ess_level_scale}, {"sigma_obs", r.diagnostics.ess_obs_scale}}},
        {"standardization", {{"offset", r.response_offset}, {"scale", r.response_scale}}},
        {"prior_hyperparameters",
         {{"level_df", pr.level.df},
          {"level_guess", pr.level.guess},
          {"level_upper_bound", pr.level.upper_bound},
          {"expected_model_size", pr.slab.expected_model_size},
          {"expected_r2", pr.slab.expected_r2},
          {"obs_df", pr.slab.obs_df},
          {"obs_scale_sq", pr.slab.obs_scale_sq},
          {"inclusion_prob", pr.slab.inclusion_prob},
          {"initial_level_mean", pr.initial.level_mean},
          {"initial_level_scale", pr.initial.level_scale}}},
        {"inclusion_probabilities", inclusion},
        {"series", series}};
}

// Layout: Country, Stat, Actual, Prediction (Val, lower, upper), Relative (Val, lower, upper), p.
constexpr std::size_t kNameWidth = 8;
constexpr std::size_t kNum = 11;
constexpr std::size_t kPct = 8;

std::string table_header(double level) {
    std::ostringstream os;
    const std::string pred = "Prediction +/- " + level_label(level);
    const std::string rel = "Relative +/- " + level_label(level);
    os << std::string(kNameWidth + 5 + kNum, ' ') << pad_right("  " + pred, 3 * kNum) << pad_right("  " + rel, 3 * kPct)
       << '\n';
    os << pad_right("", kNameWidth) << pad_right("Stat", 5) << pad_left("Actual", kNum) << pad_left("Val", kNum)
       << pad_left("lower", kNum) << pad_left("upper", kNum) << pad_left("Val", kPct) << pad_left("lower", kPct)
       << pad_left("upper", kPct) << pad_left("p", 9) << '\n';
    return os.str();
}

std::string table_row(const std::string& name, const char* stat, const ImpactRow& row) {
    std::ostringstream os;
    os << pad_right(name, kNameWidth) << pad_right(stat, 5) << pad_left(grouped(row.actual), kNum)
       << pad_left(grouped(row.predicted.median), kNum) << pad_left(grouped(row.predicted.lower), kNum)
       << pad_left(grouped(row.predicted.upper), kNum) << pad_left(percent(row.rel_effect.median), kPct)
       << pad_left(percent(row.rel_effect.lower), kPct) << pad_left(percent(row.rel_effect.upper), kPct)
       << pad_left(format_p(row.p), 9) << '\n';
    return os.str();
}

std::string table_rows(const AnalysisResult& r, const std::string& name) {
    return table_row(name, "Avg", r.summary.average) + table_row(name, "Cum", r.summary.cumulative);
}

std::string settings_text(const AnalysisConfig& c) {
    std::ostringstream os;
    os << "Settings: draws " << c.mcmc.total_draws << ", burn-in " << c.mcmc.burn_in << ", thin " << c.mcmc.thinning
       << ", seed " << c.mcmc.seed << ", chains " << c.chains << '\n';
    os << "Priors: nu-level " << c.priors.nu_level << ", level-scale-factor " << c.priors.level_scale_factor
       << ", level-bound-factor " << c.priors.level_bound_factor << ", expected-model-size "
       << c.priors.expected_model_size << ", expected-r2 " << c.priors.expected_r2 << ", nu-obs " << c.priors.nu_obs
       << ", always-include-intercept " << (c.priors.always_include_intercept ? "yes" : "no") << '\n';
    os << "impactor " << version() << "; modelling defaults chosen by this tool:\n";
    for (const auto& d : disclaimers()) os << "  - " << d << '\n';
    return os.str();
}

std::string single_text(const AnalysisResult& r) {
    std::ostringstream os;
    os << "Causal impact: " << r.config.target << ", intervention " << r.split.intervention_year << " (pre "
       << r.split.pre_years.front() << "-" << r.split.pre_years.back() << ", post " << r.split.post_years.front() << "-"
       << r.split.post_years.back() << ")\n\n";
    os << table_header(r.summary.level) << table_rows(r, r.config.target) << '\n';
    const auto& a = r.summary.average;
    const auto& c = r.summary.cumulative;
    os << "Absolute effect: Avg " << grouped(a.abs_effect.median) << " [" << grouped(a.abs_effect.lower) << ", "
       << grouped(a.abs_effect.upper) << "], Cum " << grouped(c.abs_effect.median) << " [" << grouped(c.abs_effect.lower)
       << ", " << grouped(c.abs_effect.upper) << "]\n";
    os << "Posterior tail-area probability p " << (c.p < 0.001 ? "" : "= ") << format_p(c.p) << ": " << verdict(r) << " (threshold p < 0.05)\n";
    if (r.summary.relative_excluded > 0)
        os << "Relative effect excludes " << r.summary.relative_excluded << " draws with zero predicted total\n";
    os << "Inclusion probabilities:";
    for (std::size_t j = 0; j < r.covariate_names.size(); ++j)
        os << (j ? ", " : " ") << r.covariate_names[j] << " " << fmt("%.3f", r.inclusion[j]);
    os << '\n';
    os << "Effective sample size: sigma_level " << fmt("%.0f", r.diagnostics.ess_level_scale) << ", sigma_obs "
       << fmt("%.0f", r.diagnostics.ess_obs_scale) << " of " << r.summary.draws << " retained draws\n\n";
    os << settings_text(r.config);
    return os.str();
}

std::string csv_header() {
    return "country,stat,actual,predicted,predicted_lower,predicted_upper,abs_effect,abs_effect_lower,"
           "abs_effect_upper,rel_effect,rel_effect_lower,rel_effect_upper,p\n";
}

std::string csv_rows(const AnalysisResult& r, const std::string& name) {
    std::ostringstream os;
    auto emit = [&](const char* stat, const ImpactRow& row) {
        os << name << ',' << stat;
        for (double v : {row.actual, row.predicted.median, row.predicted.lower, row.predicted.upper,
                         row.abs_effect.median, row.abs_effect.lower, row.abs_effect.upper, row.rel_effect.median,
                         row.rel_effect.lower, row.rel_effect.upper, row.p})
            os << ',' << fmt("%.17g", v);
        os << '\n';
    };
    emit("Avg", r.summary.average);
    emit("Cum", r.summary.cumulative);
    return os.str();
}

json failure_json(const BatchEntry& e) {
    return json{{"country", e.country}, {"intervention_year", e.intervention_year}, {"error", e.error}, {"exit_code", e.error_code}};
}

}  // namespace

std::string version() {
    return IMPACTOR_VERSION;
}

std::vector<std::string> disclaimers() {
    return {"burn-in of 2,000 draws (10% of the default 20,000) is a chosen default",
            "thinning of 1 and a single chain are chosen defaults; no convergence test is applied",
            "credible intervals are equal-tailed percentiles",
            "relative effect interval computed per draw as ratio of sums minus one",
            "slab information matrix: (1/T) * (0.5 * X'X + 0.5 * diag(X'X)), prior mean 0",
            "prior inclusion probability min(1, expected model size / number of covariates incl. intercept)",
            "intervention (accession) year counted in the post period",
            "tail probability uses +1 smoothing; values below 0.001 print as \"< 0.001\""};
}

std::string format_p(double p) {
    if (p < 0.001) return "< 0.001";
    return fmt("%.3f", p);
}

std::string render(const AnalysisResult& r, OutputFormat format) {
    switch (format) {
        case OutputFormat::Json: {
            json doc{{"metadata", metadata_json()}, {"config", config_json(r.config)}, {"results", json::array({result_json(r)})}};
            return doc.dump(2) + "\n";
        }
        case OutputFormat::Csv:
            return csv_header() + csv_rows(r, r.config.target);
        default:
            return single_text(r);
    }
}

std::string render(const BatchResult& b, const AnalysisConfig& base, OutputFormat format) {
    switch (format) {
        case OutputFormat::Json: {
            json results = json::array(), failures = json::array();
            for (const auto& e : b.entries) {
                if (e.result) results.push_back(result_json(*e.result));
                else failures.push_back(failure_json(e));
            }
            json doc{{"metadata", metadata_json()}, {"config", config_json(base)}, {"results", results}};
            if (b.aggregate) {
                if (b.aggregate->result) doc["aggregate"] = result_json(*b.aggregate->result);
                else failures.push_back(failure_json(*b.aggregate));
            }
            doc["failures"] = failures;
            return doc.dump(2) + "\n";
        }
        case OutputFormat::Csv: {
            std::string out = csv_header();
            for (const auto& e : b.entries)
                if (e.result) out += csv_rows(*e.result, e.country);
            if (b.aggregate && b.aggregate->result) out += csv_rows(*b.aggregate->result, b.aggregate->country);
            return out;
        }
        default: {
            std::ostringstream os;
            os << "Summaries of causal impact analysis (sorted by p)\n\n" << table_header(base.level);
            for (const auto& e : b.entries)
                if (e.result) os << table_rows(*e.result, e.country);
            if (b.aggregate && b.aggregate->result) {
                os << std::string(kNameWidth + 5 + 4 * kNum + 3 * kPct + 9, '-') << '\n';
                os << table_rows(*b.aggregate->result, b.aggregate->country);
            }
            os << '\n';
            for (const auto& e : b.entries)
                if (e.result)
                    os << pad_right(e.country, kNameWidth) << "intervention " << e.intervention_year << ": "
                       << verdict(*e.result) << '\n';
            if (b.aggregate && b.aggregate->result)
                os << pad_right(b.aggregate->country, kNameWidth) << "intervention " << b.aggregate->intervention_year
                   << ": " << verdict(*b.aggregate->result) << '\n';
            bool header = false;
            auto fail_line = [&](const BatchEntry& e) {
                if (!header) os << "\nFailed analyses:\n";
                header = true;
                os << "  " << e.country << ": " << e.error << '\n';
            };
            for (const auto& e : b.entries)
                if (!e.result) fail_line(e);
            if (b.aggregate && !b.aggregate->result) fail_line(*b.aggregate);
            os << '\n' << settings_text(base);
            return os.str();
        }
    }
}

std::string render(const DescriptiveSummary& s, OutputFormat format) {
    switch (format) {
        case OutputFormat::Json: {
            json countries = json::array();
            for (const auto& c : s.countries)
                countries.push_back(json{{"country", c.country},
                                         {"intervention_year", c.intervention_year},
                                         {"sum_before", c.sum_before},
                                         {"sum_after", c.sum_after},
                                         {"pct_change", c.pct_change ? json(*c.pct_change) : json(nullptr)}});
            json groups = json::array();
            for (const auto& g : s.groups) groups.push_back(json{{"group", g.name}, {"total", g.total}, {"share_pct", g.share_pct}});
            json doc{{"metadata", metadata_json()}, {"countries", countries}, {"groups", groups}, {"grand_total", s.grand_total}};
            return doc.dump(2) + "\n";
        }
        case OutputFormat::Csv: {
            std::ostringstream os;
            os << "country,intervention_year,sum_before,sum_after,pct_change\n";
            for (const auto& c : s.countries)
                os << c.country << ',' << c.intervention_year << ',' << fmt("%.17g", c.sum_before) << ','
                   << fmt("%.17g", c.sum_after) << ',' << (c.pct_change ? fmt("%.17g", *c.pct_change) : "n/a")
                   << '\n';
            return os.str();
        }
        default: {
            std::ostringstream os;
            os << pad_right("Country", kNameWidth) << pad_left("Split", 6) << pad_left("Before", 14)
               << pad_left("After", 14) << pad_left("Change", 10) << '\n';
            for (const auto& c : s.countries)
                os << pad_right(c.country, kNameWidth) << pad_left(std::to_string(c.intervention_year), 6)
                   << pad_left(grouped(c.sum_before), 14) << pad_left(grouped(c.sum_after), 14)
                   << pad_left(c.pct_change ? fmt("%+.1f%%", *c.pct_change) : "n/a", 10) << '\n';
            if (!s.groups.empty()) {
                os << "\nGroup shares of all patents:";
                for (std::size_t i = 0; i < s.groups.size(); ++i)
                    os << (i ? " / " : " ") << s.groups[i].name << ": " << fmt("%.2f", s.groups[i].share_pct) << "% ("
                       << grouped(s.groups[i].total) << ")";
                os << '\n';
            }
            return os.str();
        }
    }
}

}  // namespace impactor::report
