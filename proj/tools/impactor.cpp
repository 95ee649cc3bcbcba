// impactor: Bayesian structural time-series causal impact for country patent panels.
//
//   impactor analyze   --data patents.csv --target PL --intervention 2004 --seed 42
//   impactor batch     --data patents.csv --jobs 4
//   impactor describe  --data patents.csv
//   impactor plot-data --data patents.csv --target PL --intervention 2004 --output plots/

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "impactor/analysis.hpp"
#include "impactor/error.hpp"
#include "impactor/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPartialBatch = 4;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::map<std::string, impactor::Year> parse_batch_spec(const std::string& s) {
    std::map<std::string, impactor::Year> out;
    for (const auto& item : split_list(s)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw impactor::ValidationError("cli: batch entry '" + item + "' must look like CODE=YEAR");
        try {
            out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw impactor::ValidationError("cli: invalid year in batch entry '" + item + "'");
        }
    }
    return out;
}

impactor::OutputFormat parse_format(const std::string& s) {
    if (s == "text") return impactor::OutputFormat::Text;
    if (s == "json") return impactor::OutputFormat::Json;
    if (s == "csv") return impactor::OutputFormat::Csv;
    throw impactor::ValidationError("cli: unknown format '" + s + "' (expected text, json or csv)");
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw impactor::ValidationError("cli: cannot write '" + path + "'");
    out << text;
}

struct Options {
    std::string data;
    std::string target;
    std::string covariates;
    int intervention = 0;
    std::size_t draws = 20000;
    std::size_t burnin = 2000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    bool seed_given = false;
    double level = 0.95;
    std::string format = "text";
    std::string output;
    unsigned jobs = 1;
    unsigned chains = 1;
    impactor::PriorOverrides priors;
    std::string batch_spec;
    std::string aggregate_name = "EU-13";
    bool no_aggregate = false;
    int reference_year = 2004;
};

void add_data(CLI::App* app, Options& o) {
    app->add_option("--data", o.data, "Wide CSV: year column plus one column per country")->required();
    app->add_option("--format", o.format, "Output format: text, json or csv")->capture_default_str();
    app->add_option("--output", o.output, "Output file (directory for plot-data)");
}

void add_model(CLI::App* app, Options& o, bool single) {
    if (single) {
        app->add_option("--target", o.target, "Country code of the treated series")->required();
        app->add_option("--intervention", o.intervention, "First treated year")->required();
    }
    app->add_option("--covariates", o.covariates, "Comma-separated control countries (default: EU-15)");
    app->add_option("--draws", o.draws, "Total MCMC iterations")->capture_default_str();
    app->add_option("--burnin", o.burnin, "Discarded initial iterations")->capture_default_str();
    app->add_option("--thin", o.thin, "Keep every n-th draw after burn-in")->capture_default_str();
    app->add_option("--seed", o.seed, "Random seed (falls back to IMPACTOR_SEED)");
    app->add_option("--level", o.level, "Credible level of reported intervals")->capture_default_str();
    app->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
    app->add_option("--chains", o.chains, "Independent chains pooled into one posterior")->capture_default_str();
    app->add_option("--nu-level", o.priors.nu_level, "Level-scale prior degrees of freedom")->capture_default_str();
    app->add_option("--level-scale-factor", o.priors.level_scale_factor, "Level-scale prior guess / sd(y)")
        ->capture_default_str();
    app->add_option("--level-bound-factor", o.priors.level_bound_factor, "Level-scale upper bound / sd(y)")
        ->capture_default_str();
    app->add_option("--expected-model-size", o.priors.expected_model_size, "Prior expected number of covariates")
        ->capture_default_str();
    app->add_option("--expected-r2", o.priors.expected_r2, "Prior expected R^2")->capture_default_str();
    app->add_option("--nu-obs", o.priors.nu_obs, "Observation-variance prior degrees of freedom")->capture_default_str();
    app->add_flag("--always-include-intercept", o.priors.always_include_intercept,
                  "Exclude the intercept from variable selection");
}

impactor::AnalysisConfig make_config(const Options& o) {
    impactor::AnalysisConfig c;
    c.data_path = o.data;
    c.target = o.target;
    if (!o.covariates.empty()) c.covariates = split_list(o.covariates);
    c.intervention_year = o.intervention;
    c.mcmc.total_draws = o.draws;
    c.mcmc.burn_in = o.burnin;
    c.mcmc.thinning = o.thin;
    c.mcmc.seed = o.seed;
    c.priors = o.priors;
    c.format = parse_format(o.format);
    c.output_path = o.output;
    c.level = o.level;
    c.chains = o.chains;
    c.threads = o.jobs;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian structural time-series causal impact analysis"};
    app.require_subcommand(1);
    Options o;

    auto* analyze = app.add_subcommand("analyze", "Analyse one target country");
    add_data(analyze, o);
    add_model(analyze, o, true);

    auto* batch = app.add_subcommand("batch", "Analyse several countries and their aggregate");
    add_data(batch, o);
    add_model(batch, o, false);
    batch->add_option("--countries", o.batch_spec, "CODE=YEAR list (default: EU-13 accession years)");
    batch->add_option("--aggregate-name", o.aggregate_name, "Name of the summed aggregate series")->capture_default_str();
    batch->add_flag("--no-aggregate", o.no_aggregate, "Skip the aggregate analysis");

    auto* describe = app.add_subcommand("describe", "Before/after totals and group shares");
    add_data(describe, o);
    describe->add_option("--reference-year", o.reference_year, "Split year for countries without an accession year")
        ->capture_default_str();

    auto* plot = app.add_subcommand("plot-data", "Write original/pointwise/cumulative CSVs for plotting");
    add_data(plot, o);
    add_model(plot, o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    const bool seed_flag = [&] {
        for (auto* sub : {analyze, batch, plot})
            if (sub->parsed() && sub->count("--seed") > 0) return true;
        return false;
    }();
    if (!seed_flag) {
        if (const char* env = std::getenv("IMPACTOR_SEED")) {
            try {
                o.seed = std::stoull(env);
            } catch (const std::exception&) {
                std::cerr << "error: IMPACTOR_SEED must be a non-negative integer\n";
                return kExitValidation;
            }
        }
    }

    try {
        const impactor::PatentPanel panel = impactor::load_panel_file(o.data);
        if (describe->parsed()) {
            const auto summary = impactor::describe(panel, impactor::default_describe_years(panel, o.reference_year),
                                                    impactor::default_groups(panel));
            write_output(impactor::report::render(summary, parse_format(o.format)), o.output);
            return kExitOk;
        }
        const impactor::AnalysisConfig config = make_config(o);
        if (analyze->parsed()) {
            const auto result = impactor::analyze(panel, config);
            write_output(impactor::report::render(result, config.format), o.output);
            return kExitOk;
        }
        if (plot->parsed()) {
            if (o.output.empty()) throw impactor::ValidationError("cli: plot-data requires --output <directory>");
            const auto result = impactor::analyze(panel, config);
            impactor::emit_plot_data(result, o.output);
            std::cout << "wrote original.csv, pointwise.csv, cumulative.csv, metadata.json to " << o.output << '\n';
            return kExitOk;
        }
        impactor::BatchSpec spec;
        if (!o.batch_spec.empty()) spec.intervention_by_country = parse_batch_spec(o.batch_spec);
        spec.aggregate_name = o.aggregate_name;
        spec.include_aggregate = !o.no_aggregate;
        const auto result = impactor::batch(panel, spec, config, o.jobs);
        write_output(impactor::report::render(result, config, config.format), o.output);
        if (result.any_failed()) {
            for (const auto& e : result.entries)
                if (!e.result) std::cerr << "error: " << e.country << ": " << e.error << '\n';
            if (result.aggregate && !result.aggregate->result)
                std::cerr << "error: " << result.aggregate->country << ": " << result.aggregate->error << '\n';
            return kExitPartialBatch;
        }
        return kExitOk;
    } catch (const impactor::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const impactor::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
