#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impactor/impact.hpp"
#include "impactor/panel.hpp"
#include "impactor/priors.hpp"
#include "impactor/sampler.hpp"

namespace impactor {

/// Old member states used as control series by default.
extern const std::vector<std::string> kEu15;

/// Accession years of the thirteen new member states.
extern const std::map<std::string, Year> kEu13Accession;

enum class OutputFormat { Text, Json, Csv };

struct AnalysisConfig {
    std::string data_path;
    std::string target;
    std::vector<std::string> covariates = kEu15;
    Year intervention_year = 0;
    McmcConfig mcmc;
    PriorOverrides priors;
    OutputFormat format = OutputFormat::Text;
    std::string output_path;
    double level = 0.95;
    unsigned chains = 1;
    unsigned threads = 1;
};

struct AnalysisResult {
    AnalysisConfig config;
    PeriodSplit split;
    std::vector<std::string> covariate_names;  // column order of the design, intercept first
    PriorSet priors;                            // on the standardised scale
    double response_offset = 0.0;
    double response_scale = 1.0;
    PosteriorDraws draws;
    std::vector<double> inclusion;
    ChainDiagnostics diagnostics{};
    std::vector<double> observed_post;
    ImpactSummary summary;
    ImpactSeries series;

    [[nodiscard]] bool significant() const { return summary.cumulative.p < 0.05; }
};

inline constexpr const char* kInterceptName = "(intercept)";

/// panel -> standardise -> priors -> Gibbs -> counterfactual -> summary for one target series.
[[nodiscard]] AnalysisResult analyze(const PatentPanel& panel, const AnalysisConfig& config);

struct BatchSpec {
    std::map<std::string, Year> intervention_by_country = kEu13Accession;
    std::string aggregate_name = "EU-13";
    bool include_aggregate = true;
};

struct BatchEntry {
    std::string country;
    Year intervention_year = 0;
    std::optional<AnalysisResult> result;
    std::string error;
    int error_code = 0;  // 2 validation, 3 numeric
};

struct BatchResult {
    std::vector<BatchEntry> entries;  // successes sorted by p ascending, failures last
    std::optional<BatchEntry> aggregate;

    [[nodiscard]] bool any_failed() const;
};

/**
 * Analyse every country of `spec` independently (up to `jobs` at a time),
 * plus the summed aggregate of all listed countries with the earliest
 * intervention year. A failure is recorded on its entry and does not stop
 * the remaining countries. Country i (in code order) uses a seed derived
 * from (base seed, i), so output does not depend on `jobs`.
 */
[[nodiscard]] BatchResult batch(const PatentPanel& panel, const BatchSpec& spec, const AnalysisConfig& base,
                                unsigned jobs = 1);

/// Before/after table, rows sorted by after-sum descending.
[[nodiscard]] DescriptiveSummary describe(const PatentPanel& panel,
                                          const std::map<std::string, Year>& intervention_by_country,
                                          const std::map<std::string, std::vector<std::string>>& groups);

/// Intervention years for describe(): accession years for EU-13, `reference_year` for everyone else.
[[nodiscard]] std::map<std::string, Year> default_describe_years(const PatentPanel& panel, Year reference_year = 2004);

/// Default groups (EU-15 and EU-13), restricted to codes present in `panel`.
[[nodiscard]] std::map<std::string, std::vector<std::string>> default_groups(const PatentPanel& panel);

/// Writes original.csv, pointwise.csv, cumulative.csv and metadata.json into `dir`.
void emit_plot_data(const AnalysisResult& result, const std::filesystem::path& dir);

}  // namespace impactor
