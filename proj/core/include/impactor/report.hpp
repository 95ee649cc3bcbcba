#pragma once

#include <string>
#include <vector>

#include "impactor/analysis.hpp"

namespace impactor::report {

/// Tool version embedded in every report.
[[nodiscard]] std::string version();

/// Modelling defaults this tool picks on its own; listed in every report.
[[nodiscard]] std::vector<std::string> disclaimers();

/// "< 0.001" below one in a thousand, otherwise three decimals.
[[nodiscard]] std::string format_p(double p);

[[nodiscard]] std::string render(const AnalysisResult& result, OutputFormat format);
[[nodiscard]] std::string render(const BatchResult& result, const AnalysisConfig& base, OutputFormat format);
[[nodiscard]] std::string render(const DescriptiveSummary& summary, OutputFormat format);

}  // namespace impactor::report
