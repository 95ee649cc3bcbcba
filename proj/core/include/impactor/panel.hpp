#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace impactor {

using Year = int;

/**
 * Year-indexed table of per-country patent counts.
 *
 * Invariants (checked at construction): years are consecutive, country codes
 * are unique, every cell is finite and non-negative. Fractional counts are
 * allowed. Immutable once built, so it can be shared freely between analyses.
 */
class PatentPanel {
public:
    PatentPanel(Year first_year, std::vector<std::string> countries, Eigen::MatrixXd values);

    [[nodiscard]] Year first_year() const { return first_year_; }
    [[nodiscard]] Year last_year() const { return first_year_ + static_cast<Year>(values_.rows()) - 1; }
    [[nodiscard]] std::size_t year_count() const { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::vector<Year> years() const;
    [[nodiscard]] const std::vector<std::string>& countries() const { return countries_; }
    [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }

    [[nodiscard]] bool has_country(const std::string& code) const;
    [[nodiscard]] std::size_t column(const std::string& code) const;  // throws ValidationError
    [[nodiscard]] std::size_t row(Year year) const;                   // throws ValidationError
    [[nodiscard]] double value(Year year, const std::string& code) const;
    [[nodiscard]] std::vector<double> series(const std::string& code) const;

private:
    Year first_year_;
    std::vector<std::string> countries_;
    Eigen::MatrixXd values_;  // year x country
};

/// Pre/post partition of a panel's years. The intervention year is treated (post).
struct PeriodSplit {
    Year intervention_year;
    std::vector<Year> pre_years;
    std::vector<Year> post_years;
};

/// Minimum number of pre-intervention years a split must leave.
inline constexpr std::size_t kMinPreYears = 3;

/// Parse wide CSV: header `year,<code>,...`, one row per year.
[[nodiscard]] PatentPanel load_panel(std::istream& in);
[[nodiscard]] PatentPanel load_panel_file(const std::string& path);

/// Inverse of load_panel; values written with 17 significant digits.
void save_panel(const PatentPanel& panel, std::ostream& out);

[[nodiscard]] PeriodSplit split_periods(const PatentPanel& panel, Year intervention_year);

/// Returns a copy of `panel` with an extra column `name` holding the yearly sum over `members`.
[[nodiscard]] PatentPanel aggregate_group(const PatentPanel& panel, const std::set<std::string>& members,
                                          const std::string& name);

struct CountryChange {
    std::string country;
    Year intervention_year;
    double sum_before;
    double sum_after;
    std::optional<double> pct_change;  // empty when sum_before == 0
};

struct GroupShare {
    std::string name;
    double total;
    double share_pct;
};

struct DescriptiveSummary {
    std::vector<CountryChange> countries;
    std::vector<GroupShare> groups;
    double grand_total;
};

/// Before/after sums per country and whole-period group totals with their shares of the grand total.
[[nodiscard]] DescriptiveSummary describe_change(const PatentPanel& panel,
                                                 const std::map<std::string, Year>& intervention_by_country,
                                                 const std::map<std::string, std::vector<std::string>>& groups);

struct Standardized {
    std::vector<double> values;
    double offset;
    double scale;

    [[nodiscard]] double restore(double z) const { return offset + scale * z; }
};

/// Centre and scale `series` by the mean and sample sd of series[ref_begin, ref_end).
[[nodiscard]] Standardized standardize(std::span<const double> series, std::size_t ref_begin, std::size_t ref_end);

}  // namespace impactor
