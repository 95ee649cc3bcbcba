#include "impactor/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "impactor/error.hpp"
#include "impactor/stats.hpp"

namespace impactor {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw ValidationError("panel: " + what);
}

std::string trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_real(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<long> parse_year(const std::string& s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

PatentPanel::PatentPanel(Year first_year, std::vector<std::string> countries, Eigen::MatrixXd values)
    : first_year_(first_year), countries_(std::move(countries)), values_(std::move(values)) {
    if (values_.rows() == 0) fail("panel has no years");
    if (static_cast<std::size_t>(values_.cols()) != countries_.size()) fail("column count does not match country list");
    std::unordered_set<std::string> seen;
    for (const auto& c : countries_) {
        if (c.empty()) fail("empty country code");
        if (!seen.insert(c).second) fail("duplicate country column '" + c + "'");
    }
    for (Eigen::Index r = 0; r < values_.rows(); ++r)
        for (Eigen::Index c = 0; c < values_.cols(); ++c) {
            const double v = values_(r, c);
            if (!std::isfinite(v) || v < 0.0)
                fail("cell (" + std::to_string(first_year_ + r) + ", " + countries_[c] + ") must be finite and >= 0");
        }
}

std::vector<Year> PatentPanel::years() const {
    std::vector<Year> out(year_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = first_year_ + static_cast<Year>(i);
    return out;
}

bool PatentPanel::has_country(const std::string& code) const {
    return std::find(countries_.begin(), countries_.end(), code) != countries_.end();
}

std::size_t PatentPanel::column(const std::string& code) const {
    auto it = std::find(countries_.begin(), countries_.end(), code);
    if (it == countries_.end()) fail("unknown country code '" + code + "'");
    return static_cast<std::size_t>(it - countries_.begin());
}

std::size_t PatentPanel::row(Year year) const {
    if (year < first_year() || year > last_year())
        fail("year " + std::to_string(year) + " outside panel range " + std::to_string(first_year()) + "-" +
             std::to_string(last_year()));
    return static_cast<std::size_t>(year - first_year_);
}

double PatentPanel::value(Year year, const std::string& code) const {
    return values_(static_cast<Eigen::Index>(row(year)), static_cast<Eigen::Index>(column(code)));
}

std::vector<double> PatentPanel::series(const std::string& code) const {
    const auto c = static_cast<Eigen::Index>(column(code));
    std::vector<double> out(year_count());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = values_(static_cast<Eigen::Index>(r), c);
    return out;
}

PatentPanel load_panel(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    // Skip leading blank lines; a UTF-8 BOM on the header is tolerated.
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_fields(trim(line));
            break;
        }
    }
    if (header.empty()) fail("empty file");
    if (header.front() != "year") fail("row " + std::to_string(line_no) + ": first header cell must be 'year'");
    std::vector<std::string> countries(header.begin() + 1, header.end());
    if (countries.empty()) fail("row " + std::to_string(line_no) + ": no country columns");
    {
        std::unordered_set<std::string> seen;
        for (std::size_t c = 0; c < countries.size(); ++c) {
            if (countries[c].empty()) fail("row " + std::to_string(line_no) + ", column " + std::to_string(c + 2) + ": empty country code");
            if (!seen.insert(countries[c]).second)
                fail("row " + std::to_string(line_no) + ": duplicate country column '" + countries[c] + "'");
        }
    }

    std::vector<long> years;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto fields = split_fields(t);
        const std::string where = "row " + std::to_string(line_no);
        if (fields.size() != header.size())
            fail(where + ": expected " + std::to_string(header.size()) + " cells, found " + std::to_string(fields.size()));
        const auto year = parse_year(fields[0]);
        if (!year) fail(where + ", column year: invalid year '" + fields[0] + "'");
        if (!years.empty() && *year != years.back() + 1)
            fail(where + ": non-consecutive years (" + std::to_string(years.back()) + " followed by " +
                 std::to_string(*year) + ")");
        std::vector<double> values(countries.size());
        for (std::size_t c = 0; c < countries.size(); ++c) {
            const auto v = parse_real(fields[c + 1]);
            if (!v) {
                fail(where + ", column " + countries[c] + ": " +
                     (fields[c + 1].empty() ? std::string("missing value") : "non-numeric value '" + fields[c + 1] + "'"));
            }
            if (!std::isfinite(*v) || *v < 0.0)
                fail(where + ", column " + countries[c] + ": value must be finite and >= 0");
            values[c] = *v;
        }
        years.push_back(*year);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) fail("empty file: no data rows");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(countries.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < countries.size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return PatentPanel(static_cast<Year>(years.front()), std::move(countries), std::move(m));
}

PatentPanel load_panel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    return load_panel(in);
}

void save_panel(const PatentPanel& panel, std::ostream& out) {
    out << "year";
    for (const auto& c : panel.countries()) out << ',' << c;
    out << '\n';
    const auto& v = panel.values();
    char buf[64];
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        out << panel.first_year() + static_cast<Year>(r);
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", v(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

PeriodSplit split_periods(const PatentPanel& panel, Year intervention_year) {
    if (intervention_year <= panel.first_year() || intervention_year > panel.last_year())
        fail("intervention year " + std::to_string(intervention_year) + " outside panel range " +
             std::to_string(panel.first_year()) + "-" + std::to_string(panel.last_year()));
    PeriodSplit split{intervention_year, {}, {}};
    for (Year y : panel.years()) (y < intervention_year ? split.pre_years : split.post_years).push_back(y);
    if (split.pre_years.size() < kMinPreYears)
        fail("intervention year " + std::to_string(intervention_year) + " leaves only " +
             std::to_string(split.pre_years.size()) + " pre-period years (need " + std::to_string(kMinPreYears) + ")");
    return split;
}

PatentPanel aggregate_group(const PatentPanel& panel, const std::set<std::string>& members, const std::string& name) {
    if (members.empty()) fail("aggregate '" + name + "' has no members");
    if (panel.has_country(name)) fail("aggregate name '" + name + "' collides with an existing column");
    Eigen::VectorXd total = Eigen::VectorXd::Zero(panel.values().rows());
    for (const auto& m : members) total += panel.values().col(static_cast<Eigen::Index>(panel.column(m)));
    Eigen::MatrixXd values(panel.values().rows(), panel.values().cols() + 1);
    values << panel.values(), total;
    auto countries = panel.countries();
    countries.push_back(name);
    return PatentPanel(panel.first_year(), std::move(countries), std::move(values));
}

DescriptiveSummary describe_change(const PatentPanel& panel, const std::map<std::string, Year>& intervention_by_country,
                                   const std::map<std::string, std::vector<std::string>>& groups) {
    DescriptiveSummary out{};
    for (const auto& [code, year] : intervention_by_country) {
        const auto split = split_periods(panel, year);
        const auto col = static_cast<Eigen::Index>(panel.column(code));
        const auto n_pre = static_cast<Eigen::Index>(split.pre_years.size());
        const auto n_post = static_cast<Eigen::Index>(split.post_years.size());
        CountryChange row{code, year, panel.values().col(col).head(n_pre).sum(),
                          panel.values().col(col).tail(n_post).sum(), std::nullopt};
        if (row.sum_before != 0.0) row.pct_change = 100.0 * (row.sum_after - row.sum_before) / row.sum_before;
        out.countries.push_back(std::move(row));
    }
    for (const auto& [name, members] : groups) {
        double total = 0.0;
        for (const auto& m : members) total += panel.values().col(static_cast<Eigen::Index>(panel.column(m))).sum();
        out.groups.push_back({name, total, 0.0});
        out.grand_total += total;
    }
    if (!out.groups.empty()) {
        if (out.grand_total <= 0.0) fail("group totals sum to zero; shares undefined");
        for (auto& g : out.groups) g.share_pct = 100.0 * g.total / out.grand_total;
    }
    return out;
}

Standardized standardize(std::span<const double> series, std::size_t ref_begin, std::size_t ref_end) {
    if (ref_end > series.size() || ref_begin >= ref_end || ref_end - ref_begin < 2)
        fail("standardize: reference range needs at least 2 elements inside the series");
    const auto ref = series.subspan(ref_begin, ref_end - ref_begin);
    const double offset = stats::mean(ref);
    const double scale = stats::sample_sd(ref);
    if (!std::isfinite(scale) || scale <= 1e-14 * std::max(1.0, std::abs(offset))) fail("standardize: zero variance on reference range");
    Standardized out{std::vector<double>(series.size()), offset, scale};
    for (std::size_t i = 0; i < series.size(); ++i) out.values[i] = (series[i] - offset) / scale;
    return out;
}

}  // namespace impactor
