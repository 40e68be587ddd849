#include "gaugekit/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gaugekit/error.hpp"

namespace gaugekit {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::chrono::sys_days parse_date(std::string_view text, std::size_t row) {
    int y = 0;
    unsigned m = 0, d = 0;
    auto bad = [&] {
        return ValidationError("panel: invalid ISO-8601 date '" + std::string(text) + "'", row, std::size_t{0});
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
    auto parse_part = [&](std::string_view part, auto& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || ptr != part.data() + part.size()) throw bad();
    };
    parse_part(text.substr(0, 4), y);
    parse_part(text.substr(5, 2), m);
    parse_part(text.substr(8, 2), d);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw bad();
    return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw ComputationError("format: cannot format number");
    return std::string(buf, ptr);
}

PricePanel parse_panel(std::string_view text, const IngestOptions& options) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    if (lines.empty()) throw ValidationError("panel: empty file", std::size_t{0}, std::nullopt);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].find('\r') != std::string_view::npos) {
            throw ValidationError("panel: CR line ending found; files must use LF", r, std::nullopt);
        }
    }

    const auto header = split_fields(lines[0]);
    if (header.size() < 2) throw ValidationError("panel: header needs a date column and at least one asset", std::size_t{0}, std::nullopt);
    std::vector<std::string> labels;
    std::optional<std::size_t> cash;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string_view label = trim(header[c]);
        if (label.size() >= cash_tag.size() && label.substr(label.size() - cash_tag.size()) == cash_tag) {
            if (cash) throw ValidationError("panel: more than one column tagged #cash", std::size_t{0}, c);
            cash = c - 1;
            label = trim(label.substr(0, label.size() - cash_tag.size()));
        }
        if (label.empty()) throw ValidationError("panel: empty column label", std::size_t{0}, c);
        for (const auto& seen : labels) {
            if (seen == label) throw ValidationError("panel: duplicate column label '" + std::string(label) + "'", std::size_t{0}, c);
        }
        labels.emplace_back(label);
    }

    const std::size_t n = labels.size();
    std::vector<std::vector<double>> rows;
    std::vector<std::string> dates;
    std::optional<std::chrono::sys_days> previous, first;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) {
            if (r + 1 == lines.size()) break;
            throw ValidationError("panel: blank line", r, std::nullopt);
        }
        const auto fields = split_fields(lines[r]);
        if (fields.size() != n + 1) {
            throw ValidationError("panel: ragged row with " + std::to_string(fields.size()) + " fields, expected " +
                                      std::to_string(n + 1),
                                  r, std::nullopt);
        }
        const auto date_text = trim(fields[0]);
        const auto day = parse_date(date_text, r);
        if (previous && !(day > *previous)) {
            throw ValidationError("panel: dates must be strictly increasing", r, std::size_t{0});
        }
        if (!first) first = day;
        previous = day;
        dates.emplace_back(date_text);
        std::vector<double> values(n);
        for (std::size_t c = 1; c <= n; ++c) {
            const auto field = trim(fields[c]);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
                throw ValidationError("panel: not a number '" + std::string(field) + "'", r, c);
            }
            if (!std::isfinite(v) || !(v > 0.0)) {
                throw ValidationError("panel: nonpositive price " + std::string(field), r, c);
            }
            values[c - 1] = v;
        }
        rows.push_back(std::move(values));
    }
    if (rows.size() < 2) throw ValidationError("panel: need at least two data rows", rows.size(), std::nullopt);

    Eigen::MatrixXd prices(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < n; ++c) prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    if (options.normalize) {
        for (Eigen::Index c = 0; c < prices.cols(); ++c) {
            const double first_price = prices(0, c);  // copy: the division writes row 0 too
            prices.col(c) /= first_price;
        }
    }
    const double span_days = static_cast<double>((*previous - *first).count());
    const TimeGrid grid(0.0, span_days / static_cast<double>(rows.size() - 1) / days_per_year, rows.size() - 1);
    return PricePanel(grid, std::move(prices), std::move(labels)).with_cash_column(cash).with_dates(std::move(dates));
}

PricePanel ingest(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("panel: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_panel(buffer.str(), options);
}

std::string format_panel(const PricePanel& panel) {
    std::string out = "date";
    for (std::size_t i = 0; i < panel.n_assets(); ++i) {
        out += ',';
        out += panel.asset_ids()[i];
        if (panel.cash_column() == i) {
            out += ' ';
            out += cash_tag;
        }
    }
    out += '\n';
    const auto& prices = panel.prices();
    const std::chrono::sys_days origin{std::chrono::year{2000} / 1 / 1};
    long last_day = -1;
    for (Eigen::Index k = 0; k < prices.rows(); ++k) {
        if (!panel.dates().empty()) {
            out += panel.dates()[static_cast<std::size_t>(k)];
        } else {
            // Sub-daily grids still get strictly increasing dates.
            const auto day = std::max(last_day + 1, std::lround(panel.grid().at(static_cast<std::size_t>(k)) * days_per_year));
            last_day = day;
            out += format_date(origin + std::chrono::days{day});
        }
        for (Eigen::Index i = 0; i < prices.cols(); ++i) {
            out += ',';
            out += format_double(prices(k, i));
        }
        out += '\n';
    }
    return out;
}

void export_panel(const PricePanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("panel: cannot write " + path.string());
    out << format_panel(panel);
}

}  // namespace gaugekit
