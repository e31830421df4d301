#pragma once

///
/// \file ingest.hpp
///
/// CSV interchange formats:
///
///   distributions.csv   year,threshold,tail_fraction
///   intervals.csv       year,lower_bound,share
///   macro.csv           year,population,gdp
///
/// Decimal numbers with '.' radix and no thousands separators. Rows may
/// appear in any order; output is grouped and sorted by year. Income is
/// nominal currency throughout. Tail fractions are whatever population the
/// user tabulated (persons or tax returns); nothing here distinguishes them.
///

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sizedep/errors.hpp"

namespace sizedep {

struct TailPoint {
    double threshold;     ///< income level, > 0
    double tail_fraction; ///< fraction of units with income above threshold, in (0, 1]

    friend bool operator==(const TailPoint&, const TailPoint&) = default;
};

/// One year of income data as a decreasing tail curve.
struct BinnedDistribution {
    int year = 0;
    std::vector<TailPoint> points;

    friend bool operator==(const BinnedDistribution&, const BinnedDistribution&) = default;
};

struct YearRecord {
    int year = 0;
    double population = 0.0;
    double gdp = 0.0;

    friend bool operator==(const YearRecord&, const YearRecord&) = default;
};

struct IntervalShare {
    double lower_bound; ///< the interval is [lower_bound, next lower_bound), the last is open
    double share;       ///< fraction of units in the interval
};

/// Number formatting used by every writer: 12 significant digits.
inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Rounds v to what format_number would write.
inline double canonical(double v)
{
    return std::strtod(format_number(v).c_str(), nullptr);
}

/// Throws invariant_error unless thresholds are strictly increasing and
/// positive and tail fractions are strictly decreasing within (0, 1].
inline void validate(const BinnedDistribution& d)
{
    auto fail = [&](std::size_t i, const std::string& why) {
        const auto& p = d.points[i];
        throw invariant_error("year " + std::to_string(d.year) + ": point (" +
                              format_number(p.threshold) + ", " +
                              format_number(p.tail_fraction) + ") " + why);
    };
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        const auto& p = d.points[i];
        if (!std::isfinite(p.threshold) || !(p.threshold > 0.0))
            fail(i, "has a non-positive threshold");
        if (!std::isfinite(p.tail_fraction) || !(p.tail_fraction > 0.0) || p.tail_fraction > 1.0)
            fail(i, "has a tail fraction outside (0, 1]");
        if (i > 0) {
            if (!(p.threshold > d.points[i - 1].threshold))
                fail(i, "does not have a strictly increasing threshold");
            if (!(p.tail_fraction < d.points[i - 1].tail_fraction))
                fail(i, "does not have a strictly decreasing tail fraction");
        }
    }
}

inline void validate(const YearRecord& r)
{
    if (!std::isfinite(r.population) || !(r.population > 0.0))
        throw invariant_error("year " + std::to_string(r.year) + ": population must be > 0");
    if (!std::isfinite(r.gdp) || !(r.gdp > 0.0))
        throw invariant_error("year " + std::to_string(r.year) + ": gdp must be > 0");
}

/// Converts interval shares to tail points.
///
/// tail_i = sum_{j >= i} share_j / sum_j share_j, so the first tail is exactly
/// one. Points with tail one carry no shape information and are dropped, as
/// are zero tails. Empty intervals produce equal tails; only the lowest
/// threshold of such a run is kept.
inline std::vector<TailPoint> interval_shares_to_tail(std::span<const IntervalShare> intervals)
{
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (!std::isfinite(iv.share) || iv.share < 0.0)
            throw invariant_error("interval " + std::to_string(i) + ": share must be >= 0");
        if (!std::isfinite(iv.lower_bound))
            throw invariant_error("interval " + std::to_string(i) + ": non-finite bound");
        if (i > 0 && !(iv.lower_bound > intervals[i - 1].lower_bound))
            throw invariant_error("interval bounds must be strictly increasing (at " +
                                  format_number(iv.lower_bound) + ")");
    }
    if (intervals.empty())
        return {};

    std::vector<double> suffix(intervals.size());
    double running = 0.0;
    for (std::size_t i = intervals.size(); i-- > 0;) {
        running += intervals[i].share;
        suffix[i] = running;
    }
    const double total = suffix.front();
    if (total < 0.99 || total > 1.01)
        throw invariant_error("interval shares sum to " + format_number(total) +
                              ", outside [0.99, 1.01]");

    std::vector<TailPoint> out;
    for (std::size_t i = 1; i < intervals.size(); ++i) {
        const double tail = suffix[i] / total;
        if (tail >= 1.0 || !(tail > 0.0))
            continue;
        if (!out.empty() && !(tail < out.back().tail_fraction))
            continue;
        if (!(intervals[i].lower_bound > 0.0))
            throw invariant_error("interval bound " + format_number(intervals[i].lower_bound) +
                                  " with tail fraction below one must be > 0");
        out.push_back({intervals[i].lower_bound, tail});
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

/// Reads a three-column CSV with the given header, invoking `row` with the
/// 1-based line number and the three fields of every data row.
template <class Row>
void read_csv3(std::istream& in, std::string_view source, std::string_view header, Row&& row)
{
    const std::string src(source);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF"))
            view.remove_prefix(3);
        view = trim(view);
        if (view.empty())
            continue;
        if (!have_header) {
            auto fields = split_fields(view);
            std::string joined;
            for (std::size_t i = 0; i < fields.size(); ++i)
                joined += (i ? "," : "") + std::string(fields[i]);
            if (joined != header)
                throw parse_error(src, line_no,
                                  "expected header '" + std::string(header) + "', got '" +
                                      std::string(view) + "'");
            have_header = true;
            continue;
        }
        auto fields = split_fields(view);
        if (fields.size() != 3)
            throw parse_error(src, line_no,
                              "expected 3 fields, got " + std::to_string(fields.size()));
        row(line_no, fields);
        ++rows;
    }
    if (!have_header || rows == 0)
        throw parse_error(src, line_no, "empty input");
}

inline double parse_real(std::string_view field, const std::string& source, std::size_t line,
                         const char* what)
{
    double v = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw parse_error(source, line,
                          std::string("invalid ") + what + " '" + std::string(field) + "'");
    return v;
}

inline int parse_year(std::string_view field, const std::string& source, std::size_t line)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw parse_error(source, line, "invalid year '" + std::string(field) + "'");
    return v;
}

} // namespace detail

/// Parses distributions.csv into one validated distribution per year.
inline std::vector<BinnedDistribution> parse_distribution_csv(std::istream& in,
                                                              std::string_view source = "<input>")
{
    const std::string src(source);
    struct Row {
        TailPoint point;
        std::size_t line;
    };
    std::map<int, std::vector<Row>> by_year;
    detail::read_csv3(in, source, "year,threshold,tail_fraction",
                      [&](std::size_t line, const auto& f) {
                          const int year = detail::parse_year(f[0], src, line);
                          const double x = detail::parse_real(f[1], src, line, "threshold");
                          const double c = detail::parse_real(f[2], src, line, "tail_fraction");
                          by_year[year].push_back({{x, c}, line});
                      });

    std::vector<BinnedDistribution> out;
    for (auto& [year, rows] : by_year) {
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return a.point.threshold < b.point.threshold;
        });
        BinnedDistribution d{year, {}};
        for (const auto& r : rows)
            d.points.push_back(r.point);
        try {
            validate(d);
        } catch (const invariant_error& e) {
            // Report the line of the first offending row.
            for (std::size_t i = 0; i < rows.size(); ++i) {
                BinnedDistribution prefix{year, {d.points.begin(), d.points.begin() + i + 1}};
                try {
                    validate(prefix);
                } catch (const invariant_error&) {
                    throw parse_error(src, rows[i].line, e.what());
                }
            }
            throw;
        }
        out.push_back(std::move(d));
    }
    return out;
}

/// Parses intervals.csv and converts each year to tail points.
inline std::vector<BinnedDistribution> parse_intervals_csv(std::istream& in,
                                                           std::string_view source = "<input>")
{
    const std::string src(source);
    std::map<int, std::vector<std::pair<IntervalShare, std::size_t>>> by_year;
    detail::read_csv3(in, source, "year,lower_bound,share", [&](std::size_t line, const auto& f) {
        const int year = detail::parse_year(f[0], src, line);
        const double lb = detail::parse_real(f[1], src, line, "lower_bound");
        const double share = detail::parse_real(f[2], src, line, "share");
        by_year[year].push_back({{lb, share}, line});
    });

    std::vector<BinnedDistribution> out;
    for (auto& [year, rows] : by_year) {
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.first.lower_bound < b.first.lower_bound;
        });
        std::vector<IntervalShare> intervals;
        for (const auto& r : rows)
            intervals.push_back(r.first);
        try {
            BinnedDistribution d{year, interval_shares_to_tail(intervals)};
            validate(d);
            out.push_back(std::move(d));
        } catch (const invariant_error& e) {
            throw parse_error(src, rows.front().second,
                              "year " + std::to_string(year) + ": " + e.what());
        }
    }
    return out;
}

/// Parses macro.csv into year-sorted records.
inline std::vector<YearRecord> parse_macro_csv(std::istream& in, std::string_view source = "<input>")
{
    const std::string src(source);
    std::map<int, YearRecord> by_year;
    detail::read_csv3(in, source, "year,population,gdp", [&](std::size_t line, const auto& f) {
        YearRecord r;
        r.year = detail::parse_year(f[0], src, line);
        r.population = detail::parse_real(f[1], src, line, "population");
        r.gdp = detail::parse_real(f[2], src, line, "gdp");
        try {
            validate(r);
        } catch (const invariant_error& e) {
            throw parse_error(src, line, e.what());
        }
        if (!by_year.emplace(r.year, r).second)
            throw parse_error(src, line, "duplicate year " + std::to_string(r.year));
    });
    std::vector<YearRecord> out;
    for (const auto& [year, r] : by_year)
        out.push_back(r);
    return out;
}

inline void write_distribution_csv(std::ostream& out, std::span<const BinnedDistribution> ds)
{
    out << "year,threshold,tail_fraction\n";
    for (const auto& d : ds)
        for (const auto& p : d.points)
            out << d.year << ',' << format_number(p.threshold) << ','
                << format_number(p.tail_fraction) << '\n';
}

inline void write_macro_csv(std::ostream& out, std::span<const YearRecord> records)
{
    out << "year,population,gdp\n";
    for (const auto& r : records)
        out << r.year << ',' << format_number(r.population) << ',' << format_number(r.gdp)
            << '\n';
}

} // namespace sizedep
