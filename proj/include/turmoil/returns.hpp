#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "turmoil/csv.hpp"
#include "turmoil/error.hpp"

namespace turmoil {

/// Value policies for DatedSeries. Each names the series kind and validates
/// individual observations.
struct PriceKind {
    static constexpr const char* name = "price";
    static bool valid(double v) { return std::isfinite(v) && v > 0.0; }
};

/// Percentage log-returns, percent per day.
struct ReturnKind {
    static constexpr const char* name = "return";
    static bool valid(double v) { return std::isfinite(v); }
};

/// 0/1 regime indicator (the turmoil dummy).
struct IndicatorKind {
    static constexpr const char* name = "indicator";
    static bool valid(double v) { return v == 0.0 || v == 1.0; }
};

/// Immutable dated series with strictly increasing dates.
template <class Kind>
class DatedSeries {
public:
    DatedSeries() = default;

    DatedSeries(std::string ticker, std::vector<Date> dates, std::vector<double> values)
        : ticker_(std::move(ticker)), dates_(std::move(dates)), values_(std::move(values)) {
        if (dates_.size() != values_.size())
            throw Error(ErrorCode::InvalidArgument, ticker_ + ": dates/values length mismatch");
        for (std::size_t i = 1; i < dates_.size(); ++i) {
            if (dates_[i] == dates_[i - 1])
                throw Error(ErrorCode::DuplicateDate, ticker_ + ": " + format_date(dates_[i]));
            if (dates_[i] < dates_[i - 1])
                throw Error(ErrorCode::InvalidArgument, ticker_ + ": dates not increasing at " +
                                                            format_date(dates_[i]));
        }
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!Kind::valid(values_[i]))
                throw Error(ErrorCode::InvalidArgument, ticker_ + ": invalid " + Kind::name +
                                                            " on " + format_date(dates_[i]));
    }

    [[nodiscard]] const std::string& ticker() const noexcept { return ticker_; }
    [[nodiscard]] const std::vector<Date>& dates() const noexcept { return dates_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> span() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    /// Keeps the observations whose date is in the sorted `keep` set.
    [[nodiscard]] DatedSeries restricted_to(std::span<const Date> keep) const {
        std::vector<Date> d;
        std::vector<double> v;
        std::size_t j = 0;
        for (std::size_t i = 0; i < dates_.size(); ++i) {
            while (j < keep.size() && keep[j] < dates_[i]) ++j;
            if (j < keep.size() && keep[j] == dates_[i]) {
                d.push_back(dates_[i]);
                v.push_back(values_[i]);
            }
        }
        return DatedSeries(ticker_, std::move(d), std::move(v));
    }

    /// Inclusive date window; either bound may be absent.
    [[nodiscard]] DatedSeries windowed(std::optional<Date> start, std::optional<Date> end) const {
        std::vector<Date> d;
        std::vector<double> v;
        for (std::size_t i = 0; i < dates_.size(); ++i) {
            if (start && dates_[i] < *start) continue;
            if (end && dates_[i] > *end) continue;
            d.push_back(dates_[i]);
            v.push_back(values_[i]);
        }
        return DatedSeries(ticker_, std::move(d), std::move(v));
    }

    friend bool operator==(const DatedSeries&, const DatedSeries&) = default;

private:
    std::string ticker_;
    std::vector<Date> dates_;
    std::vector<double> values_;
};

using PriceSeries = DatedSeries<PriceKind>;
using ReturnSeries = DatedSeries<ReturnKind>;
using DummySeries = DatedSeries<IndicatorKind>;

struct CsvLoadOptions {
    std::string date_column = "Date";
    std::string value_column = "Close";
    std::string date_format = std::string(kIsoDateFormat);
};

struct LoadReport {
    std::string path;
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
};

template <class Kind>
struct Loaded {
    DatedSeries<Kind> series;
    LoadReport report;
};

/// Reads a dated value column. Rows whose value is missing, non-numeric or
/// invalid for `Kind` are dropped and counted; an unparseable date is a
/// malformed file. Duplicate dates are an error.
template <class Kind>
Loaded<Kind> load_series(const std::string& path, const std::string& ticker,
                         const CsvLoadOptions& options) {
    const CsvTable table = read_csv(path);
    const auto date_col = table.column(options.date_column);
    const auto value_col = table.column(options.value_column);
    if (!date_col || !value_col)
        throw Error(ErrorCode::MalformedCsv, path + ": missing column '" +
                                                 (date_col ? options.value_column
                                                           : options.date_column) +
                                                 "'");

    std::vector<std::pair<Date, double>> rows;
    LoadReport report{path, table.rows.size(), 0, 0};
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const auto date = parse_date(r[*date_col], options.date_format);
        if (!date)
            throw Error(ErrorCode::MalformedCsv, path + ":" + std::to_string(table.line_numbers[i]) +
                                                     ": bad date '" + r[*date_col] + "'");
        const auto value = parse_double(r[*value_col]);
        if (!value || !Kind::valid(*value)) {
            ++report.rows_dropped;
            continue;
        }
        rows.emplace_back(*date, *value);
    }
    if (rows.empty()) throw Error(ErrorCode::NoValidRows, path);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first)
            throw Error(ErrorCode::DuplicateDate, path + ": " + format_date(rows[i].first));

    std::vector<Date> dates;
    std::vector<double> values;
    dates.reserve(rows.size());
    values.reserve(rows.size());
    for (const auto& [d, v] : rows) {
        dates.push_back(d);
        values.push_back(v);
    }
    report.rows_kept = rows.size();
    log_event("load_report", {{"ticker", ticker},
                              {"path", path},
                              {"rows", std::to_string(report.rows_read)},
                              {"kept", std::to_string(report.rows_kept)},
                              {"dropped", std::to_string(report.rows_dropped)}});
    return {DatedSeries<Kind>(ticker, std::move(dates), std::move(values)), report};
}

inline Loaded<PriceKind> load_prices(const std::string& path, const std::string& ticker,
                                     const std::string& date_column = "Date",
                                     const std::string& price_column = "Close",
                                     const std::string& date_format = std::string(kIsoDateFormat)) {
    return load_series<PriceKind>(path, ticker, {date_column, price_column, date_format});
}

/// Writes the canonical two-column form (`date,<column>`), ISO dates and
/// round-trip numbers.
template <class Kind>
void write_series_csv(const std::string& path, const DatedSeries<Kind>& series,
                      const std::string& column) {
    CsvWriter w(path);
    w.row({"date", column});
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double v = series.values()[i];
        w.row({format_date(series.dates()[i]),
               std::is_same_v<Kind, IndicatorKind> ? std::to_string(static_cast<int>(v))
                                                   : format_double(v)});
    }
}

/// 100 * (ln P_t - ln P_{t-1}), dated by the later day.
inline ReturnSeries log_returns(const PriceSeries& prices) {
    if (prices.size() < 2)
        throw Error(ErrorCode::TooFewObservations,
                    prices.ticker() + ": log returns need at least 2 prices");
    const auto& p = prices.values();
    std::vector<Date> dates(prices.dates().begin() + 1, prices.dates().end());
    std::vector<double> r(p.size() - 1);
    for (std::size_t t = 1; t < p.size(); ++t) r[t - 1] = 100.0 * std::log(p[t] / p[t - 1]);
    return ReturnSeries(prices.ticker(), std::move(dates), std::move(r));
}

/// Sorted intersection of the date vectors.
inline std::vector<Date> common_dates(std::span<const std::vector<Date>* const> date_sets) {
    if (date_sets.empty()) return {};
    std::vector<Date> acc = *date_sets.front();
    for (std::size_t i = 1; i < date_sets.size(); ++i) {
        std::vector<Date> next;
        std::set_intersection(acc.begin(), acc.end(), date_sets[i]->begin(), date_sets[i]->end(),
                              std::back_inserter(next));
        acc = std::move(next);
    }
    return acc;
}

/// Restricts every series to the common date set.
template <class Kind>
std::vector<DatedSeries<Kind>> align(const std::vector<DatedSeries<Kind>>& series) {
    if (series.size() < 2) throw Error(ErrorCode::InvalidArgument, "align needs at least 2 series");
    std::vector<const std::vector<Date>*> sets;
    for (const auto& s : series) sets.push_back(&s.dates());
    const auto keep = common_dates(sets);
    if (keep.empty()) throw Error(ErrorCode::EmptyIntersection, "no common dates");
    std::vector<DatedSeries<Kind>> out;
    out.reserve(series.size());
    for (const auto& s : series) out.push_back(s.restricted_to(keep));
    return out;
}

/// Aligns a return series with an indicator series on their common dates.
inline std::pair<ReturnSeries, DummySeries> align(const ReturnSeries& returns,
                                                  const DummySeries& dummy) {
    const std::vector<const std::vector<Date>*> sets{&returns.dates(), &dummy.dates()};
    const auto keep = common_dates(sets);
    if (keep.empty())
        throw Error(ErrorCode::EmptyIntersection,
                    "no common dates between " + returns.ticker() + " and " + dummy.ticker());
    return {returns.restricted_to(keep), dummy.restricted_to(keep)};
}

struct SummaryStats {
    double mean = 0.0;
    double stdev = 0.0;  // n-1 denominator
    std::optional<double> skewness;         // m3 / m2^(3/2)
    std::optional<double> excess_kurtosis;  // m4 / m2^2 - 3
    std::optional<double> raw_kurtosis;     // m4 / m2^2
    std::size_t n = 0;
};

/// Sample moments. Skewness and kurtosis use the biased moment ratios and are
/// left empty when the series has zero dispersion.
inline SummaryStats summary_stats(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) throw Error(ErrorCode::TooFewObservations, "summary statistics need n >= 4");
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    SummaryStats s;
    s.n = n;
    s.mean = mean;
    s.stdev = std::sqrt(m2 / (nd - 1.0));
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    // Relative threshold so that a constant series with rounding noise in
    // the mean still counts as degenerate.
    const double scale = std::max(1.0, mean * mean);
    if (m2 > 1e-24 * scale) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.raw_kurtosis = m4 / (m2 * m2);
        s.excess_kurtosis = *s.raw_kurtosis - 3.0;
    } else {
        s.stdev = 0.0;
    }
    return s;
}

inline SummaryStats summary_stats(const ReturnSeries& returns) {
    return summary_stats(returns.span());
}

}  // namespace turmoil
