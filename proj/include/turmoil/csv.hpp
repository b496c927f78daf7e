#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "turmoil/error.hpp"

namespace turmoil {

using Date = std::chrono::sys_days;

inline constexpr std::string_view kIsoDateFormat = "%Y-%m-%d";

namespace detail {

inline std::optional<int> parse_fixed_int(std::string_view text, std::size_t& pos,
                                          std::size_t max_digits) {
    int value = 0;
    std::size_t digits = 0;
    while (pos < text.size() && digits < max_digits && text[pos] >= '0' && text[pos] <= '9') {
        value = value * 10 + (text[pos] - '0');
        ++pos;
        ++digits;
    }
    if (digits == 0) return std::nullopt;
    return value;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Parses `text` against a strftime-like `format` supporting %Y, %m, %d and
/// literal characters. Returns nullopt on any mismatch or an invalid day.
inline std::optional<Date> parse_date(std::string_view text,
                                      std::string_view format = kIsoDateFormat) {
    text = detail::trim(text);
    std::optional<int> y, m, d;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < format.size(); ++i) {
        if (format[i] == '%' && i + 1 < format.size()) {
            const char spec = format[++i];
            std::optional<int> v;
            switch (spec) {
                case 'Y': v = y = detail::parse_fixed_int(text, pos, 4); break;
                case 'm': v = m = detail::parse_fixed_int(text, pos, 2); break;
                case 'd': v = d = detail::parse_fixed_int(text, pos, 2); break;
                case '%':
                    if (pos >= text.size() || text[pos] != '%') return std::nullopt;
                    ++pos;
                    v = 0;
                    break;
                default: return std::nullopt;
            }
            if (!v) return std::nullopt;
        } else {
            if (pos >= text.size() || text[pos] != format[i]) return std::nullopt;
            ++pos;
        }
    }
    if (pos != text.size() || !y || !m || !d) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                          std::chrono::month{static_cast<unsigned>(*m)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

inline std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

/// Shortest representation that parses back to the identical double.
inline std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

/// Strict full-field parse; rejects empty text, trailing junk and non-finite values.
inline std::optional<double> parse_double(std::string_view text) {
    text = detail::trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

namespace detail {

// RFC-4180 style: quoted fields may contain commas and doubled quotes, but
// not newlines.
inline std::optional<std::vector<std::string>> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            if (!field.empty() || was_quoted) return std::nullopt;
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            if (was_quoted && c != ' ' && c != '\r') return std::nullopt;
            field.push_back(c);
        }
    }
    if (quoted) return std::nullopt;
    fields.push_back(std::string(trim(field)));
    for (auto& f : fields) f = std::string(trim(f));
    return fields;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, path);

    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (!fields)
            throw Error(ErrorCode::MalformedCsv,
                        path + ":" + std::to_string(line_no) + ": unbalanced quotes");
        if (!have_header) {
            table.header = std::move(*fields);
            have_header = true;
            continue;
        }
        if (fields->size() != table.header.size())
            throw Error(ErrorCode::MalformedCsv,
                        path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields->size()));
        table.rows.push_back(std::move(*fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw Error(ErrorCode::MalformedCsv, path + ": missing header row");
    return table;
}

/// Minimal CSV writer; quotes fields containing separators or quotes.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error(ErrorCode::FileNotFound, "cannot open for writing: " + path);
    }

    CsvWriter& row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            write_field(fields[i]);
        }
        out_ << '\n';
        return *this;
    }

private:
    void write_field(const std::string& f) {
        if (f.find_first_of(",\"\n") == std::string::npos) {
            out_ << f;
            return;
        }
        out_ << '"';
        for (char c : f) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    }

    std::ofstream out_;
};

/// Emits one `key=value` structured log line on stderr.
inline void log_event(std::string_view event,
                      std::initializer_list<std::pair<std::string_view, std::string>> fields) {
    std::ostringstream line;
    line << "event=" << event;
    for (const auto& [k, v] : fields) {
        line << ' ' << k << '=';
        if (v.find(' ') != std::string::npos)
            line << '"' << v << '"';
        else
            line << v;
    }
    std::clog << line.str() << '\n';
}

}  // namespace turmoil
