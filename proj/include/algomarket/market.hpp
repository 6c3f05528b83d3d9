#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "algomarket/common.hpp"

namespace algomarket {

// Dates are ISO "YYYY-MM-DD" strings; lexicographic order equals calendar
// order, which is all the windowing logic needs.
inline bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

struct PriceSeries {
    std::string symbol;
    std::vector<std::string> dates;   // strictly increasing ISO dates
    std::vector<double> closes;       // strictly positive, same length
};

struct DirectionSeries {
    std::string bits;      // '0'/'1', one per consecutive close pair
    double quantum = 0.0;  // 0 means no rounding
    std::string symbol;
};

inline void validate(const PriceSeries& s) {
    if (s.dates.size() != s.closes.size())
        throw DataError("price series has " + std::to_string(s.dates.size()) + " dates but " +
                        std::to_string(s.closes.size()) + " closes");
    if (s.dates.size() < 2) throw DataError("price series needs at least 2 rows");
    for (size_t i = 0; i < s.dates.size(); ++i) {
        if (!is_iso_date(s.dates[i])) throw DataError("bad date '" + s.dates[i] + "'");
        if (!(s.closes[i] > 0.0))
            throw DataError("non-positive close " + format_double(s.closes[i]) + " at " +
                            s.dates[i]);
        if (i > 0 && !(s.dates[i - 1] < s.dates[i]))
            throw DataError("dates not strictly increasing at " + s.dates[i]);
    }
}

// Reads rows of `YYYY-MM-DD,<decimal close>`; an optional `date,close`
// header and blank lines are skipped. Rows are sorted by date; duplicate
// dates are rejected. Errors carry 1-based physical line numbers.
inline PriceSeries ingest_csv(const std::string& path, std::string symbol = "") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    PriceSeries series;
    series.symbol = symbol.empty() ? path : std::move(symbol);

    std::vector<std::pair<std::string, double>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string lowered = line;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        lowered.erase(std::remove(lowered.begin(), lowered.end(), ' '), lowered.end());
        if (line_no == 1 && lowered == "date,close") continue;

        const auto comma = line.find(',');
        const std::string where = "row " + std::to_string(line_no) + " of '" + path + "'";
        if (comma == std::string::npos) throw DataError("missing comma at " + where);
        const std::string date = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (!is_iso_date(date)) throw DataError("bad date '" + date + "' at " + where);
        char* end = nullptr;
        const double close = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw DataError("bad close '" + value + "' at " + where);
        if (!(close > 0.0) || !std::isfinite(close))
            throw DataError("close must be positive at " + where);
        rows.emplace_back(date, close);
    }
    if (rows.size() < 2) throw DataError("'" + path + "' has fewer than 2 data rows");

    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first)
            throw DataError("duplicate date " + rows[i].first + " in '" + path + "'");

    series.dates.reserve(rows.size());
    series.closes.reserve(rows.size());
    for (auto& [date, close] : rows) {
        series.dates.push_back(std::move(date));
        series.closes.push_back(close);
    }
    validate(series);
    return series;
}

// Nearest multiple of q with halves rounded away from zero; q = 0 passes x
// through. Ratios within 1e-9 (relative) of a half-integer are treated as
// exact halves so decimal price differences land on the intended side.
inline double round_to_quantum(double x, double q) {
    if (q < 0.0) throw DataError("quantum must be >= 0");
    if (q == 0.0) return x;
    double doubled = x / q * 2.0;
    const double nearest = std::nearbyint(doubled);
    if (std::abs(doubled - nearest) <= 1e-9 * std::max(1.0, std::abs(doubled)))
        doubled = nearest;
    return q * std::round(doubled / 2.0);  // std::round is half-away-from-zero
}

// bit = 1 iff the quantum-rounded difference p[i+1] - p[i] is positive;
// falls and unchanged prices both encode 0.
inline DirectionSeries encode_directions(const PriceSeries& prices, double quantum) {
    validate(prices);
    DirectionSeries out;
    out.quantum = quantum;
    out.symbol = prices.symbol;
    out.bits.reserve(prices.closes.size() - 1);
    for (size_t i = 0; i + 1 < prices.closes.size(); ++i) {
        const double diff = round_to_quantum(prices.closes[i + 1] - prices.closes[i], quantum);
        out.bits.push_back(diff > 0.0 ? '1' : '0');
    }
    return out;
}

// Sub-series restricted to dates in [start, end], inclusive.
inline PriceSeries align_windows(const PriceSeries& series, const std::string& start,
                                 const std::string& end) {
    if (!is_iso_date(start) || !is_iso_date(end))
        throw DataError("window bounds must be ISO dates");
    if (!(start < end)) throw DataError("window start must precede end");
    PriceSeries out;
    out.symbol = series.symbol;
    for (size_t i = 0; i < series.dates.size(); ++i) {
        if (series.dates[i] < start || series.dates[i] > end) continue;
        out.dates.push_back(series.dates[i]);
        out.closes.push_back(series.closes[i]);
    }
    if (out.dates.size() < 2)
        throw DataError("window " + start + ".." + end + " leaves fewer than 2 points for " +
                        series.symbol);
    return out;
}

inline void to_json(nlohmann::json& j, const DirectionSeries& d) {
    j = nlohmann::json{{"symbol", d.symbol}, {"quantum", d.quantum}, {"bits", d.bits}};
}

inline void from_json(const nlohmann::json& j, DirectionSeries& d) {
    d.symbol = j.at("symbol").get<std::string>();
    d.quantum = j.at("quantum").get<double>();
    d.bits = j.at("bits").get<std::string>();
    if (d.bits.find_first_not_of("01") != std::string::npos)
        throw DataError("direction series contains non-binary symbols");
    if (d.quantum < 0.0) throw DataError("quantum must be >= 0");
}

}  // namespace algomarket
