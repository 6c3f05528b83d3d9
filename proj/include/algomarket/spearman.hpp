#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "algomarket/distribution.hpp"

namespace algomarket {

enum class SupportMode { Intersection, Union };

inline SupportMode support_mode_from_string(const std::string& s) {
    if (s == "intersection") return SupportMode::Intersection;
    if (s == "union") return SupportMode::Union;
    throw DataError("unknown support mode '" + s + "'");
}

inline std::string to_string(SupportMode m) {
    return m == SupportMode::Intersection ? "intersection" : "union";
}

struct CorrelationReport {
    double rho = std::numeric_limits<double>::quiet_NaN();
    uint64_t n_compared = 0;
    int tuple_length = 0;
    bool defined = false;  // false when the support is too small (or degenerate)
};

// 1-based ranks by value descending; tied values share the average of the
// positions they occupy.
inline std::vector<double> ranks_descending(const std::vector<uint64_t>& values) {
    const size_t m = values.size();
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(m);
    size_t i = 0;
    while (i < m) {
        size_t j = i;
        while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

// Pearson on rank vectors. Identical and exactly reversed rank vectors are
// recognized before the general formula so they report +/-1.0 exactly.
inline double rank_pearson(const std::vector<double>& x, const std::vector<double>& y,
                           bool& defined) {
    const size_t m = x.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (size_t i = 0; i < m; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        defined = false;
        return std::numeric_limits<double>::quiet_NaN();
    }
    defined = true;
    if (sxx == syy) {
        if (sxy == sxx) return 1.0;
        if (sxy == -sxx) return -1.0;
    }
    const double rho = sxy / (std::sqrt(sxx) * std::sqrt(syy));
    return std::clamp(rho, -1.0, 1.0);
}

}  // namespace detail

// Spearman rank correlation over the chosen common support. Ranks are
// assigned per distribution by count descending with average ranks for tied
// counts; in union mode tuples absent from one side count as 0.
inline CorrelationReport spearman(const TupleDistribution& a, const TupleDistribution& b,
                                  SupportMode support = SupportMode::Intersection) {
    if (a.tuple_length != b.tuple_length)
        throw DataError("tuple length mismatch: " + std::to_string(a.tuple_length) + " vs " +
                        std::to_string(b.tuple_length));
    std::vector<std::string> tuples;
    if (support == SupportMode::Intersection) {
        for (const auto& [tuple, count] : a.counts)
            if (b.counts.count(tuple)) tuples.push_back(tuple);
    } else {
        tuples.reserve(a.counts.size() + b.counts.size());
        for (const auto& [tuple, count] : a.counts) tuples.push_back(tuple);
        for (const auto& [tuple, count] : b.counts)
            if (!a.counts.count(tuple)) tuples.push_back(tuple);
        std::sort(tuples.begin(), tuples.end());
    }

    CorrelationReport report;
    report.tuple_length = a.tuple_length;
    report.n_compared = tuples.size();
    if (tuples.size() < 2) return report;

    const auto counts_over = [&tuples](const TupleDistribution& d) {
        std::vector<uint64_t> counts(tuples.size(), 0);
        for (size_t i = 0; i < tuples.size(); ++i) {
            const auto it = d.counts.find(tuples[i]);
            if (it != d.counts.end()) counts[i] = it->second;
        }
        return counts;
    };
    const std::vector<double> ranks_a = ranks_descending(counts_over(a));
    const std::vector<double> ranks_b = ranks_descending(counts_over(b));
    report.rho = detail::rank_pearson(ranks_a, ranks_b, report.defined);
    return report;
}

inline void to_json(nlohmann::json& j, const CorrelationReport& r) {
    j = nlohmann::json{{"n_compared", r.n_compared}, {"tuple_length", r.tuple_length}};
    if (r.defined)
        j["rho"] = r.rho;
    else
        j["rho"] = nullptr;
}

inline void from_json(const nlohmann::json& j, CorrelationReport& r) {
    r.n_compared = j.at("n_compared").get<uint64_t>();
    r.tuple_length = j.at("tuple_length").get<int>();
    if (j.at("rho").is_null()) {
        r.defined = false;
        r.rho = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.defined = true;
        r.rho = j.at("rho").get<double>();
    }
}

}  // namespace algomarket
