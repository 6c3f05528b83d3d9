#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "algomarket/common.hpp"

namespace algomarket {

// Empirical frequencies of fixed-length binary tuples. Counts live in an
// ordered map so iteration and serialization are deterministic. Values are
// treated as immutable once built; merging produces a new distribution.
struct TupleDistribution {
    int tuple_length = 0;
    std::map<std::string, uint64_t> counts;
    uint64_t total = 0;
    std::string source_label;
};

struct RankedEntry {
    std::string tuple;
    double probability;
};

// Total order: probability descending, ties broken lexicographically.
struct RankedView {
    std::vector<RankedEntry> entries;
};

inline bool is_binary_string(std::string_view s) {
    return s.find_first_not_of("01") == std::string_view::npos;
}

inline void validate(const TupleDistribution& d) {
    if (d.tuple_length < 1 || d.tuple_length > 62)
        throw DataError("tuple_length out of range: " + std::to_string(d.tuple_length));
    uint64_t sum = 0;
    for (const auto& [tuple, count] : d.counts) {
        if (tuple.size() != static_cast<size_t>(d.tuple_length) || !is_binary_string(tuple))
            throw DataError("bad tuple key '" + tuple + "' for length " +
                            std::to_string(d.tuple_length));
        sum += count;
    }
    if (sum != d.total)
        throw DataError("total " + std::to_string(d.total) + " does not match count sum " +
                        std::to_string(sum));
}

// Partitions `bits` into consecutive non-overlapping blocks of length n
// starting at index 0; a trailing remainder shorter than n is discarded.
inline TupleDistribution build_distribution(std::string_view bits, int n,
                                            std::string source_label = "") {
    if (n < 1) throw DataError("tuple length must be >= 1");
    if (!is_binary_string(bits)) throw DataError("input contains non-binary symbols");
    if (bits.size() < static_cast<size_t>(n)) throw DataError("insufficient data");
    TupleDistribution d;
    d.tuple_length = n;
    d.source_label = std::move(source_label);
    const size_t blocks = bits.size() / static_cast<size_t>(n);
    for (size_t b = 0; b < blocks; ++b)
        ++d.counts[std::string(bits.substr(b * n, n))];
    d.total = blocks;
    return d;
}

inline RankedView ranked_view(const TupleDistribution& d) {
    if (d.total == 0) throw DataError("empty distribution");
    // Sorting by raw count gives the same order as probability and avoids
    // floating-point ties that are not exact count ties.
    std::vector<std::pair<std::string_view, uint64_t>> items;
    items.reserve(d.counts.size());
    for (const auto& [tuple, count] : d.counts) items.emplace_back(tuple, count);
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    RankedView view;
    view.entries.reserve(items.size());
    for (const auto& [tuple, count] : items)
        view.entries.push_back({std::string(tuple),
                                static_cast<double>(count) / static_cast<double>(d.total)});
    return view;
}

// Frequency-based estimate of the algorithmic complexity of `tuple`:
// -log2(count/total), valid up to an additive constant.
inline double complexity_estimate(const TupleDistribution& d, std::string_view tuple) {
    const auto it = d.counts.find(std::string(tuple));
    if (it == d.counts.end() || it->second == 0 || d.total == 0)
        throw DataError("no mass for tuple '" + std::string(tuple) + "'");
    return -std::log2(static_cast<double>(it->second) / static_cast<double>(d.total));
}

// Count-wise sum. Associative and commutative, so shards may be merged in
// any order. Labels are kept when unanimous, otherwise joined sorted.
inline TupleDistribution merge_distributions(const std::vector<TupleDistribution>& parts) {
    if (parts.empty()) throw DataError("nothing to merge");
    TupleDistribution merged;
    merged.tuple_length = parts.front().tuple_length;
    std::vector<std::string> labels;
    for (const auto& part : parts) {
        if (part.tuple_length != merged.tuple_length)
            throw DataError("cannot merge distributions of different tuple lengths");
        for (const auto& [tuple, count] : part.counts) merged.counts[tuple] += count;
        merged.total += part.total;
        if (std::find(labels.begin(), labels.end(), part.source_label) == labels.end())
            labels.push_back(part.source_label);
    }
    std::sort(labels.begin(), labels.end());
    merged.source_label = labels.size() == 1 ? labels.front() : [&] {
        std::string joined;
        for (const auto& label : labels) {
            if (!joined.empty()) joined += "+";
            joined += label;
        }
        return joined;
    }();
    return merged;
}

inline void to_json(nlohmann::json& j, const TupleDistribution& d) {
    j = nlohmann::json{{"tuple_length", d.tuple_length},
                       {"total", d.total},
                       {"counts", d.counts},
                       {"source_label", d.source_label}};
}

inline void from_json(const nlohmann::json& j, TupleDistribution& d) {
    d.tuple_length = j.at("tuple_length").get<int>();
    d.total = j.at("total").get<uint64_t>();
    d.counts = j.at("counts").get<std::map<std::string, uint64_t>>();
    d.source_label = j.value("source_label", std::string{});
    validate(d);
}

// CSV with header tuple,count,probability; rows in key order.
inline std::string distribution_to_csv(const TupleDistribution& d) {
    std::string out = "tuple,count,probability\n";
    for (const auto& [tuple, count] : d.counts) {
        const double p =
            d.total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(d.total);
        out += tuple;
        out += ',';
        out += std::to_string(count);
        out += ',';
        out += format_double(p);
        out += '\n';
    }
    return out;
}

}  // namespace algomarket
