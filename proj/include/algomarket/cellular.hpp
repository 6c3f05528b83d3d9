#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "algomarket/common.hpp"
#include "algomarket/distribution.hpp"
#include "algomarket/parallel.hpp"
#include "algomarket/rng.hpp"

namespace algomarket {

inline constexpr uint32_t kTotalisticRuleSpace = 1u << 20;  // 4^10

// One-dimensional 4-color radius-1 totalistic rule. The next color is the
// base-4 digit of `code` at the sum of the three neighborhood colors
// (0..9), so there are exactly 4^10 codes.
struct TotalisticRule {
    uint32_t code = 0;

    explicit TotalisticRule(uint32_t rule_code) : code(rule_code) {
        if (rule_code >= kTotalisticRuleSpace)
            throw DataError("totalistic rule code out of range: " + std::to_string(rule_code));
    }

    std::array<uint8_t, 10> digits() const {
        std::array<uint8_t, 10> table{};
        uint32_t rest = code;
        for (auto& digit : table) {
            digit = static_cast<uint8_t>(rest & 3);
            rest >>= 2;
        }
        return table;
    }
};

inline uint32_t rule_code_from_digits(const std::array<uint8_t, 10>& digits) {
    uint32_t code = 0;
    for (size_t s = digits.size(); s-- > 0;) {
        if (digits[s] > 3) throw DataError("rule digit out of range");
        code = code * 4 + digits[s];
    }
    return code;
}

using ColorRow = std::vector<uint8_t>;

struct CAEvolution {
    std::vector<ColorRow> rows;  // rows[0] is the initial condition
    uint64_t steps = 0;
    uint32_t rule_code = 0;
    uint64_t seed = 0;
};

// Random black/white strip of 10 to 20 cells; deterministic per seed.
inline ColorRow random_initial(uint64_t seed) {
    Rng rng(seed);
    const uint64_t length = rng.range(10, 20);
    ColorRow row(length);
    for (auto& cell : row) cell = static_cast<uint8_t>(rng.bit());
    return row;
}

// Light-cone evolution on an implicit 0 background: every row is two cells
// wider than its predecessor, with the new row's cell j summing the old
// cells j-2, j-1, j (out of range reads 0).
inline CAEvolution evolve(const TotalisticRule& rule, const ColorRow& init, uint64_t steps) {
    if (steps < 1) throw DataError("steps must be >= 1");
    for (const uint8_t cell : init)
        if (cell > 3) throw DataError("initial colors must be in 0..3");
    const auto table = rule.digits();
    CAEvolution evo;
    evo.steps = steps;
    evo.rule_code = rule.code;
    evo.rows.reserve(steps + 1);
    evo.rows.push_back(init);
    for (uint64_t t = 0; t < steps; ++t) {
        const ColorRow& prev = evo.rows.back();
        ColorRow next(prev.size() + 2);
        const auto at = [&prev](size_t j, size_t offset) -> uint32_t {
            // prev cell at index j + offset - 2, 0 outside the row
            const size_t idx = j + offset;
            return idx >= 2 && idx - 2 < prev.size() ? prev[idx - 2] : 0u;
        };
        for (size_t j = 0; j < next.size(); ++j)
            next[j] = table[at(j, 0) + at(j, 1) + at(j, 2)];
        evo.rows.push_back(std::move(next));
    }
    return evo;
}

// Maximal contiguous runs whose cells are all black or white; colors 2 and
// 3 break runs and are never emitted.
inline std::vector<std::string> binary_runs(const ColorRow& row) {
    std::vector<std::string> runs;
    std::string current;
    for (const uint8_t cell : row) {
        if (cell <= 1) {
            current.push_back(static_cast<char>('0' + cell));
        } else if (!current.empty()) {
            runs.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) runs.push_back(std::move(current));
    return runs;
}

namespace detail {

inline void accumulate_row_tuples(const ColorRow& row, const std::vector<int>& tuple_lengths,
                                  std::vector<std::map<std::string, uint64_t>>& slots) {
    for (const std::string& run : binary_runs(row)) {
        for (size_t i = 0; i < tuple_lengths.size(); ++i) {
            const size_t n = static_cast<size_t>(tuple_lengths[i]);
            const size_t blocks = run.size() / n;
            for (size_t b = 0; b < blocks; ++b) ++slots[i][run.substr(b * n, n)];
        }
    }
}

}  // namespace detail

// Draws `count` rule codes uniformly from the 4^10 space, evolves each for
// `steps` from a fresh random initial condition, and accumulates the
// non-overlapping n-tuples of every row's binary runs. The rule drawn at
// position i uses derive_seed(seed, i) for its initial condition, so the
// result is independent of evaluation order.
inline std::map<int, TupleDistribution> sample_distribution(uint64_t count, uint64_t steps,
                                                            const std::vector<int>& tuple_lengths,
                                                            uint64_t seed,
                                                            unsigned jobs = default_jobs()) {
    if (count < 1) throw DataError("sample count must be >= 1");
    if (tuple_lengths.empty()) throw DataError("no tuple lengths requested");
    for (const int n : tuple_lengths)
        if (n < 1 || n > 62) throw DataError("tuple length out of range: " + std::to_string(n));

    std::vector<uint32_t> codes(count);
    Rng master(seed);
    for (auto& code : codes) code = static_cast<uint32_t>(master.below(kTotalisticRuleSpace));

    using CountMap = std::map<std::string, uint64_t>;
    jobs = std::max(1u, jobs);
    std::vector<std::vector<CountMap>> worker_counts(
        jobs, std::vector<CountMap>(tuple_lengths.size()));

    parallel_ranges(count, jobs, [&](unsigned worker, uint64_t lo, uint64_t hi) {
        auto& slots = worker_counts[worker];
        for (uint64_t i = lo; i < hi; ++i) {
            const CAEvolution evo =
                evolve(TotalisticRule(codes[i]), random_initial(derive_seed(seed, i)), steps);
            for (const ColorRow& row : evo.rows)
                detail::accumulate_row_tuples(row, tuple_lengths, slots);
        }
    });

    const std::string label = "ca:count=" + std::to_string(count) +
                              ",steps=" + std::to_string(steps) +
                              ",seed=" + std::to_string(seed);
    std::map<int, TupleDistribution> result;
    for (size_t i = 0; i < tuple_lengths.size(); ++i) {
        TupleDistribution d;
        d.tuple_length = tuple_lengths[i];
        d.source_label = label;
        for (unsigned w = 0; w < jobs; ++w)
            for (const auto& [tuple, c] : worker_counts[w][i]) d.counts[tuple] += c;
        for (const auto& entry : d.counts) d.total += entry.second;
        result.emplace(tuple_lengths[i], std::move(d));
    }
    return result;
}

// Elementary rule 90 (XOR of the two neighbors) on a fixed-width cyclic
// grid from an explicit initial row. Rows 0..steps-1 are mapped through
// {0 -> -1, 1 -> +1}, totalled per row, and the running sums returned.
inline std::vector<double> rule90_price_series(const std::vector<uint8_t>& init, uint64_t steps) {
    if (init.empty()) throw DataError("width must be >= 1");
    if (steps < 1) throw DataError("steps must be >= 1");
    for (const uint8_t cell : init)
        if (cell > 1) throw DataError("rule 90 cells must be 0 or 1");
    const size_t width = init.size();
    std::vector<double> series;
    series.reserve(steps);
    std::vector<uint8_t> row = init, next(width);
    double running = 0.0;
    for (uint64_t t = 0; t < steps; ++t) {
        int64_t total = 0;
        for (const uint8_t cell : row) total += cell ? 1 : -1;
        running += static_cast<double>(total);
        series.push_back(running);
        if (t + 1 == steps) break;
        for (size_t i = 0; i < width; ++i)
            next[i] = row[(i + width - 1) % width] ^ row[(i + 1) % width];
        row.swap(next);
    }
    return series;
}

// Seeded variant: random binary initial row of the given width.
inline std::vector<double> rule90_price_series(uint64_t width, uint64_t steps, uint64_t seed) {
    if (width < 1) throw DataError("width must be >= 1");
    Rng rng(seed);
    std::vector<uint8_t> init(width);
    for (auto& cell : init) cell = static_cast<uint8_t>(rng.bit());
    return rule90_price_series(init, steps);
}

// ASCII PGM of one evolution; rows are centered on the final width with
// background 0, colors spread over the gray range.
inline void write_pgm(const CAEvolution& evo, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    const size_t width = evo.rows.back().size();
    out << "P2\n" << width << " " << evo.rows.size() << "\n255\n";
    for (const ColorRow& row : evo.rows) {
        const size_t pad = (width - row.size()) / 2;
        for (size_t i = 0; i < width; ++i) {
            const uint8_t color = (i >= pad && i - pad < row.size()) ? row[i - pad] : 0;
            out << static_cast<int>(color) * 85 << (i + 1 == width ? '\n' : ' ');
        }
    }
}

}  // namespace algomarket
