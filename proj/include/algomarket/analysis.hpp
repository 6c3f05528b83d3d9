#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "algomarket/baselines.hpp"
#include "algomarket/common.hpp"
#include "algomarket/distribution.hpp"
#include "algomarket/io.hpp"
#include "algomarket/market.hpp"
#include "algomarket/parallel.hpp"
#include "algomarket/spearman.hpp"

namespace algomarket {

inline const std::vector<std::string>& comparison_ids() {
    static const std::vector<std::string> ids = {
        "market_x_market", "rounded_x_rounded", "market_x_random",
        "rounded_x_random", "market_x_tm",      "market_x_ca"};
    return ids;
}

struct MarketInput {
    std::string symbol;
    std::string csv_path;
};

struct ExperimentConfig {
    std::vector<MarketInput> markets;
    std::optional<std::pair<std::string, std::string>> window;  // inclusive [start, end]
    double quantum = 0.4;
    std::vector<int> tuple_lengths = {4, 5, 6, 7, 8, 9, 10};
    // Per-comparison column ranges; market vs. TM defaults to 5..10.
    std::map<std::string, std::vector<int>> length_overrides = {
        {"market_x_tm", {5, 6, 7, 8, 9, 10}}};
    std::vector<std::string> comparisons = {"market_x_market"};
    std::string tm_distributions;  // path to a tm-enum artifact, when needed
    std::string ca_distributions;  // path to a ca-sample artifact, when needed
    uint64_t random_seed = 0;
    SupportMode support = SupportMode::Intersection;
};

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.markets.empty()) throw DataError("config lists no markets");
    if (cfg.comparisons.empty()) throw DataError("config selects no comparisons");
    std::set<std::string> symbols;
    for (const auto& market : cfg.markets)
        if (!symbols.insert(market.symbol).second)
            throw DataError("duplicate market symbol '" + market.symbol + "'");
    for (const auto& comparison : cfg.comparisons)
        if (std::find(comparison_ids().begin(), comparison_ids().end(), comparison) ==
            comparison_ids().end())
            throw DataError("unknown comparison '" + comparison + "'");
    if (cfg.quantum < 0.0) throw DataError("quantum must be >= 0");
    auto check_lengths = [](const std::vector<int>& lengths) {
        if (lengths.empty()) throw DataError("empty tuple length list");
        for (const int n : lengths)
            if (n < 1 || n > 62)
                throw DataError("tuple length out of range: " + std::to_string(n));
    };
    check_lengths(cfg.tuple_lengths);
    for (const auto& [comparison, lengths] : cfg.length_overrides) check_lengths(lengths);
}

struct CorrelationMatrix {
    std::string comparison;
    std::vector<std::string> row_labels;
    std::vector<int> tuple_lengths;                    // column labels
    std::vector<std::vector<CorrelationReport>> cells;  // [row][column]
};

inline bool operator==(const CorrelationReport& a, const CorrelationReport& b) {
    if (a.defined != b.defined || a.n_compared != b.n_compared ||
        a.tuple_length != b.tuple_length)
        return false;
    return !a.defined || a.rho == b.rho;
}

inline bool operator==(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    return a.comparison == b.comparison && a.row_labels == b.row_labels &&
           a.tuple_lengths == b.tuple_lengths && a.cells == b.cells;
}

namespace detail {

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct PreparedMarket {
    std::string symbol;
    std::string plain_bits;    // quantum 0 encoding
    std::string rounded_bits;  // cfg.quantum encoding
};

// Loads and encodes every market, sorted by symbol so results do not
// depend on config order. With `drop_failing` set, markets that cannot
// cover the window are skipped and recorded instead of failing the run.
inline std::vector<PreparedMarket> prepare_markets(
    const ExperimentConfig& cfg,
    const std::optional<std::pair<std::string, std::string>>& window, bool drop_failing,
    std::vector<std::string>* warnings) {
    std::vector<MarketInput> inputs = cfg.markets;
    std::sort(inputs.begin(), inputs.end(),
              [](const MarketInput& a, const MarketInput& b) { return a.symbol < b.symbol; });
    std::vector<PreparedMarket> prepared;
    for (const auto& input : inputs) {
        try {
            PriceSeries series = ingest_csv(input.csv_path, input.symbol);
            if (window) series = align_windows(series, window->first, window->second);
            PreparedMarket m;
            m.symbol = input.symbol;
            m.plain_bits = encode_directions(series, 0.0).bits;
            m.rounded_bits = encode_directions(series, cfg.quantum).bits;
            prepared.push_back(std::move(m));
        } catch (const DataError& e) {
            if (!drop_failing) throw;
            if (warnings) warnings->push_back(input.symbol + " dropped: " + e.what());
        }
    }
    return prepared;
}

// Empty-but-typed distribution when the series is too short for n; the
// comparison then reports an undefined cell instead of failing.
inline TupleDistribution distribution_or_empty(const std::string& bits, int n,
                                               const std::string& label) {
    if (bits.size() < static_cast<size_t>(n)) {
        TupleDistribution empty;
        empty.tuple_length = n;
        empty.source_label = label;
        return empty;
    }
    return build_distribution(bits, n, label);
}

inline const std::vector<int>& lengths_for(const ExperimentConfig& cfg,
                                           const std::string& comparison) {
    const auto it = cfg.length_overrides.find(comparison);
    return it != cfg.length_overrides.end() ? it->second : cfg.tuple_lengths;
}

}  // namespace detail

namespace detail {

struct RowSpec {
    std::string label;
    const TupleDistribution* left;
    const TupleDistribution* right;
};

}  // namespace detail

// Runs the configured comparisons and returns one matrix per comparison.
// Row order is lexicographic in the pair labels; cells are Spearman
// reports over the configured support.
inline std::map<std::string, CorrelationMatrix> run_experiment(const ExperimentConfig& cfg,
                                                               unsigned jobs = default_jobs()) {
    validate(cfg);
    const auto markets = detail::prepare_markets(cfg, cfg.window, false, nullptr);

    const bool wants_tm = std::find(cfg.comparisons.begin(), cfg.comparisons.end(),
                                    "market_x_tm") != cfg.comparisons.end();
    const bool wants_ca = std::find(cfg.comparisons.begin(), cfg.comparisons.end(),
                                    "market_x_ca") != cfg.comparisons.end();
    std::map<int, TupleDistribution> tm_set, ca_set;
    if (wants_tm) {
        if (cfg.tm_distributions.empty())
            throw DataError("market_x_tm requested but no tm_distributions artifact configured");
        tm_set = load_distribution_set(cfg.tm_distributions);
    }
    if (wants_ca) {
        if (cfg.ca_distributions.empty())
            throw DataError("market_x_ca requested but no ca_distributions artifact configured");
        ca_set = load_distribution_set(cfg.ca_distributions);
    }

    // Distribution cache keyed by (bits owner label, n). Bits strings are
    // stable for the rest of the run, so keys use pointers-free labels.
    std::map<std::pair<std::string, int>, TupleDistribution> cache;
    const auto cached = [&cache](const std::string& key, const std::string& bits,
                                 int n) -> const TupleDistribution& {
        const auto map_key = std::make_pair(key, n);
        auto it = cache.find(map_key);
        if (it == cache.end())
            it = cache.emplace(map_key, detail::distribution_or_empty(bits, n, key)).first;
        return it->second;
    };
    const auto reference = [&](const std::map<int, TupleDistribution>& set, int n,
                               const std::string& path) -> const TupleDistribution& {
        const auto it = set.find(n);
        if (it == set.end())
            throw DataError("no " + std::to_string(n) + "-tuple distribution in '" + path + "'");
        return it->second;
    };

    std::map<std::string, CorrelationMatrix> result;
    for (const auto& comparison : cfg.comparisons) {
        const std::vector<int>& lengths = detail::lengths_for(cfg, comparison);
        CorrelationMatrix matrix;
        matrix.comparison = comparison;
        matrix.tuple_lengths = lengths;

        const bool rounded = comparison.rfind("rounded", 0) == 0;
        const auto bits_of = [&](const detail::PreparedMarket& m) -> const std::string& {
            return rounded ? m.rounded_bits : m.plain_bits;
        };
        const auto key_of = [&](const detail::PreparedMarket& m) {
            return m.symbol + (rounded ? " q=" + format_double(cfg.quantum) : " q=0");
        };

        struct Row {
            std::string label;
            std::vector<const TupleDistribution*> left, right;  // per length
        };
        std::vector<Row> rows;

        if (comparison == "market_x_market" || comparison == "rounded_x_rounded") {
            for (size_t i = 0; i < markets.size(); ++i) {
                for (size_t k = i + 1; k < markets.size(); ++k) {
                    Row row;
                    row.label = markets[i].symbol + " vs. " + markets[k].symbol;
                    for (const int n : lengths) {
                        row.left.push_back(&cached(key_of(markets[i]), bits_of(markets[i]), n));
                        row.right.push_back(&cached(key_of(markets[k]), bits_of(markets[k]), n));
                    }
                    rows.push_back(std::move(row));
                }
            }
        } else {
            for (const auto& market : markets) {
                Row row;
                for (const int n : lengths)
                    row.left.push_back(&cached(key_of(market), bits_of(market), n));
                if (comparison == "market_x_random" || comparison == "rounded_x_random") {
                    row.label = market.symbol + " vs. random";
                    const uint64_t seed =
                        derive_seed(cfg.random_seed, detail::fnv1a64(market.symbol));
                    const std::string random_key =
                        "random:" + market.symbol + ",seed=" + std::to_string(cfg.random_seed);
                    const std::string bits =
                        random_direction_series(market.plain_bits.size(), seed);
                    for (const int n : lengths)
                        row.right.push_back(&cached(random_key, bits, n));
                } else if (comparison == "market_x_tm") {
                    row.label = market.symbol + " vs. TM";
                    for (const int n : lengths)
                        row.right.push_back(&reference(tm_set, n, cfg.tm_distributions));
                } else {
                    row.label = market.symbol + " vs. CA";
                    for (const int n : lengths)
                        row.right.push_back(&reference(ca_set, n, cfg.ca_distributions));
                }
                rows.push_back(std::move(row));
            }
        }

        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.label < b.label; });
        matrix.row_labels.reserve(rows.size());
        for (const auto& row : rows) matrix.row_labels.push_back(row.label);
        matrix.cells.assign(rows.size(), std::vector<CorrelationReport>(lengths.size()));
        parallel_ranges(rows.size(), jobs, [&](unsigned, uint64_t lo, uint64_t hi) {
            for (uint64_t r = lo; r < hi; ++r)
                for (size_t c = 0; c < lengths.size(); ++c)
                    matrix.cells[r][c] =
                        spearman(*rows[r].left[c], *rows[r].right[c], cfg.support);
        });
        result.emplace(comparison, std::move(matrix));
    }
    return result;
}

struct WindowResult {
    std::map<std::string, CorrelationMatrix> matrices;
    std::vector<std::string> warnings;  // markets dropped from the window
};

// Runs the experiment restricted to each window. Markets without enough
// data in a window are dropped from that window with a warning record;
// a window with no usable market is an error.
inline std::map<std::string, WindowResult> backtest(
    const ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& windows,
    unsigned jobs = default_jobs()) {
    validate(cfg);
    if (windows.empty()) throw DataError("no backtest windows given");
    std::map<std::string, WindowResult> results;
    for (const auto& window : windows) {
        const std::string label = window.first + ".." + window.second;
        if (results.count(label)) continue;
        WindowResult entry;
        const auto usable =
            detail::prepare_markets(cfg, window, true, &entry.warnings);
        if (usable.empty())
            throw DataError("window " + label + " has no usable markets");
        ExperimentConfig scoped = cfg;
        scoped.window = window;
        scoped.markets.clear();
        for (const auto& market : usable)
            for (const auto& input : cfg.markets)
                if (input.symbol == market.symbol) scoped.markets.push_back(input);
        entry.matrices = run_experiment(scoped, jobs);
        results.emplace(label, std::move(entry));
    }
    return results;
}

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Csv, Json, Markdown };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    throw DataError("unknown report format '" + s + "'");
}

// Cell notation "rho|n" with rho at two significant digits; undefined
// cells render as an en dash so no correlation is fabricated.
inline std::string format_cell(const CorrelationReport& r) {
    if (!r.defined) return "–|" + std::to_string(r.n_compared);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2g", r.rho);
    return std::string(buf) + "|" + std::to_string(r.n_compared);
}

inline std::string matrix_to_csv(const CorrelationMatrix& m) {
    std::string out = "pair";
    for (const int n : m.tuple_lengths) out += "," + std::to_string(n);
    out += '\n';
    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        out += m.row_labels[r];
        for (size_t c = 0; c < m.tuple_lengths.size(); ++c) out += "," + format_cell(m.cells[r][c]);
        out += '\n';
    }
    return out;
}

inline std::string matrix_to_markdown(const CorrelationMatrix& m) {
    std::string out = "| " + m.comparison + " |";
    for (const int n : m.tuple_lengths) out += " " + std::to_string(n) + " |";
    out += "\n|---|";
    for (size_t c = 0; c < m.tuple_lengths.size(); ++c) out += "---|";
    out += '\n';
    for (size_t r = 0; r < m.row_labels.size(); ++r) {
        out += "| " + m.row_labels[r] + " |";
        for (size_t c = 0; c < m.tuple_lengths.size(); ++c) {
            std::string cell = format_cell(m.cells[r][c]);
            // keep the rendered cell text "rho|n" inside the table column
            const size_t bar = cell.rfind('|');
            cell.replace(bar, 1, "\\|");
            out += " " + cell + " |";
        }
        out += '\n';
    }
    return out;
}

inline void to_json(nlohmann::json& j, const CorrelationMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (size_t r = 0; r < m.row_labels.size(); ++r)
        rows.push_back(nlohmann::json{{"label", m.row_labels[r]}, {"cells", m.cells[r]}});
    j = nlohmann::json{
        {"comparison", m.comparison}, {"tuple_lengths", m.tuple_lengths}, {"rows", rows}};
}

inline void from_json(const nlohmann::json& j, CorrelationMatrix& m) {
    m.comparison = j.at("comparison").get<std::string>();
    m.tuple_lengths = j.at("tuple_lengths").get<std::vector<int>>();
    m.row_labels.clear();
    m.cells.clear();
    for (const auto& row : j.at("rows")) {
        m.row_labels.push_back(row.at("label").get<std::string>());
        m.cells.push_back(row.at("cells").get<std::vector<CorrelationReport>>());
    }
}

// Writes one file per comparison under `out_prefix` and returns the paths.
inline std::vector<std::string> emit_report(
    const std::map<std::string, CorrelationMatrix>& matrices, ReportFormat format,
    const std::string& out_prefix) {
    if (matrices.empty()) throw DataError("no matrices to write");
    const char* ext = format == ReportFormat::Csv      ? ".csv"
                      : format == ReportFormat::Json   ? ".json"
                                                       : ".md";
    std::vector<std::string> paths;
    for (const auto& [comparison, matrix] : matrices) {
        const std::string path = out_prefix + "_" + comparison + ext;
        switch (format) {
            case ReportFormat::Csv: write_text_file(path, matrix_to_csv(matrix)); break;
            case ReportFormat::Markdown: write_text_file(path, matrix_to_markdown(matrix)); break;
            case ReportFormat::Json: {
                const nlohmann::json j = matrix;
                write_text_file(path, j.dump(2) + "\n");
                break;
            }
        }
        paths.push_back(path);
    }
    return paths;
}

// ---------------------------------------------------------------------------
// Config file parsing (JSON; see README for the schema)

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::string& base_dir = "") {
    ExperimentConfig cfg;
    try {
        cfg.markets.clear();
        for (const auto& market : j.at("markets")) {
            MarketInput input;
            input.symbol = market.at("symbol").get<std::string>();
            std::filesystem::path csv = market.at("csv").get<std::string>();
            if (csv.is_relative() && !base_dir.empty()) csv = std::filesystem::path(base_dir) / csv;
            input.csv_path = csv.string();
            cfg.markets.push_back(std::move(input));
        }
        if (j.contains("window")) {
            cfg.window = {j.at("window").at("start").get<std::string>(),
                          j.at("window").at("end").get<std::string>()};
        }
        if (j.contains("quantum")) cfg.quantum = j.at("quantum").get<double>();
        if (j.contains("tuple_lengths"))
            cfg.tuple_lengths = j.at("tuple_lengths").get<std::vector<int>>();
        if (j.contains("length_overrides")) {
            cfg.length_overrides.clear();
            for (const auto& [comparison, lengths] : j.at("length_overrides").items())
                cfg.length_overrides[comparison] = lengths.get<std::vector<int>>();
        }
        if (j.contains("comparisons"))
            cfg.comparisons = j.at("comparisons").get<std::vector<std::string>>();
        const auto resolve = [&](const std::string& raw) {
            std::filesystem::path p = raw;
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            return p.string();
        };
        if (j.contains("tm_distributions"))
            cfg.tm_distributions = resolve(j.at("tm_distributions").get<std::string>());
        if (j.contains("ca_distributions"))
            cfg.ca_distributions = resolve(j.at("ca_distributions").get<std::string>());
        if (j.contains("random_seed")) cfg.random_seed = j.at("random_seed").get<uint64_t>();
        if (j.contains("support"))
            cfg.support = support_mode_from_string(j.at("support").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad experiment config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    const nlohmann::json j = parse_json_file(path);
    return experiment_config_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace algomarket
