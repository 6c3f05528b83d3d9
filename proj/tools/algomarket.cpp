// Command-line surface for building, comparing and reporting tuple
// frequency distributions from market data and from machine enumerations.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 budget guard.
// All randomness flows through explicit --seed flags and outputs carry
// their resolved configuration, so identical invocations on identical
// inputs produce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "algomarket/algomarket.hpp"

namespace am = algomarket;
using nlohmann::json;

namespace {

constexpr const char* kEnvPrefix = "ALGOMARKET_";

// Mirrors a flag into an environment override: --shard-index becomes
// ALGOMARKET_SHARD_INDEX.
CLI::Option* env(CLI::Option* opt, const std::string& flag) {
    std::string name = kEnvPrefix;
    for (const char c : flag)
        name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return opt->envname(name);
}

// "3-10" or "3,5,7" or a mix of both.
std::vector<int> parse_lengths(const std::string& text) {
    std::vector<int> lengths;
    std::string token;
    std::istringstream stream(text);
    while (std::getline(stream, token, ',')) {
        const auto dash = token.find('-');
        try {
            if (dash == std::string::npos) {
                lengths.push_back(std::stoi(token));
            } else {
                const int lo = std::stoi(token.substr(0, dash));
                const int hi = std::stoi(token.substr(dash + 1));
                if (hi < lo) throw am::DataError("bad length range '" + token + "'");
                for (int n = lo; n <= hi; ++n) lengths.push_back(n);
            }
        } catch (const std::logic_error&) {
            throw am::DataError("bad tuple length list '" + text + "'");
        }
    }
    if (lengths.empty()) throw am::DataError("empty tuple length list");
    return lengths;
}

std::vector<std::pair<std::string, std::string>> parse_windows(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> windows;
    std::string token;
    std::istringstream stream(text);
    while (std::getline(stream, token, ',')) {
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            throw am::DataError("window '" + token + "' is not start:end");
        windows.emplace_back(token.substr(0, colon), token.substr(colon + 1));
    }
    if (windows.empty()) throw am::DataError("no windows given");
    return windows;
}

json meta_object(const std::string& command, json flags) {
    return json{{"tool", "algomarket"},
                {"version", am::kVersion},
                {"command", command},
                {"flags", std::move(flags)}};
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        am::write_text_file(out_path, content);
}

json distributions_to_json(const std::map<int, am::TupleDistribution>& dists) {
    json obj = json::object();
    for (const auto& [n, dist] : dists) obj[std::to_string(n)] = dist;
    return obj;
}

// ---------------------------------------------------------------------------
// encode

struct EncodeArgs {
    std::string csv, symbol, out;
    double quantum = 0.4;
};

void run_encode(const EncodeArgs& args) {
    const auto series =
        am::ingest_csv(args.csv, args.symbol.empty()
                                     ? std::filesystem::path(args.csv).stem().string()
                                     : args.symbol);
    const am::DirectionSeries encoded = am::encode_directions(series, args.quantum);
    json j = encoded;
    j["meta"] = meta_object("encode", json{{"csv", args.csv},
                                           {"symbol", encoded.symbol},
                                           {"quantum", args.quantum}});
    write_or_print(args.out, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// dist

struct DistArgs {
    std::string input, out, csv_out;
    int length = 3;
};

void run_dist(const DistArgs& args) {
    const std::string text = am::read_text_file(args.input);
    std::string bits;
    std::string label;
    if (!text.empty() && text.front() == '{') {
        const auto series = json::parse(text).get<am::DirectionSeries>();
        bits = series.bits;
        label = series.symbol + " q=" + am::format_double(series.quantum);
    } else {
        for (const char c : text)
            if (c == '0' || c == '1') bits.push_back(c);
        label = args.input;
    }
    const auto dist = am::build_distribution(bits, args.length, label);
    if (!args.csv_out.empty()) am::write_text_file(args.csv_out, am::distribution_to_csv(dist));
    json j = dist;
    j["meta"] = meta_object("dist", json{{"input", args.input}, {"length", args.length}});
    write_or_print(args.out, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// tm-enum

struct TmEnumArgs {
    int states = 2;
    std::string mode = "exhaustive";
    uint64_t samples = 0;
    uint64_t seed = 0;
    uint64_t bound = 0;
    uint32_t shards = 1;
    int shard_index = -1;  // -1 = run every shard
    std::string lengths = "3-10";
    unsigned jobs = am::default_jobs();
    bool force = false;
    std::string out;
};

std::string shard_path(const std::string& out, uint32_t index, uint32_t total) {
    return out + ".shard-" + std::to_string(index) + "-of-" + std::to_string(total) + ".json";
}

am::EnumerationJob job_from_args(const TmEnumArgs& args) {
    am::EnumerationJob job;
    job.n_states = args.states;
    job.step_bound = args.bound;
    job.seed = args.seed;
    job.sample_count = args.samples;
    job.shard_total = args.shards;
    job.force_exhaustive = args.force;

    std::string mode = args.mode;
    if (mode.rfind("sample", 0) == 0) {
        job.mode = am::EnumerationJob::Mode::Sample;
        // compact form sample:COUNT[:seed=S]
        std::istringstream stream(mode);
        std::string token;
        std::getline(stream, token, ':');
        if (std::getline(stream, token, ':')) job.sample_count = std::stoull(token);
        if (std::getline(stream, token, ':')) {
            if (token.rfind("seed=", 0) != 0)
                throw am::DataError("bad mode suffix '" + token + "'");
            job.seed = std::stoull(token.substr(5));
        }
    } else if (mode == "exhaustive") {
        job.mode = am::EnumerationJob::Mode::Exhaustive;
    } else {
        throw am::DataError("unknown mode '" + mode + "'");
    }
    return job;
}

void run_tm_enum(const TmEnumArgs& args) {
    if (args.out.empty()) throw am::DataError("tm-enum needs --out");
    const auto lengths = parse_lengths(args.lengths);
    am::EnumerationJob base = job_from_args(args);
    base.step_bound = am::resolve_step_bound(base);

    std::vector<uint32_t> todo;
    if (args.shard_index >= 0) {
        if (static_cast<uint32_t>(args.shard_index) >= args.shards)
            throw am::DataError("shard index " + std::to_string(args.shard_index) +
                                " out of range for " + std::to_string(args.shards) + " shards");
        todo.push_back(static_cast<uint32_t>(args.shard_index));
    } else {
        for (uint32_t i = 0; i < args.shards; ++i) todo.push_back(i);
    }

    for (const uint32_t index : todo) {
        const std::string path = shard_path(args.out, index, args.shards);
        am::EnumerationJob job = base;
        job.shard_index = index;
        if (std::filesystem::exists(path)) {
            const json existing = am::parse_json_file(path);
            const auto recorded = existing.at("job").get<am::EnumerationJob>();
            if (recorded.n_states != job.n_states || recorded.step_bound != job.step_bound ||
                recorded.mode != job.mode || recorded.sample_count != job.sample_count ||
                recorded.seed != job.seed || recorded.shard_index != job.shard_index ||
                recorded.shard_total != job.shard_total ||
                existing.at("tuple_lengths").get<std::vector<int>>() != lengths)
                throw am::DataError("checkpoint '" + path + "' was produced by a different job");
            std::cerr << "shard " << index << "/" << args.shards << " already done, skipping\n";
            continue;
        }
        std::cerr << "running shard " << index << "/" << args.shards << "\n";
        const auto dists = am::enumerate_distribution(job, lengths, args.jobs);
        json checkpoint = {{"job", job},
                           {"tuple_lengths", lengths},
                           {"distributions", distributions_to_json(dists)}};
        am::write_text_file(path, checkpoint.dump(2) + "\n");
        std::cerr << "shard " << index << "/" << args.shards << " written\n";
    }

    // merge once every shard checkpoint is present
    std::vector<std::string> shard_files;
    for (uint32_t i = 0; i < args.shards; ++i) {
        const std::string path = shard_path(args.out, i, args.shards);
        if (!std::filesystem::exists(path)) {
            std::cerr << "shard " << i << " pending; merged output not written yet\n";
            return;
        }
        shard_files.push_back(path);
    }
    std::map<int, std::vector<am::TupleDistribution>> parts;
    for (const auto& path : shard_files) {
        for (auto& [n, dist] : am::load_distribution_set(path)) parts[n].push_back(std::move(dist));
    }
    std::map<int, am::TupleDistribution> merged;
    for (auto& [n, vec] : parts) merged.emplace(n, am::merge_shards(vec));

    json out = {{"job", base},
                {"tuple_lengths", lengths},
                {"distributions", distributions_to_json(merged)}};
    out["meta"] = meta_object(
        "tm-enum", json{{"states", args.states},
                        {"mode", am::to_string(base.mode)},
                        {"samples", base.sample_count},
                        {"seed", base.seed},
                        {"bound", base.step_bound},
                        {"shards", args.shards}});
    am::write_text_file(args.out, out.dump(2) + "\n");
    std::cerr << "merged distribution written to " << args.out << "\n";
}

// ---------------------------------------------------------------------------
// ca-sample

struct CaSampleArgs {
    uint64_t count = 10000;
    uint64_t steps = 100;
    uint64_t seed = 0;
    std::string lengths = "3-10";
    unsigned jobs = am::default_jobs();
    std::string out, pgm;
};

void run_ca_sample(const CaSampleArgs& args) {
    if (args.out.empty()) throw am::DataError("ca-sample needs --out");
    const auto lengths = parse_lengths(args.lengths);
    const auto dists = am::sample_distribution(args.count, args.steps, lengths, args.seed,
                                               args.jobs);
    if (!args.pgm.empty()) {
        // dump the first sampled rule's evolution for visual inspection
        am::Rng master(args.seed);
        const auto code = static_cast<uint32_t>(master.below(am::kTotalisticRuleSpace));
        const auto evo = am::evolve(am::TotalisticRule(code),
                                    am::random_initial(am::derive_seed(args.seed, 0)), args.steps);
        am::write_pgm(evo, args.pgm);
    }
    json out = {{"tuple_lengths", lengths}, {"distributions", distributions_to_json(dists)}};
    out["meta"] = meta_object("ca-sample", json{{"count", args.count},
                                                {"steps", args.steps},
                                                {"seed", args.seed}});
    am::write_text_file(args.out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    std::string left, right, support = "intersection";
    int length = -1;
};

void run_compare(const CompareArgs& args) {
    const auto a = am::load_distribution(args.left, args.length);
    const auto b = am::load_distribution(args.right, args.length);
    const auto report = am::spearman(a, b, am::support_mode_from_string(args.support));
    json j = report;
    j["cell"] = am::format_cell(report);
    j["meta"] = meta_object("compare", json{{"left", args.left},
                                            {"right", args.right},
                                            {"length", args.length},
                                            {"support", args.support}});
    std::cout << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// matrix / backtest

struct MatrixArgs {
    std::string config, format = "csv", out;
    unsigned jobs = am::default_jobs();
    std::string windows;  // backtest only
};

json config_meta(const char* command, const MatrixArgs& args, const am::ExperimentConfig& cfg) {
    json markets = json::array();
    for (const auto& market : cfg.markets)
        markets.push_back(json{{"symbol", market.symbol}, {"csv", market.csv_path}});
    return meta_object(command, json{{"config", args.config},
                                     {"format", args.format},
                                     {"markets", markets},
                                     {"quantum", cfg.quantum},
                                     {"tuple_lengths", cfg.tuple_lengths},
                                     {"comparisons", cfg.comparisons},
                                     {"random_seed", cfg.random_seed},
                                     {"support", am::to_string(cfg.support)},
                                     {"windows", args.windows}});
}

void run_matrix(const MatrixArgs& args) {
    const auto cfg = am::load_experiment_config(args.config);
    const auto format = am::report_format_from_string(args.format);
    const auto matrices = am::run_experiment(cfg, args.jobs);
    if (args.out.empty()) {
        for (const auto& [comparison, matrix] : matrices)
            std::cout << am::matrix_to_csv(matrix) << "\n";
        return;
    }
    for (const auto& path : am::emit_report(matrices, format, args.out))
        std::cout << path << "\n";
    const std::string meta_path = args.out + "_meta.json";
    am::write_text_file(meta_path, config_meta("matrix", args, cfg).dump(2) + "\n");
    std::cout << meta_path << "\n";
}

void run_backtest(const MatrixArgs& args) {
    const auto cfg = am::load_experiment_config(args.config);
    const auto format = am::report_format_from_string(args.format);
    const auto windows = parse_windows(args.windows);
    const auto results = am::backtest(cfg, windows, args.jobs);
    for (const auto& [label, result] : results) {
        for (const auto& warning : result.warnings)
            std::cerr << "window " << label << ": " << warning << "\n";
        if (args.out.empty()) {
            for (const auto& [comparison, matrix] : result.matrices)
                std::cout << "# window " << label << "\n" << am::matrix_to_csv(matrix) << "\n";
            continue;
        }
        for (const auto& path : am::emit_report(result.matrices, format, args.out + "_" + label))
            std::cout << path << "\n";
    }
    if (!args.out.empty()) {
        const std::string meta_path = args.out + "_meta.json";
        am::write_text_file(meta_path, config_meta("backtest", args, cfg).dump(2) + "\n");
        std::cout << meta_path << "\n";
    }
}

// ---------------------------------------------------------------------------
// rule90 / tail

struct Rule90Args {
    uint64_t width = 100, steps = 100, seed = 0;
    std::string out;
};

void run_rule90(const Rule90Args& args) {
    const auto series = am::rule90_price_series(args.width, args.steps, args.seed);
    json j = {{"width", args.width}, {"steps", args.steps}, {"seed", args.seed},
              {"values", series}};
    j["meta"] = meta_object("rule90", json{{"width", args.width},
                                           {"steps", args.steps},
                                           {"seed", args.seed}});
    write_or_print(args.out, j.dump(2) + "\n");
}

struct TailArgs {
    std::string csv, out;
    double bin_width = 0.4;
};

void run_tail(const TailArgs& args) {
    const auto series = am::ingest_csv(args.csv);
    std::vector<double> changes;
    changes.reserve(series.closes.size() - 1);
    for (size_t i = 0; i + 1 < series.closes.size(); ++i)
        changes.push_back(series.closes[i + 1] - series.closes[i]);
    const auto report = am::isolate_tail(changes, args.bin_width);
    std::cerr << "fitted mean " << report.fitted_mean << ", std " << report.fitted_std << "\n";
    write_or_print(args.out, am::tail_report_to_csv(report));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tuple-frequency experiments on market direction series"};
    app.require_subcommand(1);

    EncodeArgs encode_args;
    auto* encode = app.add_subcommand("encode", "Encode a price CSV into a direction series");
    encode->add_option("csv", encode_args.csv, "price CSV (date,close rows)")->required();
    encode->add_option("--symbol", encode_args.symbol, "symbol label (default: file stem)");
    env(encode->add_option("--quantum", encode_args.quantum,
                           "price-difference rounding quantum (0 disables)"),
        "quantum");
    encode->add_option("--out", encode_args.out, "output JSON path (default: stdout)");

    DistArgs dist_args;
    auto* dist = app.add_subcommand("dist", "Build a tuple distribution from a direction series");
    dist->add_option("input", dist_args.input, "direction-series JSON or raw 0/1 text")
        ->required();
    env(dist->add_option("--length", dist_args.length, "tuple length"), "length");
    dist->add_option("--out", dist_args.out, "output JSON path (default: stdout)");
    dist->add_option("--csv", dist_args.csv_out, "also write tuple,count,probability CSV here");

    TmEnumArgs tm_args;
    auto* tm = app.add_subcommand("tm-enum", "Enumerate Turing machine output distributions");
    env(tm->add_option("--states", tm_args.states, "machine states"), "states");
    env(tm->add_option("--mode", tm_args.mode,
                       "exhaustive | sample | sample:COUNT[:seed=S]"),
        "mode");
    env(tm->add_option("--samples", tm_args.samples, "sample size in sample mode"), "samples");
    env(tm->add_option("--seed", tm_args.seed, "sampling seed"), "seed");
    env(tm->add_option("--bound", tm_args.bound,
                       "step bound (default: the known halting bound)"),
        "bound");
    env(tm->add_option("--shards", tm_args.shards, "total shard count"), "shards");
    env(tm->add_option("--shard-index", tm_args.shard_index,
                       "run only this shard (default: all)"),
        "shard-index");
    env(tm->add_option("--lengths", tm_args.lengths, "tuple lengths, e.g. 3-10 or 3,5"),
        "lengths");
    env(tm->add_option("--jobs", tm_args.jobs, "worker threads"), "jobs");
    tm->add_flag("--force", tm_args.force, "allow exhaustive runs beyond 3 states");
    tm->add_option("--out", tm_args.out, "merged output path (checkpoints beside it)")
        ->required();

    CaSampleArgs ca_args;
    auto* ca = app.add_subcommand("ca-sample", "Sample totalistic cellular automata");
    env(ca->add_option("--count", ca_args.count, "rules to sample"), "count");
    env(ca->add_option("--steps", ca_args.steps, "evolution steps per rule"), "steps");
    env(ca->add_option("--seed", ca_args.seed, "sampling seed"), "seed");
    env(ca->add_option("--lengths", ca_args.lengths, "tuple lengths"), "lengths");
    env(ca->add_option("--jobs", ca_args.jobs, "worker threads"), "jobs");
    ca->add_option("--out", ca_args.out, "output path")->required();
    ca->add_option("--pgm", ca_args.pgm, "dump the first evolution as a PGM image");

    CompareArgs compare_args;
    auto* compare = app.add_subcommand("compare", "Spearman-compare two distribution files");
    compare->add_option("left", compare_args.left)->required();
    compare->add_option("right", compare_args.right)->required();
    env(compare->add_option("--length", compare_args.length,
                            "tuple length to pick from multi-length files"),
        "length");
    env(compare->add_option("--support", compare_args.support, "intersection | union"),
        "support");

    MatrixArgs matrix_args;
    auto* matrix = app.add_subcommand("matrix", "Run the configured correlation matrices");
    matrix->add_option("--config", matrix_args.config, "experiment config JSON")->required();
    env(matrix->add_option("--format", matrix_args.format, "csv | json | markdown"), "format");
    matrix->add_option("--out", matrix_args.out, "output file prefix (default: stdout)");
    env(matrix->add_option("--jobs", matrix_args.jobs, "worker threads"), "jobs");

    MatrixArgs backtest_args;
    auto* backtest = app.add_subcommand("backtest", "Matrices over historical windows");
    backtest->add_option("--config", backtest_args.config, "experiment config JSON")->required();
    backtest->add_option("--windows", backtest_args.windows,
                         "comma list of start:end date windows")
        ->required();
    env(backtest->add_option("--format", backtest_args.format, "csv | json | markdown"),
        "format");
    backtest->add_option("--out", backtest_args.out, "output file prefix (default: stdout)");
    env(backtest->add_option("--jobs", backtest_args.jobs, "worker threads"), "jobs");

    Rule90Args rule90_args;
    auto* rule90 = app.add_subcommand("rule90", "Rule-90 toy market price series");
    env(rule90->add_option("--width", rule90_args.width, "cyclic row width"), "width");
    env(rule90->add_option("--steps", rule90_args.steps, "steps (= output length)"), "steps");
    env(rule90->add_option("--seed", rule90_args.seed, "initial row seed"), "seed");
    rule90->add_option("--out", rule90_args.out, "output JSON path (default: stdout)");

    TailArgs tail_args;
    auto* tail = app.add_subcommand("tail", "Isolate long-tail events from a price CSV");
    tail->add_option("csv", tail_args.csv, "price CSV (date,close rows)")->required();
    env(tail->add_option("--bin-width", tail_args.bin_width, "histogram bin width"),
        "bin-width");
    tail->add_option("--out", tail_args.out, "output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*encode) run_encode(encode_args);
        if (*dist) run_dist(dist_args);
        if (*tm) run_tm_enum(tm_args);
        if (*ca) run_ca_sample(ca_args);
        if (*compare) run_compare(compare_args);
        if (*matrix) run_matrix(matrix_args);
        if (*backtest) run_backtest(backtest_args);
        if (*rule90) run_rule90(rule90_args);
        if (*tail) run_tail(tail_args);
    } catch (const am::BudgetError& e) {
        std::cerr << "budget guard: " << e.what() << "\n";
        return 3;
    } catch (const am::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
