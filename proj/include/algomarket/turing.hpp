#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "algomarket/common.hpp"
#include "algomarket/distribution.hpp"
#include "algomarket/parallel.hpp"
#include "algomarket/rng.hpp"

namespace algomarket {

// One transition of an (n-state, 2-symbol) machine: write a symbol, then
// either halt in place or move one cell and switch state.
struct TmAction {
    uint8_t write = 0;
    bool halt = true;
    int8_t move = 0;         // -1 left, +1 right; meaningless when halt
    uint8_t next_state = 0;  // 0-based; meaningless when halt
};

// Transition table with entry (state s, read symbol r) at index 2*s + r.
// Each entry has 4*n_states + 2 possible actions, so the space holds
// (4*n_states + 2)^(2*n_states) machines.
struct TuringMachineSpec {
    int n_states = 0;
    std::vector<TmAction> table;
};

struct RunResult {
    bool halted = false;
    uint64_t steps = 0;
    std::string output;  // tape between min and max visited head positions
};

// Machine indices fit in uint64 for n_states <= 6.
inline constexpr int kMaxIndexableStates = 6;

inline uint64_t tm_space_size(int n_states) {
    if (n_states < 1 || n_states > kMaxIndexableStates)
        throw DataError("state count out of range: " + std::to_string(n_states));
    const uint64_t base = 4 * static_cast<uint64_t>(n_states) + 2;
    uint64_t size = 1;
    for (int e = 0; e < 2 * n_states; ++e) size *= base;
    return size;
}

// Largest number of steps any halting machine of this size takes from a
// uniform tape; 0 when unknown. Running to this bound decides halting for
// the whole space (the symbol-swap bijection extends the blank-tape maxima
// to the all-1 background).
inline uint64_t busy_beaver_bound(int n_states) {
    switch (n_states) {
        case 1: return 1;
        case 2: return 6;
        case 3: return 21;
        case 4: return 107;
        default: return 0;
    }
}

namespace detail {

// Action codes 0..4n+1, in this order: code 0/1 halt writing 0/1; code
// 2 + k encodes write k%2, move left when (k/2)%2 == 0 else right, and
// next state k/4.
inline TmAction decode_action(uint64_t code, int n_states) {
    TmAction a;
    if (code < 2) {
        a.write = static_cast<uint8_t>(code);
        a.halt = true;
        return a;
    }
    const uint64_t k = code - 2;
    a.halt = false;
    a.write = static_cast<uint8_t>(k & 1);
    a.move = ((k >> 1) & 1) ? int8_t{1} : int8_t{-1};
    a.next_state = static_cast<uint8_t>(k >> 2);
    if (a.next_state >= n_states) throw DataError("action code out of range");
    return a;
}

inline uint64_t encode_action(const TmAction& a, int n_states) {
    if (a.halt) {
        if (a.write > 1) throw DataError("bad write symbol in action");
        return a.write;
    }
    if (a.write > 1 || (a.move != -1 && a.move != 1) || a.next_state >= n_states)
        throw DataError("malformed machine action");
    return 2 + (a.write & 1) + (a.move == 1 ? 2 : 0) + 4 * static_cast<uint64_t>(a.next_state);
}

inline void machine_from_index_into(uint64_t idx, int n_states, TuringMachineSpec& spec) {
    const uint64_t base = 4 * static_cast<uint64_t>(n_states) + 2;
    spec.n_states = n_states;
    spec.table.resize(2 * static_cast<size_t>(n_states));
    for (auto& entry : spec.table) {
        entry = decode_action(idx % base, n_states);
        idx /= base;
    }
}

}  // namespace detail

// Mixed-radix decoding of the machine space: entry (state, symbol), ordered
// by state then symbol, is the successive base-(4n+2) digit of `idx`,
// least significant first. Bijective with index_from_machine.
inline TuringMachineSpec machine_from_index(uint64_t idx, int n_states) {
    if (idx >= tm_space_size(n_states))
        throw DataError("machine index " + std::to_string(idx) + " out of range for " +
                        std::to_string(n_states) + " states");
    TuringMachineSpec spec;
    detail::machine_from_index_into(idx, n_states, spec);
    return spec;
}

inline uint64_t index_from_machine(const TuringMachineSpec& spec) {
    if (spec.n_states < 1 || spec.n_states > kMaxIndexableStates ||
        spec.table.size() != 2 * static_cast<size_t>(spec.n_states))
        throw DataError("malformed machine spec");
    const uint64_t base = 4 * static_cast<uint64_t>(spec.n_states) + 2;
    uint64_t idx = 0;
    for (size_t e = spec.table.size(); e-- > 0;)
        idx = idx * base + detail::encode_action(spec.table[e], spec.n_states);
    return idx;
}

// Reusable simulator. The tape buffer covers small bounds outright and
// otherwise grows geometrically as the head widens its extent, so storage
// follows the visited region rather than the step bound.
class MachineRunner {
  public:
    RunResult run(const TuringMachineSpec& spec, int background, uint64_t step_bound) {
        if (step_bound < 1) throw DataError("step bound must be >= 1");
        if (background != 0 && background != 1) throw DataError("background must be 0 or 1");
        const auto bg = static_cast<uint8_t>(background);
        const size_t width =
            static_cast<size_t>(std::min<uint64_t>(2 * step_bound + 3, 257));
        tape_.assign(width, bg);
        int64_t offset = static_cast<int64_t>(width / 2);  // buffer index of cell 0

        int64_t head = 0, lo = 0, hi = 0;
        int state = 0;
        RunResult result;
        for (uint64_t step = 1; step <= step_bound; ++step) {
            const TmAction& act = spec.table[2 * static_cast<size_t>(state) + tape_[head + offset]];
            tape_[head + offset] = act.write;
            if (act.halt) {
                result.halted = true;
                result.steps = step;
                result.output.assign(tape_.begin() + (lo + offset),
                                     tape_.begin() + (hi + offset) + 1);
                for (char& c : result.output) c += '0';
                return result;
            }
            head += act.move;
            state = act.next_state;
            lo = std::min(lo, head);
            hi = std::max(hi, head);
            if (head + offset == 0 || head + offset == static_cast<int64_t>(tape_.size()) - 1)
                offset = regrow(bg, lo, hi, offset);
        }
        result.halted = false;
        result.steps = step_bound;
        return result;
    }

  private:
    // Recenter the written segment in a doubled buffer.
    int64_t regrow(uint8_t bg, int64_t lo, int64_t hi, int64_t offset) {
        const size_t extent = static_cast<size_t>(hi - lo + 1);
        std::vector<uint8_t> wider(2 * tape_.size() + extent, bg);
        const int64_t new_offset = static_cast<int64_t>(wider.size() / 2) - (lo + hi) / 2;
        for (int64_t pos = lo; pos <= hi; ++pos) wider[pos + new_offset] = tape_[pos + offset];
        tape_.swap(wider);
        return new_offset;
    }

    std::vector<uint8_t> tape_;
};

// Simulates from state 1 with the head at the origin on a uniform
// `background` tape. Non-halting within the bound is a value, not an error.
inline RunResult run_machine(const TuringMachineSpec& spec, int background, uint64_t step_bound) {
    MachineRunner runner;
    return runner.run(spec, background, step_bound);
}

struct EnumerationJob {
    enum class Mode { Exhaustive, Sample };

    int n_states = 2;
    uint64_t step_bound = 0;  // 0 = busy_beaver_bound(n_states)
    Mode mode = Mode::Exhaustive;
    uint64_t sample_count = 0;  // machines drawn in Sample mode
    uint64_t seed = 0;
    uint32_t shard_index = 0;
    uint32_t shard_total = 1;
    bool force_exhaustive = false;  // lifts the n_states > 3 space-size guard
};

inline constexpr int kExhaustiveStateGuard = 3;

namespace detail {

struct ShardRange {
    uint64_t lo, hi;
};

inline ShardRange shard_range(uint64_t scope, uint32_t index, uint32_t total) {
    if (total == 0 || index >= total) throw DataError("shard index out of range");
    const uint64_t lo = scope / total * index + std::min<uint64_t>(index, scope % total);
    const uint64_t hi = lo + scope / total + (index < scope % total ? 1 : 0);
    return {lo, hi};
}

inline std::string job_label(const EnumerationJob& job, uint64_t bound) {
    std::string label = "tm:states=" + std::to_string(job.n_states) +
                        ",bound=" + std::to_string(bound);
    if (job.mode == EnumerationJob::Mode::Exhaustive) {
        label += ",mode=exhaustive";
    } else {
        label += ",mode=sample,count=" + std::to_string(job.sample_count) +
                 ",seed=" + std::to_string(job.seed);
    }
    return label;
}

}  // namespace detail

inline uint64_t resolve_step_bound(const EnumerationJob& job) {
    uint64_t bound = job.step_bound != 0 ? job.step_bound : busy_beaver_bound(job.n_states);
    if (bound == 0)
        throw DataError("no known halting bound for " + std::to_string(job.n_states) +
                        "-state machines; set step_bound explicitly");
    return bound;
}

// Runs every machine in the job's scope on background 0 and background 1;
// each halting run whose output length matches a requested length adds one
// count for that output. Scope is the machine's shard of either the full
// space (exhaustive) or `sample_count` seeded uniform draws.
inline std::map<int, TupleDistribution> enumerate_distribution(
    const EnumerationJob& job, const std::vector<int>& tuple_lengths,
    unsigned jobs = default_jobs()) {
    if (tuple_lengths.empty()) throw DataError("no tuple lengths requested");
    std::array<int, 63> length_slot;
    length_slot.fill(-1);
    for (size_t i = 0; i < tuple_lengths.size(); ++i) {
        const int n = tuple_lengths[i];
        if (n < 1 || n > 62) throw DataError("tuple length out of range: " + std::to_string(n));
        length_slot[static_cast<size_t>(n)] = static_cast<int>(i);
    }

    const uint64_t bound = resolve_step_bound(job);
    const uint64_t space = tm_space_size(job.n_states);
    uint64_t scope = 0;
    if (job.mode == EnumerationJob::Mode::Exhaustive) {
        if (job.n_states > kExhaustiveStateGuard && !job.force_exhaustive)
            throw BudgetError("exhaustive enumeration of the " + std::to_string(job.n_states) +
                              "-state space (" + std::to_string(space) +
                              " machines) exceeds the desk budget; use sampling or force");
        const uint64_t known = busy_beaver_bound(job.n_states);
        if (known != 0 && bound < known)
            throw DataError("exhaustive mode needs step_bound >= " + std::to_string(known) +
                            " to decide halting for every " + std::to_string(job.n_states) +
                            "-state machine");
        scope = space;
    } else {
        if (job.sample_count == 0) throw DataError("sample mode needs sample_count >= 1");
        scope = job.sample_count;
    }

    const auto [shard_lo, shard_hi] = detail::shard_range(scope, job.shard_index, job.shard_total);
    const uint64_t shard_size = shard_hi - shard_lo;
    const bool sampled = job.mode == EnumerationJob::Mode::Sample;

    using CountMap = std::map<std::string, uint64_t>;
    jobs = std::max(1u, jobs);
    std::vector<std::vector<CountMap>> worker_counts(
        jobs, std::vector<CountMap>(tuple_lengths.size()));

    parallel_ranges(shard_size, jobs, [&](unsigned worker, uint64_t lo, uint64_t hi) {
        TuringMachineSpec spec;
        MachineRunner runner;
        auto& slots = worker_counts[worker];
        for (uint64_t pos = lo; pos < hi; ++pos) {
            const uint64_t draw = shard_lo + pos;
            const uint64_t idx =
                sampled ? Rng(derive_seed(job.seed, draw)).below(space) : draw;
            detail::machine_from_index_into(idx, job.n_states, spec);
            for (int background = 0; background <= 1; ++background) {
                const RunResult r = runner.run(spec, background, bound);
                if (!r.halted || r.output.size() > 62) continue;
                const int slot = length_slot[r.output.size()];
                if (slot >= 0) ++slots[static_cast<size_t>(slot)][r.output];
            }
        }
    });

    std::map<int, TupleDistribution> result;
    const std::string label = detail::job_label(job, bound);
    for (size_t i = 0; i < tuple_lengths.size(); ++i) {
        TupleDistribution d;
        d.tuple_length = tuple_lengths[i];
        d.source_label = label;
        for (unsigned w = 0; w < jobs; ++w)
            for (const auto& [output, count] : worker_counts[w][i]) d.counts[output] += count;
        for (const auto& entry : d.counts) d.total += entry.second;
        result.emplace(tuple_lengths[i], std::move(d));
    }
    return result;
}

inline TupleDistribution merge_shards(const std::vector<TupleDistribution>& parts) {
    return merge_distributions(parts);
}

inline std::string to_string(EnumerationJob::Mode mode) {
    return mode == EnumerationJob::Mode::Exhaustive ? "exhaustive" : "sample";
}

inline void to_json(nlohmann::json& j, const EnumerationJob& job) {
    j = nlohmann::json{{"n_states", job.n_states},
                       {"step_bound", resolve_step_bound(job)},
                       {"mode", to_string(job.mode)},
                       {"sample_count", job.sample_count},
                       {"seed", job.seed},
                       {"shard_index", job.shard_index},
                       {"shard_total", job.shard_total}};
}

inline void from_json(const nlohmann::json& j, EnumerationJob& job) {
    job.n_states = j.at("n_states").get<int>();
    job.step_bound = j.at("step_bound").get<uint64_t>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "exhaustive")
        job.mode = EnumerationJob::Mode::Exhaustive;
    else if (mode == "sample")
        job.mode = EnumerationJob::Mode::Sample;
    else
        throw DataError("unknown enumeration mode '" + mode + "'");
    job.sample_count = j.at("sample_count").get<uint64_t>();
    job.seed = j.at("seed").get<uint64_t>();
    job.shard_index = j.at("shard_index").get<uint32_t>();
    job.shard_total = j.at("shard_total").get<uint32_t>();
}

}  // namespace algomarket
