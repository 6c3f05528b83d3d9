#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "algomarket/common.hpp"
#include "algomarket/rng.hpp"

namespace algomarket {

// Independent fair bits; deterministic per seed.
inline std::string random_direction_series(uint64_t length, uint64_t seed) {
    if (length < 1) throw DataError("length must be >= 1");
    std::string bits(length, '0');
    Rng rng(seed);
    for (char& bit : bits) bit = static_cast<char>('0' + rng.bit());
    return bits;
}

struct GbmParams {
    double s0 = 100.0;   // initial price, > 0
    double sigma = 0.0;  // volatility per step, >= 0
    double mu = 0.0;     // drift per step (log drift in the multiplicative model)
    uint64_t steps = 1;
    uint64_t seed = 0;
};

inline void validate(const GbmParams& p) {
    if (!(p.s0 > 0.0)) throw DataError("s0 must be > 0");
    if (p.sigma < 0.0) throw DataError("sigma must be >= 0");
    if (p.steps < 1) throw DataError("steps must be >= 1");
}

// Geometric walk S_{t+1} = S_t * exp(mu + sigma * Z_t); returns steps + 1
// values starting at s0.
inline std::vector<double> gbm_series(const GbmParams& p) {
    validate(p);
    Rng rng(p.seed);
    std::vector<double> series;
    series.reserve(p.steps + 1);
    series.push_back(p.s0);
    for (uint64_t t = 0; t < p.steps; ++t)
        series.push_back(series.back() * std::exp(p.mu + p.sigma * rng.normal()));
    return series;
}

// Arithmetic walk S_{t+1} = S_t + sigma * Z_t (no drift term); same shape.
inline std::vector<double> additive_walk_series(const GbmParams& p) {
    validate(p);
    Rng rng(p.seed);
    std::vector<double> series;
    series.reserve(p.steps + 1);
    series.push_back(p.s0);
    for (uint64_t t = 0; t < p.steps; ++t)
        series.push_back(series.back() + p.sigma * rng.normal());
    return series;
}

struct TailBin {
    double center = 0.0;
    uint64_t observed = 0;
    double expected = 0.0;
    double excess = 0.0;
};

struct TailReport {
    double fitted_mean = 0.0;
    double fitted_std = 0.0;
    double bin_width = 0.0;
    std::vector<TailBin> tail_bins;  // only bins with excess > 0
};

namespace detail {

inline double normal_cdf(double x, double mean, double std) {
    return 0.5 * std::erfc(-(x - mean) / (std * std::sqrt(2.0)));
}

}  // namespace detail

// Fits a normal by sample moments (mean, n-1 standard deviation), bins the
// changes on multiples of bin_width, and reports each bin's observed count
// in excess of the fitted normal's expectation. Excess is whole events:
// the residual over the normal cover is rounded to the nearest count, so a
// bin short of one whole surplus event is not a tail candidate. Bins are
// centered at k * bin_width and collect changes rounding to that multiple.
inline TailReport isolate_tail(const std::vector<double>& changes, double bin_width) {
    if (!(bin_width > 0.0)) throw DataError("bin width must be > 0");
    if (changes.size() < 2) throw DataError("need at least 2 changes");
    const double n = static_cast<double>(changes.size());
    double mean = 0.0;
    for (const double x : changes) mean += x;
    mean /= n;
    double ss = 0.0;
    for (const double x : changes) ss += (x - mean) * (x - mean);
    if (ss == 0.0) throw DataError("changes have zero variance");
    const double std = std::sqrt(ss / (n - 1.0));

    std::map<int64_t, uint64_t> histogram;
    for (const double x : changes)
        ++histogram[static_cast<int64_t>(std::llround(x / bin_width))];

    TailReport report;
    report.fitted_mean = mean;
    report.fitted_std = std;
    report.bin_width = bin_width;
    for (const auto& [k, observed] : histogram) {
        const double center = static_cast<double>(k) * bin_width;
        const double expected =
            n * (detail::normal_cdf(center + bin_width / 2.0, mean, std) -
                 detail::normal_cdf(center - bin_width / 2.0, mean, std));
        const double excess =
            std::max(std::round(static_cast<double>(observed) - expected), 0.0);
        if (excess > 0.0) report.tail_bins.push_back({center, observed, expected, excess});
    }
    return report;
}

// CSV with header bin_center,observed,expected,excess.
inline std::string tail_report_to_csv(const TailReport& report) {
    std::string out = "bin_center,observed,expected,excess\n";
    for (const TailBin& bin : report.tail_bins) {
        out += format_double(bin.center);
        out += ',';
        out += std::to_string(bin.observed);
        out += ',';
        out += format_double(bin.expected);
        out += ',';
        out += format_double(bin.excess);
        out += '\n';
    }
    return out;
}

}  // namespace algomarket
