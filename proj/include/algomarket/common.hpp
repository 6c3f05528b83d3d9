#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace algomarket {

inline constexpr const char* kVersion = "0.1.0";

// Bad input data or malformed files (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A run refused because it exceeds the configured budget (CLI exit code 3).
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form; identical input bits always render the
// same text, which keeps serialized files byte-stable.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace algomarket
