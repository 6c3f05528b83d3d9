#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "algomarket/common.hpp"
#include "algomarket/distribution.hpp"

namespace algomarket {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
    if (!out) throw DataError("short write to '" + path + "'");
}

inline nlohmann::json parse_json_file(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad JSON in '" + path + "': " + e.what());
    }
}

// Reads either a bare TupleDistribution object or a multi-length artifact
// of the form {"distributions": {"3": {...}, "4": {...}}, ...}.
inline std::map<int, TupleDistribution> load_distribution_set(const std::string& path) {
    const nlohmann::json j = parse_json_file(path);
    std::map<int, TupleDistribution> set;
    try {
        if (j.contains("distributions")) {
            for (const auto& [key, value] : j.at("distributions").items()) {
                const TupleDistribution d = value.get<TupleDistribution>();
                set.emplace(d.tuple_length, d);
            }
        } else {
            const TupleDistribution d = j.get<TupleDistribution>();
            set.emplace(d.tuple_length, d);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad distribution file '" + path + "': " + e.what());
    }
    if (set.empty()) throw DataError("'" + path + "' holds no distributions");
    return set;
}

// tuple_length -1 accepts a file with exactly one distribution.
inline TupleDistribution load_distribution(const std::string& path, int tuple_length = -1) {
    auto set = load_distribution_set(path);
    if (tuple_length == -1) {
        if (set.size() != 1)
            throw DataError("'" + path + "' holds several tuple lengths; pick one");
        return std::move(set.begin()->second);
    }
    const auto it = set.find(tuple_length);
    if (it == set.end())
        throw DataError("no " + std::to_string(tuple_length) + "-tuple distribution in '" +
                        path + "'");
    return std::move(it->second);
}

}  // namespace algomarket
