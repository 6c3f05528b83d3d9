#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "algomarket/io.hpp"
#include "algomarket/market.hpp"
#include "algomarket/rng.hpp"

using namespace algomarket;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("algomarket_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".csv");
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("ingest_csv reads date,close rows") {
    TempFile f("2000-01-03,100.5\n2000-01-04,101.0\n");
    const auto series = ingest_csv(f.path.string(), "demo");
    REQUIRE(series.symbol == "demo");
    REQUIRE(series.dates == std::vector<std::string>{"2000-01-03", "2000-01-04"});
    REQUIRE(series.closes == std::vector<double>{100.5, 101.0});
}

TEST_CASE("ingest_csv accepts an optional header and CRLF") {
    TempFile f("date,close\r\n2000-01-03,100.5\r\n2000-01-04,101.0\r\n");
    const auto series = ingest_csv(f.path.string());
    REQUIRE(series.closes.size() == 2);
}

TEST_CASE("ingest_csv sorts shuffled rows by date") {
    TempFile shuffled("2000-01-05,102.0\n2000-01-03,100.5\n2000-01-04,101.0\n");
    TempFile sorted("2000-01-03,100.5\n2000-01-04,101.0\n2000-01-05,102.0\n");
    const auto a = ingest_csv(shuffled.path.string(), "x");
    const auto b = ingest_csv(sorted.path.string(), "x");
    REQUIRE(a.dates == b.dates);
    REQUIRE(a.closes == b.closes);
}

TEST_CASE("ingest_csv reports the failing row") {
    TempFile bad("2000-01-03,abc\n");
    REQUIRE_THROWS_MATCHES(
        ingest_csv(bad.path.string()), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 1")));

    TempFile bad2("2000-01-03,100.0\nnot-a-date,101.0\n");
    REQUIRE_THROWS_MATCHES(
        ingest_csv(bad2.path.string()), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 2")));
}

TEST_CASE("ingest_csv rejects duplicates, short files and bad values") {
    TempFile dup("2000-01-03,100.0\n2000-01-03,101.0\n");
    REQUIRE_THROWS_MATCHES(
        ingest_csv(dup.path.string()), DataError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("duplicate date")));

    TempFile single("2000-01-03,100.0\n");
    REQUIRE_THROWS_AS(ingest_csv(single.path.string()), DataError);

    TempFile negative("2000-01-03,100.0\n2000-01-04,-5\n");
    REQUIRE_THROWS_AS(ingest_csv(negative.path.string()), DataError);

    REQUIRE_THROWS_AS(ingest_csv("/nonexistent/prices.csv"), DataError);
}

TEST_CASE("round_to_quantum follows the half-away rule") {
    REQUIRE(round_to_quantum(0.1, 0.4) == 0.0);
    REQUIRE_THAT(round_to_quantum(-0.6, 0.4), Catch::Matchers::WithinAbs(-0.8, 1e-12));
    REQUIRE(round_to_quantum(1.0, 0.0) == 1.0);
    REQUIRE_THAT(round_to_quantum(0.2, 0.4), Catch::Matchers::WithinAbs(0.4, 1e-12));
    REQUIRE_THAT(round_to_quantum(0.6, 0.4), Catch::Matchers::WithinAbs(0.8, 1e-12));
    REQUIRE_THAT(round_to_quantum(-1.0, 0.4), Catch::Matchers::WithinAbs(-1.2, 1e-12));
    REQUIRE_THROWS_AS(round_to_quantum(1.0, -0.1), DataError);
}

TEST_CASE("round_to_quantum is odd-symmetric") {
    Rng rng(31);
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = (rng.uniform01() - 0.5) * 20.0;
        const double q = 0.05 + rng.uniform01();
        REQUIRE(round_to_quantum(-x, q) == -round_to_quantum(x, q));
    }
}

TEST_CASE("larger quanta only censor more moves") {
    Rng rng(32);
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = (rng.uniform01() - 0.5) * 4.0;
        const double q1 = 0.1 + rng.uniform01();
        const double q2 = q1 + rng.uniform01();
        const bool zero1 = round_to_quantum(x, q1) == 0.0;
        const bool zero2 = round_to_quantum(x, q2) == 0.0;
        if (zero1) REQUIRE(zero2);  // the censoring set grows with q
    }
}

TEST_CASE("encode_directions applies rounding then the sign rule") {
    PriceSeries rising;
    rising.symbol = "r";
    rising.dates = {"2000-01-03", "2000-01-04", "2000-01-05"};
    rising.closes = {100.0, 101.0, 102.0};
    REQUIRE(encode_directions(rising, 0.4).bits == "11");

    PriceSeries mixed;
    mixed.symbol = "m";
    mixed.dates = {"2000-01-03", "2000-01-04", "2000-01-05"};
    mixed.closes = {100.0, 100.1, 99.5};
    REQUIRE(encode_directions(mixed, 0.4).bits == "00");

    PriceSeries flat;
    flat.symbol = "f";
    flat.dates = {"2000-01-03", "2000-01-04"};
    flat.closes = {100.0, 100.0};
    REQUIRE(encode_directions(flat, 0.0).bits == "0");
}

TEST_CASE("encode_directions output is one bit per consecutive pair") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const size_t len = rng.range(2, 120);
        PriceSeries series;
        series.symbol = "fuzz";
        double close = 50.0 + rng.uniform01() * 100.0;
        for (size_t i = 0; i < len; ++i) {
            char date[16];
            std::snprintf(date, sizeof date, "%04zu-01-01", 1000 + i);
            series.dates.emplace_back(date);
            series.closes.push_back(close);
            close = std::max(0.01, close + (rng.uniform01() - 0.5) * 2.0);
        }
        const auto encoded = encode_directions(series, rng.uniform01());
        REQUIRE(encoded.bits.size() == len - 1);
    }
}

TEST_CASE("with no quantum the encoding ignores a constant price shift") {
    Rng rng(78);
    PriceSeries series, shifted;
    series.symbol = shifted.symbol = "s";
    double close = 100.0;
    for (size_t i = 0; i < 60; ++i) {
        char date[16];
        std::snprintf(date, sizeof date, "%04zu-01-01", 1900 + i);
        series.dates.emplace_back(date);
        shifted.dates.emplace_back(date);
        series.closes.push_back(close);
        shifted.closes.push_back(close + 500.0);
        close = std::max(0.01, close + (rng.uniform01() - 0.5));
    }
    REQUIRE(encode_directions(series, 0.0).bits == encode_directions(shifted, 0.0).bits);
}

TEST_CASE("align_windows keeps the inclusive date range") {
    PriceSeries series;
    series.symbol = "w";
    series.dates = {"1980-01-02", "1984-06-01", "1989-12-29", "1995-03-01"};
    series.closes = {1.0, 2.0, 3.0, 4.0};

    const auto all = align_windows(series, "1979-01-01", "1996-01-01");
    REQUIRE(all.dates == series.dates);

    const auto decade = align_windows(series, "1980-01-01", "1990-01-01");
    REQUIRE(decade.dates == std::vector<std::string>{"1980-01-02", "1984-06-01", "1989-12-29"});

    REQUIRE_THROWS_AS(align_windows(series, "1984-01-01", "1985-01-01"), DataError);
    REQUIRE_THROWS_AS(align_windows(series, "1996-02-01", "1999-01-01"), DataError);
    REQUIRE_THROWS_AS(align_windows(series, "1990-01-01", "1980-01-01"), DataError);
}

TEST_CASE("direction series JSON round-trips") {
    DirectionSeries d;
    d.symbol = "demo";
    d.quantum = 0.4;
    d.bits = "0110";
    const nlohmann::json j = d;
    REQUIRE(j.at("bits").get<std::string>() == "0110");
    const auto back = j.get<DirectionSeries>();
    REQUIRE(back.symbol == d.symbol);
    REQUIRE(back.quantum == d.quantum);
    REQUIRE(back.bits == d.bits);

    nlohmann::json bad = j;
    bad["bits"] = "01x0";
    REQUIRE_THROWS_AS(bad.get<DirectionSeries>(), DataError);
}
