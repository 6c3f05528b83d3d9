#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "algomarket/io.hpp"

namespace {

const std::string kCli = ALGOMARKET_CLI_PATH;
const std::string kData = ALGOMARKET_DATA_DIR;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("algomarket_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

int run(const std::string& args) {
    const std::string command = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
    REQUIRE(run("") == 1);
    REQUIRE(run("no-such-subcommand") == 1);
    REQUIRE(run("encode") == 1);  // missing required argument
    REQUIRE(run("--help") == 0);
}

TEST_CASE("data errors exit with code 2") {
    REQUIRE(run("encode /nonexistent/prices.csv") == 2);
    TempDir dir;
    const auto bad = dir.path / "bad.csv";
    std::ofstream(bad) << "2000-01-03,abc\n";
    REQUIRE(run("encode " + bad.string()) == 2);
}

TEST_CASE("the exhaustive four-state budget guard exits with code 3") {
    TempDir dir;
    REQUIRE(run("tm-enum --states 4 --mode exhaustive --out " +
                (dir.path / "tm.json").string()) == 3);
}

TEST_CASE("encode matches the bundled golden bit string") {
    TempDir dir;
    const auto out = (dir.path / "enc.json").string();
    REQUIRE(run("encode " + kData + "/golden/prices12.csv --quantum 0.4 --out " + out) == 0);
    const auto j = algomarket::parse_json_file(out);
    std::string golden = algomarket::read_text_file(kData + "/golden/prices12.bits");
    while (!golden.empty() && (golden.back() == '\n' || golden.back() == '\r'))
        golden.pop_back();
    REQUIRE(j.at("bits").get<std::string>() == golden);
    REQUIRE(j.at("quantum").get<double>() == 0.4);
    REQUIRE(j.at("meta").at("command") == "encode");

    // 0.4 is also the default quantum
    const auto defaulted = (dir.path / "enc_default.json").string();
    REQUIRE(run("encode " + kData + "/golden/prices12.csv --out " + defaulted) == 0);
    const auto jd = algomarket::parse_json_file(defaulted);
    REQUIRE(jd.at("quantum").get<double>() == 0.4);
    REQUIRE(jd.at("bits").get<std::string>() == golden);
}

TEST_CASE("environment variables mirror flags") {
    TempDir dir;
    const auto out = (dir.path / "enc.json").string();
    const std::string command = "ALGOMARKET_QUANTUM=0 " + kCli + " encode " + kData +
                                "/golden/prices12.csv --out " + out + " >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
    const auto j = algomarket::parse_json_file(out);
    REQUIRE(j.at("quantum").get<double>() == 0.0);
}

TEST_CASE("dist and compare chain on encoded output") {
    TempDir dir;
    const auto enc = (dir.path / "enc.json").string();
    const auto dist = (dir.path / "dist.json").string();
    const auto csv = (dir.path / "dist.csv").string();
    REQUIRE(run("encode " + kData + "/markets/alpha.csv --quantum 0.4 --out " + enc) == 0);
    REQUIRE(run("dist " + enc + " --length 3 --out " + dist + " --csv " + csv) == 0);
    const auto d = algomarket::load_distribution(dist, 3);
    REQUIRE(d.total > 0);
    REQUIRE(algomarket::read_text_file(csv).rfind("tuple,count,probability\n", 0) == 0);

    const std::string compare_out = (dir.path / "cmp.json").string();
    const std::string command = kCli + " compare " + dist + " " + dist + " > " + compare_out;
    REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
    const auto report = algomarket::parse_json_file(compare_out);
    REQUIRE(report.at("rho").get<double>() == 1.0);
    REQUIRE(report.at("cell").get<std::string>() == "1|" +
                std::to_string(report.at("n_compared").get<uint64_t>()));
}

TEST_CASE("tm-enum writes shard checkpoints and resumes") {
    TempDir dir;
    const auto out = (dir.path / "tm2.json").string();
    const std::string flags = " --states 2 --mode exhaustive --lengths 2,3 --shards 2 --out " +
                              out + " --jobs 2";
    REQUIRE(run("tm-enum --shard-index 0" + flags) == 0);
    REQUIRE(std::filesystem::exists(out + ".shard-0-of-2.json"));
    REQUIRE_FALSE(std::filesystem::exists(out));  // merge still pending
    REQUIRE(run("tm-enum" + flags) == 0);         // fills in shard 1, merges
    REQUIRE(std::filesystem::exists(out));
    const auto merged = algomarket::load_distribution_set(out);
    REQUIRE(merged.count(2) == 1);
    REQUIRE(merged.count(3) == 1);

    // a conflicting resume attempt is rejected
    REQUIRE(run("tm-enum --states 2 --mode exhaustive --lengths 2 --shards 2 --out " + out) ==
            2);

    // shard index beyond the shard count
    REQUIRE(run("tm-enum --states 2 --shards 2 --shard-index 5 --out " +
                (dir.path / "oob.json").string()) == 2);
}

TEST_CASE("tm-enum accepts the compact sample mode syntax") {
    TempDir dir;
    const auto out = (dir.path / "tm4.json").string();
    REQUIRE(run("tm-enum --states 4 --mode sample:3000:seed=7 --lengths 3 --jobs 2 --out " +
                out) == 0);
    const auto set = algomarket::load_distribution_set(out);
    REQUIRE(set.at(3).source_label.find("mode=sample,count=3000,seed=7") != std::string::npos);
}

TEST_CASE("rule90 emits one value per step") {
    TempDir dir;
    const auto out = (dir.path / "r90.json").string();
    REQUIRE(run("rule90 --width 30 --steps 50 --seed 3 --out " + out) == 0);
    const auto j = algomarket::parse_json_file(out);
    REQUIRE(j.at("values").size() == 50);
}

TEST_CASE("tail writes the excess CSV") {
    TempDir dir;
    const auto out = (dir.path / "tail.csv").string();
    REQUIRE(run("tail " + kData + "/markets/alpha.csv --bin-width 0.4 --out " + out) == 0);
    REQUIRE(algomarket::read_text_file(out).rfind("bin_center,observed,expected,excess\n", 0) ==
            0);
}

TEST_CASE("ca-sample writes distributions and an optional PGM") {
    TempDir dir;
    const auto out = (dir.path / "ca.json").string();
    const auto pgm = (dir.path / "ca.pgm").string();
    REQUIRE(run("ca-sample --count 8 --steps 12 --seed 4 --lengths 3 --out " + out +
                " --pgm " + pgm) == 0);
    REQUIRE(algomarket::load_distribution_set(out).count(3) == 1);
    REQUIRE(algomarket::read_text_file(pgm).rfind("P2\n", 0) == 0);
}

TEST_CASE("matrix runs on the bundled sample config") {
    TempDir dir;
    const auto prefix = (dir.path / "report").string();
    REQUIRE(run("matrix --config " + kData + "/sample_experiment.json --format csv --out " +
                prefix + " --jobs 2") == 0);
    const auto csv = algomarket::read_text_file(prefix + "_market_x_market.csv");
    REQUIRE(csv.rfind("pair,4,5,6,7,8,9,10\n", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 16);  // header + 15 pairs
}
