#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qsg/instance_io.hpp"
#include "qsg/objective.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code;
    std::string output;
};

CmdResult run(const std::string& cmd) {
    const std::string full = cmd + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string qsg_bin() {
    const char* bin = std::getenv("QSG_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("qsg_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("cli: generate then solve the happy path") {
    TempDir tmp;
    const std::string inst = (tmp.path / "inst.json").string();
    auto gen = run(qsg_bin() + " generate --seed 1 --n 20 --out " + inst);
    REQUIRE(gen.exit_code == 0);

    const std::string report = (tmp.path / "report.json").string();
    auto solve = run(qsg_bin() + " solve " + inst + " --method hybrid --out " + report);
    INFO(solve.output);
    REQUIRE(solve.exit_code == 0);

    const auto j = nlohmann::json::parse(std::ifstream(report));
    CHECK(j.at("method") == "hybrid");
    const qsg::GameInstance g = qsg::read_instance(inst);
    qsg::Strategy s;
    s.subset = j.at("strategy").at("subset").get<std::vector<int>>();
    s.coverage = j.at("strategy").at("coverage").get<std::vector<double>>();
    CHECK_NOTHROW(qsg::validate_strategy(g, s));
    CHECK(std::abs(qsg::defender_utility(g, s) - j.at("utility").get<double>()) < 1e-9);
}

TEST_CASE("cli: oracle size guard maps to the size exit code") {
    TempDir tmp;
    const std::string inst = (tmp.path / "big.json").string();
    REQUIRE(run(qsg_bin() + " generate --seed 1 --n 50 --out " + inst).exit_code == 0);
    auto r = run(qsg_bin() + " solve " + inst + " --method oracle");
    CHECK(r.exit_code == 3);
}

TEST_CASE("cli: milp without a solver is a configuration error with a hint") {
    TempDir tmp;
    const std::string inst = (tmp.path / "big.json").string();
    REQUIRE(run(qsg_bin() + " generate --seed 1 --n 50 --out " + inst).exit_code == 0);
    auto r = run("env -u QSG_MILP_SOLVER " + qsg_bin() + " solve " + inst + " --method milp");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("QSG_MILP_SOLVER") != std::string::npos);
}

TEST_CASE("cli: milp on a small instance uses the internal exact path") {
    TempDir tmp;
    const std::string inst = (tmp.path / "small.json").string();
    REQUIRE(run(qsg_bin() + " generate --seed 2 --n 6 --partitions 2 --out " + inst).exit_code ==
            0);
    auto r = run("env -u QSG_MILP_SOLVER " + qsg_bin() + " solve " + inst + " --method milp");
    CHECK(r.exit_code == 0);
}

TEST_CASE("cli: malformed instance file maps to the parse exit code") {
    TempDir tmp;
    const std::string inst = (tmp.path / "broken.json").string();
    std::ofstream(inst) << "{ definitely not json";
    auto r = run(qsg_bin() + " solve " + inst);
    CHECK(r.exit_code == 6);
}

TEST_CASE("cli: fairness-scenario generation applies the documented changes") {
    TempDir tmp;
    const std::string plain = (tmp.path / "a.json").string();
    const std::string fair = (tmp.path / "b.json").string();
    REQUIRE(run(qsg_bin() + " generate --seed 3 --n 20 --out " + plain).exit_code == 0);
    REQUIRE(run(qsg_bin() + " generate --seed 3 --n 20 --fairness-scenario --out " + fair)
                .exit_code == 0);
    const qsg::GameInstance a = qsg::read_instance(plain);
    const qsg::GameInstance b = qsg::read_instance(fair);
    for (int j : b.partitions[0]) CHECK(b.reward_att[j] == a.reward_att[j] + 5.0);
    CHECK(b.beta[0] == 1.2 * b.m / 5);
}

TEST_CASE("cli: experiment emits the documented row counts and reproduces itself") {
    TempDir tmp;
    const std::string out1 = (tmp.path / "run1").string();
    const std::string out2 = (tmp.path / "run2").string();
    const std::string common = " experiment --name expected_reward --sizes 12 --reps 2"
                               " --methods heuristic,convexopt --seed-base 5 --threads 2";
    REQUIRE(run(qsg_bin() + common + " --out-dir " + out1).exit_code == 0);
    REQUIRE(run(qsg_bin() + common + " --out-dir " + out2).exit_code == 0);

    auto read_lines = [](const std::string& p) {
        std::ifstream f(p);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(f, line)) lines.push_back(line);
        return lines;
    };
    const auto rows1 = read_lines(out1 + "/runs.csv");
    const auto rows2 = read_lines(out2 + "/runs.csv");
    REQUIRE(rows1.size() == 1 + 2 * 2);  // header + sizes x reps x methods
    REQUIRE(rows2.size() == rows1.size());

    // identical apart from the wall-time column (last)
    auto strip_time = [](const std::string& line) {
        return line.substr(0, line.rfind(','));
    };
    for (size_t i = 0; i < rows1.size(); ++i) CHECK(strip_time(rows1[i]) == strip_time(rows2[i]));

    CHECK(fs::exists(out1 + "/aggregate.csv"));
    CHECK(fs::exists(out1 + "/meta.json"));
}

TEST_CASE("cli: fairness experiment emits per-partition allocations") {
    TempDir tmp;
    const std::string out = (tmp.path / "fair").string();
    auto r = run(qsg_bin() + " experiment --name fairness --sizes 20 --reps 2"
                             " --methods heuristic --seed-base 0 --out-dir " + out);
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    std::ifstream f(out + "/fairness_partitions.csv");
    REQUIRE(f.good());
    std::string line;
    int rows = 0;
    int within_cap = 0, with_rows = 0;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        ++rows;
        std::istringstream ss(line);
        std::string seed, part, fsa, cov, beta;
        std::getline(ss, seed, ',');
        std::getline(ss, part, ',');
        std::getline(ss, fsa, ',');
        std::getline(ss, cov, ',');
        std::getline(ss, beta, ',');
        if (fsa == "with") {
            ++with_rows;
            if (std::stod(cov) <= std::stod(beta) + 1e-6) ++within_cap;
        }
    }
    CHECK(rows == 2 * 2 * 5);  // reps x {with, without} x partitions
    CHECK(with_rows == within_cap);
}

TEST_CASE("cli: fast verification scoreboard passes") {
    auto r = run(qsg_bin() + " verify --level fast");
    INFO(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("PASS") != std::string::npos);
    CHECK(r.output.find("FAIL") == std::string::npos);
}
