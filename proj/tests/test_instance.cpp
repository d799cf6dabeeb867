#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "qsg/instance.hpp"
#include "qsg/instance_io.hpp"

using namespace qsg;

namespace {
GenerateOverrides with_partitions(int L) {
    GenerateOverrides ov;
    ov.n_partitions = L;
    return ov;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("generated defaults match the documented parameters") {
    const GameInstance g = generate_instance(1, 20);
    CHECK(g.n_centers == 20);
    CHECK(g.cap_C == 13);
    CHECK(g.min_NP == 10);
    CHECK(g.m == 2.0);
    CHECK(g.lambda == 0.76);
    REQUIRE(g.n_partitions() == 5);
    for (int l = 0; l < 5; ++l) {
        CHECK(g.beta[l] == 0.8);
        CHECK(g.partitions[l].size() == 4);
        CHECK(g.partitions[l].front() == 4 * l);  // contiguous blocks
    }
    for (int j = 0; j < 20; ++j) {
        CHECK(g.reward_def[j] >= 1.0);
        CHECK(g.reward_def[j] <= 10.0);
        CHECK(g.loss_def[j] >= -10.0);
        CHECK(g.loss_def[j] <= -1.0);
        CHECK(g.w_def(j) >= 0.0);
        CHECK(g.w_att(j) >= 0.0);
    }
}

TEST_CASE("generation is a pure function of seed and overrides") {
    const GameInstance a = generate_instance(7, 30);
    const GameInstance b = generate_instance(7, 30);
    CHECK(a.reward_def == b.reward_def);
    CHECK(a.loss_def == b.loss_def);
    CHECK(a.reward_att == b.reward_att);
    CHECK(a.loss_att == b.loss_att);
    CHECK(a.partitions == b.partitions);

    const GameInstance c = generate_instance(8, 30);
    CHECK(a.reward_def != c.reward_def);
}

TEST_CASE("overrides replace only the requested defaults") {
    GenerateOverrides ov;
    ov.lambda = 0.0;
    const GameInstance base = generate_instance(1, 20);
    const GameInstance g = generate_instance(1, 20, ov);
    CHECK(g.lambda == 0.0);
    CHECK(g.m == base.m);
    CHECK(g.cap_C == base.cap_C);
    CHECK(g.reward_def == base.reward_def);
}

TEST_CASE("partition remainder spreads to the first blocks") {
    const GameInstance g = generate_instance(2, 23);
    REQUIRE(g.n_partitions() == 5);
    CHECK(g.partitions[0].size() == 5);
    CHECK(g.partitions[1].size() == 5);
    CHECK(g.partitions[2].size() == 5);
    CHECK(g.partitions[3].size() == 4);
    CHECK(g.partitions[4].size() == 4);
}

TEST_CASE("small instances need an explicit partition override") {
    CHECK_THROWS_AS(generate_instance(1, 4), SizeError);
    // default L=5 with n in {5..9} trips the infeasibility guard
    CHECK_THROWS_AS(generate_instance(1, 6), ValidationError);
    const GameInstance g = generate_instance(1, 4, with_partitions(2));
    CHECK(g.n_centers == 4);
    CHECK(g.min_NP == 2);
    CHECK(g.cap_C == 2);
}

TEST_CASE("fairness scenario shifts attacker rewards and tightens caps") {
    const GameInstance base = generate_instance(3, 20);
    const GameInstance f = apply_fairness_scenario(base);
    for (int j : f.partitions[0]) {
        CHECK(f.reward_att[j] == base.reward_att[j] + 5.0);
        CHECK(f.reward_att[j] >= 6.0);
        CHECK(f.reward_att[j] <= 15.0);
    }
    for (int j : f.partitions[1]) CHECK(f.reward_att[j] == base.reward_att[j]);
    for (double b : f.beta) CHECK_THAT(b, Catch::Matchers::WithinAbs(0.48, 1e-15));

    const GameInstance ff = apply_fairness_scenario(f);  // not idempotent
    for (int j : ff.partitions[0]) CHECK(ff.reward_att[j] == base.reward_att[j] + 10.0);

    GenerateOverrides ov;
    ov.m = 5.0;
    const GameInstance g5 = apply_fairness_scenario(generate_instance(3, 20, ov));
    for (double b : g5.beta) CHECK_THAT(b, Catch::Matchers::WithinAbs(1.2, 1e-15));
}

TEST_CASE("feasible_subset checks cardinality and partition coverage") {
    GenerateOverrides ov;
    ov.cap_C = 20;
    const GameInstance g = generate_instance(5, 20, ov);
    std::vector<int> all(20);
    std::iota(all.begin(), all.end(), 0);
    CHECK(feasible_subset(g, all));

    std::vector<int> tooSmall(all.begin(), all.begin() + g.min_NP - 1);
    CHECK_FALSE(feasible_subset(g, tooSmall));

    // skip partition 3 = centers 12..15 entirely
    std::vector<int> missing;
    for (int j = 0; j < 20 && static_cast<int>(missing.size()) < g.min_NP; ++j)
        if (j < 12 || j > 15) missing.push_back(j);
    CHECK_FALSE(feasible_subset(g, missing));

    CHECK_THROWS_AS(feasible_subset(g, {0, 25}), std::out_of_range);
}

TEST_CASE("feasible_subset agrees with direct condition evaluation exhaustively") {
    const GameInstance g = generate_instance(9, 10);
    for (std::uint32_t mask = 1; mask < (1u << 10); ++mask) {
        std::vector<int> S;
        for (int j = 0; j < 10; ++j)
            if (mask & (1u << j)) S.push_back(j);
        bool expect = static_cast<int>(S.size()) >= g.min_NP &&
                      static_cast<int>(S.size()) <= g.cap_C;
        for (int l = 0; l < g.n_partitions() && expect; ++l) {
            bool hit = false;
            for (int j : S) hit = hit || g.partition_of(j) == l;
            expect = hit;
        }
        REQUIRE(feasible_subset(g, S) == expect);
    }
}

TEST_CASE("instance files round-trip") {
    const GameInstance g = generate_instance(11, 20);
    const std::string path = temp_path("qsg_roundtrip.json");
    write_instance(g, path);
    const GameInstance r = read_instance(path);
    CHECK(r.n_centers == g.n_centers);
    CHECK(r.reward_def == g.reward_def);
    CHECK(r.loss_def == g.loss_def);
    CHECK(r.reward_att == g.reward_att);
    CHECK(r.loss_att == g.loss_att);
    CHECK(r.partitions == g.partitions);
    CHECK(r.beta == g.beta);
    CHECK(r.lambda == g.lambda);
    CHECK(r.m == g.m);
    std::filesystem::remove(path);
}

TEST_CASE("instance file validation names the offending field") {
    GameInstance g = generate_instance(12, 20);
    const std::string path = temp_path("qsg_invalid.json");

    SECTION("reward below loss") {
        auto j = instance_to_json(g);
        j["reward_def"][3] = -20.0;
        std::ofstream(path) << j.dump();
        try {
            read_instance(path);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("center 3") != std::string::npos);
        }
    }
    SECTION("overlapping partitions") {
        auto j = instance_to_json(g);
        j["partitions"][1][0] = 0;  // also in partition 0
        std::ofstream(path) << j.dump();
        CHECK_THROWS_AS(read_instance(path), ValidationError);
    }
    SECTION("more partitions than min_NP") {
        auto j = instance_to_json(g);
        j["min_NP"] = 4;  // five partitions
        std::ofstream(path) << j.dump();
        CHECK_THROWS_AS(read_instance(path), ValidationError);
    }
    SECTION("malformed json") {
        std::ofstream(path) << "{ not json";
        CHECK_THROWS_AS(read_instance(path), ParseError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("strategy validation enforces the coverage constraints") {
    const GameInstance g = generate_instance(13, 20);
    Strategy s;
    for (int j = 0; j < g.min_NP; ++j) {
        s.subset.push_back(j);
        s.coverage.push_back(0.0);
    }
    // need every partition covered: take one from each of the remaining
    for (int l = 0; l < g.n_partitions(); ++l) {
        const int j = g.partitions[l].back();
        if (std::find(s.subset.begin(), s.subset.end(), j) == s.subset.end()) {
            s.subset.push_back(j);
            s.coverage.push_back(0.0);
        }
    }
    std::sort(s.subset.begin(), s.subset.end());
    CHECK_NOTHROW(validate_strategy(g, s));

    Strategy bad = s;
    bad.coverage.assign(bad.subset.size(), 1.0);  // blows the budget m = 2
    CHECK_THROWS_AS(validate_strategy(g, bad), ValidationError);
}
