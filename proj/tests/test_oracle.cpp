#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "qsg/numerics.hpp"
#include "qsg/oracle.hpp"

using namespace qsg;
using Catch::Matchers::WithinAbs;

namespace {
GenerateOverrides parts(int L) {
    GenerateOverrides ov;
    ov.n_partitions = L;
    return ov;
}

GameInstance permuted(const GameInstance& g, const std::vector<int>& perm) {
    GameInstance p = g;
    for (int j = 0; j < g.n_centers; ++j) {
        p.reward_def[perm[j]] = g.reward_def[j];
        p.loss_def[perm[j]] = g.loss_def[j];
        p.reward_att[perm[j]] = g.reward_att[j];
        p.loss_att[perm[j]] = g.loss_att[j];
    }
    for (int l = 0; l < g.n_partitions(); ++l) {
        for (size_t i = 0; i < g.partitions[l].size(); ++i)
            p.partitions[l][i] = perm[g.partitions[l][i]];
        std::sort(p.partitions[l].begin(), p.partitions[l].end());
    }
    p.finalize();
    validate_instance(p);
    return p;
}
}  // namespace

TEST_CASE("oracle on a singleton instance") {
    GameInstance g;
    g.n_centers = 1;
    g.reward_def = {5.0};
    g.loss_def = {-2.0};
    g.reward_att = {3.0};
    g.loss_att = {-1.0};
    g.lambda = 0.76;
    g.m = 0.7;
    g.cap_C = 1;
    g.min_NP = 1;
    g.partitions = {{0}};
    g.beta = {0.5};
    g.finalize();
    const OracleResult orc = brute_force_eqopt(g, 100, OracleMethod::grid);
    const double x = std::min({1.0, g.m, g.beta[0]});
    CHECK_THAT(orc.best_utility, WithinAbs(g.w_def(0) * x + g.loss_def[0], 1e-9));
    CHECK(orc.subsets_evaluated == 1);
}

TEST_CASE("grid and dual-inner oracles agree within the grid error") {
    for (int seed : {100, 101, 102}) {
        const GameInstance g = generate_instance(seed, 5, parts(2));
        const OracleResult grid = brute_force_eqopt(g, 50, OracleMethod::grid);
        const OracleResult dual = brute_force_eqopt(g, 0, OracleMethod::dual_inner);
        // the lattice can only undershoot; the dual path is near-exact
        CHECK(dual.best_utility >= grid.best_utility - dual.error_bound);
        CHECK(dual.best_utility <= grid.best_utility + grid.error_bound + 1e-6);
        CHECK(grid.method == OracleMethod::grid);
        CHECK(dual.method == OracleMethod::dual_inner);
    }
}

TEST_CASE("oracle utilities are invariant under center relabeling") {
    const GameInstance g = generate_instance(103, 5, parts(2));
    const std::vector<int> perm = {3, 0, 4, 1, 2};
    const GameInstance p = permuted(g, perm);
    const OracleResult a = brute_force_eqopt(g, 30, OracleMethod::grid);
    const OracleResult b = brute_force_eqopt(p, 30, OracleMethod::grid);
    CHECK_THAT(a.best_utility, WithinAbs(b.best_utility, 1e-9));
}

TEST_CASE("size guards") {
    CHECK_THROWS_AS(brute_force_eqopt(generate_instance(104, 10), 20, OracleMethod::grid),
                    SizeError);
    CHECK_THROWS_AS(brute_force_eqopt(generate_instance(105, 20), 0, OracleMethod::dual_inner),
                    SizeError);
    CHECK_THROWS_AS(brute_force_eqopt(generate_instance(106, 20)), SizeError);
}

TEST_CASE("dual lattice minimum: slack constraints give strong duality at zero") {
    GenerateOverrides ov = parts(2);
    ov.m = 12.0;
    ov.beta = 12.0;
    const GameInstance g = generate_instance(107, 6, ov);
    const std::vector<int> S = {0, 2, 3, 5};
    const double delta0 = 0.3;
    // independent primal maximum: constraints are slack, so optimize each
    // center's term alone by golden section
    double primal = 0;
    for (int j : S)
        primal += maximize_unimodal([&](double x) { return bopt_center_value(g, j, x, delta0); },
                                    0.0, 1.0, 1e-10)
                      .second;
    const double dual_min = dual_grid_min(g, S, delta0, 5.0, 5.0, 11, 2);
    CHECK_THAT(dual_min, WithinAbs(primal, 1e-6));
}

TEST_CASE("dual lattice minimum upper-bounds the descent and the primal") {
    const GameInstance g = generate_instance(108, 6, parts(2));
    const std::vector<int> S = {0, 1, 3, 4};
    const double delta0 = 0.9;
    const double grid_min = dual_grid_min(g, S, delta0, 3000.0, 3000.0, 13, 6);
    const FixedSubsetResult pgd = pgd_solve_fixed_subset(g, S, delta0, 1e-10, {.polyak = true});
    CHECK(grid_min >= pgd.value - 1e-4);
    // weak duality against an independent primal lattice
    Strategy s{S, {0, 0, 0, 0}};
    double primal = -1e300;
    const int res = 40;
    std::function<void(size_t, double, std::vector<double>&)> scan =
        [&](size_t i, double budget, std::vector<double>& part) {
            if (i == S.size()) {
                primal = std::max(primal, bopt_value(g, s, delta0));
                return;
            }
            const int l = g.partition_of(S[i]);
            for (int a = 0; a <= res; ++a) {
                const double x = static_cast<double>(a) / res;
                if (x > budget + 1e-12 || part[l] + x > g.beta[l] + 1e-12) break;
                s.coverage[i] = x;
                part[l] += x;
                scan(i + 1, budget - x, part);
                part[l] -= x;
                s.coverage[i] = 0.0;
            }
        };
    std::vector<double> part(g.n_partitions(), 0.0);
    scan(0, g.m, part);
    CHECK(grid_min >= primal - 1e-6);
}

TEST_CASE("lattice DP agrees with a direct enumeration of subsets and lattice points") {
    const GameInstance g = generate_instance(109, 5, parts(2));
    const double delta0 = -0.4;
    const int res = 10;
    const int total_units = static_cast<int>(std::floor(res * g.m + 1e-9));
    double direct = -1e300;
    for (const auto& S : enumerate_feasible_subsets(g)) {
        Strategy s{S, std::vector<double>(S.size(), 0.0)};
        std::function<void(size_t, int, std::vector<int>&)> scan =
            [&](size_t i, int units_left, std::vector<int>& part_units) {
                if (i == S.size()) {
                    direct = std::max(direct, bopt_value(g, s, delta0));
                    return;
                }
                const int l = g.partition_of(S[i]);
                const int cap_units =
                    static_cast<int>(std::floor(res * g.beta[l] + 1e-9)) - part_units[l];
                for (int a = 0; a <= std::min({res, units_left, cap_units}); ++a) {
                    s.coverage[i] = static_cast<double>(a) / res;
                    part_units[l] += a;
                    scan(i + 1, units_left - a, part_units);
                    part_units[l] -= a;
                }
                s.coverage[i] = 0.0;
            };
        std::vector<int> part_units(g.n_partitions(), 0);
        scan(0, total_units, part_units);
    }
    CHECK_THAT(max_bopt_grid(g, delta0, res), WithinAbs(direct, 1e-9));
}
