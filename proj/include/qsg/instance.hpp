#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qsg/errors.hpp"

namespace qsg {

/// A game instance: candidate centers with defender/attacker payoffs plus the
/// resource, cardinality and fairness parameters that define feasibility.
///
/// Payoff conventions per center j:
///   protected attack   -> defender gets reward_def[j], attacker gets loss_att[j]
///   unprotected attack -> defender gets loss_def[j],   attacker gets reward_att[j]
/// with reward_def > loss_def and reward_att > loss_att.
struct GameInstance {
    int n_centers = 0;
    std::vector<double> reward_def;
    std::vector<double> loss_def;
    std::vector<double> reward_att;
    std::vector<double> loss_att;

    double lambda = 0.76;  // adversary rationality (0 = uniform attacker)
    double m = 1.0;        // total security resources
    int cap_C = 0;         // max number of operated centers
    int min_NP = 0;        // min number of operated centers

    std::vector<std::vector<int>> partitions;  // disjoint, cover {0..n-1}
    std::vector<double> beta;                  // per-partition security caps

    // derived: partition index per center, rebuilt by finalize()
    std::vector<int> partition_index;

    int n_partitions() const { return static_cast<int>(partitions.size()); }
    double w_def(int j) const { return reward_def[j] - loss_def[j]; }
    double w_att(int j) const { return reward_att[j] - loss_att[j]; }
    int partition_of(int j) const { return partition_index[j]; }

    void finalize() {
        partition_index.assign(n_centers, -1);
        for (int l = 0; l < n_partitions(); ++l)
            for (int j : partitions[l])
                if (j >= 0 && j < n_centers) partition_index[j] = l;
    }
};

/// Defender decision: operated subset (sorted) and marginal coverage per member.
struct Strategy {
    std::vector<int> subset;
    std::vector<double> coverage;

    int size() const { return static_cast<int>(subset.size()); }
};

inline void validate_instance(const GameInstance& g) {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    const int n = g.n_centers;
    if (n <= 0) fail("n_centers must be positive");
    if (static_cast<int>(g.reward_def.size()) != n || static_cast<int>(g.loss_def.size()) != n ||
        static_cast<int>(g.reward_att.size()) != n || static_cast<int>(g.loss_att.size()) != n)
        fail("payoff vectors must all have length n_centers");
    for (int j = 0; j < n; ++j) {
        if (!(g.reward_def[j] > g.loss_def[j]))
            fail("center " + std::to_string(j) + ": reward_def must exceed loss_def");
        if (!(g.reward_att[j] > g.loss_att[j]))
            fail("center " + std::to_string(j) + ": reward_att must exceed loss_att");
    }
    if (!(g.lambda >= 0)) fail("lambda must be nonnegative");
    if (!(g.m > 0)) fail("m must be positive");

    const int L = g.n_partitions();
    if (L < 1) fail("at least one partition required");
    if (static_cast<int>(g.beta.size()) != L) fail("beta must have one entry per partition");
    for (int l = 0; l < L; ++l) {
        if (!(g.beta[l] >= 0)) fail("beta[" + std::to_string(l) + "] must be nonnegative");
        if (g.partitions[l].empty()) fail("partition " + std::to_string(l) + " is empty");
    }
    std::vector<int> seen(n, -1);
    for (int l = 0; l < L; ++l)
        for (int j : g.partitions[l]) {
            if (j < 0 || j >= n) fail("partition " + std::to_string(l) + " has out-of-range center index");
            if (seen[j] >= 0)
                fail("center " + std::to_string(j) + " appears in partitions " +
                     std::to_string(seen[j]) + " and " + std::to_string(l));
            seen[j] = l;
        }
    for (int j = 0; j < n; ++j)
        if (seen[j] < 0) fail("center " + std::to_string(j) + " is not covered by any partition");

    // cardinality chain; L > min_NP would make otherwise valid-looking instances unsolvable
    if (L > g.min_NP) fail("number of partitions exceeds min_NP");
    if (g.min_NP > g.cap_C) fail("min_NP exceeds cap_C");
    if (g.cap_C > n) fail("cap_C exceeds n_centers");
    if (static_cast<int>(g.partition_index.size()) != n)
        fail("partition_index not finalized");
}

/// True iff S satisfies the cardinality bounds and touches every partition.
inline bool feasible_subset(const GameInstance& g, const std::vector<int>& S) {
    for (int j : S)
        if (j < 0 || j >= g.n_centers)
            throw std::out_of_range("feasible_subset: center index " + std::to_string(j) +
                                    " out of range");
    const int s = static_cast<int>(S.size());
    if (s < g.min_NP || s > g.cap_C) return false;
    std::vector<char> hit(g.n_partitions(), 0);
    for (int j : S) hit[g.partition_of(j)] = 1;
    return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
}

/// Optional replacements for the generated defaults.
struct GenerateOverrides {
    std::optional<double> lambda;
    std::optional<double> m;
    std::optional<int> cap_C;
    std::optional<int> min_NP;
    std::optional<int> n_partitions;
    std::optional<double> beta;  // applied to every partition
};

namespace detail {
// 53-bit mantissa mapping keeps draws identical across standard libraries;
// distribution objects from <random> are not portable.
inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Deterministic random instance. Draw order: per center j, in index order,
/// reward_def, loss_def, reward_att, loss_att, each from a 53-bit uniform on
/// [1,10] resp. [-10,-1], using std::mt19937_64 seeded with `seed`.
/// Defaults: lambda 0.76, cap_C = floor(2n/3), min_NP = floor(n/2), m = n/10,
/// L = 5 equal contiguous partitions (remainder spread to the first blocks),
/// beta_l = 2m/L.
inline GameInstance generate_instance(std::uint64_t seed, int n_centers,
                                      const GenerateOverrides& ov = {}) {
    const int L = ov.n_partitions.value_or(5);
    if (n_centers < 5 && !ov.n_partitions)
        throw SizeError("generate_instance requires n_centers >= 5 (5 default partitions)");
    if (n_centers < L)
        throw SizeError("generate_instance: n_centers must be >= number of partitions");

    GameInstance g;
    g.n_centers = n_centers;
    std::mt19937_64 rng(seed);
    g.reward_def.resize(n_centers);
    g.loss_def.resize(n_centers);
    g.reward_att.resize(n_centers);
    g.loss_att.resize(n_centers);
    for (int j = 0; j < n_centers; ++j) {
        g.reward_def[j] = 1.0 + 9.0 * detail::unit_draw(rng);
        g.loss_def[j] = -10.0 + 9.0 * detail::unit_draw(rng);
        g.reward_att[j] = 1.0 + 9.0 * detail::unit_draw(rng);
        g.loss_att[j] = -10.0 + 9.0 * detail::unit_draw(rng);
    }
    g.lambda = ov.lambda.value_or(0.76);
    g.m = ov.m.value_or(n_centers / 10.0);
    g.cap_C = ov.cap_C.value_or((2 * n_centers) / 3);
    g.min_NP = ov.min_NP.value_or(n_centers / 2);

    // contiguous equal blocks, remainder spread to the first blocks
    g.partitions.assign(L, {});
    const int base = n_centers / L, rem = n_centers % L;
    int next = 0;
    for (int l = 0; l < L; ++l) {
        const int len = base + (l < rem ? 1 : 0);
        for (int i = 0; i < len; ++i) g.partitions[l].push_back(next++);
    }
    const double beta_default = 2.0 * g.m / L;
    g.beta.assign(L, ov.beta.value_or(beta_default));
    g.finalize();
    validate_instance(g);
    return g;
}

/// Fairness experiment variant: attacker rewards in partition 0 are raised by 5
/// and the per-partition caps are tightened to 1.2*m/L. Not idempotent: applying
/// twice shifts the rewards by 10.
inline GameInstance apply_fairness_scenario(const GameInstance& g) {
    GameInstance out = g;
    for (int j : out.partitions.at(0)) out.reward_att[j] += 5.0;
    const double cap = 1.2 * out.m / out.n_partitions();
    std::fill(out.beta.begin(), out.beta.end(), cap);
    out.finalize();
    validate_instance(out);
    return out;
}

/// All subsets satisfying the cardinality and partition-coverage constraints.
/// Guarded: enumeration is only meant for desk-scale instances.
inline std::vector<std::vector<int>> enumerate_feasible_subsets(const GameInstance& g,
                                                                int max_n = 16) {
    if (g.n_centers > max_n)
        throw SizeError("subset enumeration limited to n <= " + std::to_string(max_n));
    std::vector<std::vector<int>> out;
    const int n = g.n_centers;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const int s = std::popcount(mask);
        if (s < g.min_NP || s > g.cap_C) continue;
        std::vector<int> S;
        S.reserve(s);
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) S.push_back(j);
        if (feasible_subset(g, S)) out.push_back(std::move(S));
    }
    return out;
}

/// Checks coverage bounds, the resource budget, per-partition caps and
/// (optionally) cardinality + partition coverage. Throws ValidationError.
inline void validate_strategy(const GameInstance& g, const Strategy& s,
                              bool check_cardinality = true, double tol = 1e-6) {
    if (s.subset.size() != s.coverage.size())
        throw ValidationError("strategy: coverage must align with subset");
    if (s.subset.empty()) throw ValidationError("strategy: empty subset");
    if (!std::is_sorted(s.subset.begin(), s.subset.end()))
        throw ValidationError("strategy: subset must be sorted");
    double total = 0;
    std::vector<double> per_part(g.n_partitions(), 0.0);
    for (int i = 0; i < s.size(); ++i) {
        const int j = s.subset[i];
        if (j < 0 || j >= g.n_centers) throw ValidationError("strategy: center index out of range");
        if (i > 0 && s.subset[i] == s.subset[i - 1])
            throw ValidationError("strategy: duplicate center");
        const double x = s.coverage[i];
        if (x < -tol || x > 1 + tol)
            throw ValidationError("strategy: coverage outside [0,1] at center " + std::to_string(j));
        total += x;
        per_part[g.partition_of(j)] += x;
    }
    if (total > g.m + tol) throw ValidationError("strategy: resource budget exceeded");
    for (int l = 0; l < g.n_partitions(); ++l)
        if (per_part[l] > g.beta[l] + tol)
            throw ValidationError("strategy: security cap exceeded in partition " + std::to_string(l));
    if (check_cardinality && !feasible_subset(g, s.subset))
        throw ValidationError("strategy: subset violates cardinality/partition constraints");
}

}  // namespace qsg
