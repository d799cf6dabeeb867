#pragma once

#include <algorithm>
#include <numeric>

#include "qsg/search.hpp"

namespace qsg {

/// Baseline that operates every candidate center and only optimizes the
/// security allocation (no selection). Cardinality constraints do not apply:
/// S is all of the candidate set by construction.
inline SolveReport convex_opt(const GameInstance& g, double epsilon = 1e-3, double xi = 1e-5,
                              const PgdParams& params = {.polyak = true}) {
    std::vector<int> all(g.n_centers);
    std::iota(all.begin(), all.end(), 0);
    return optimize_coverage(g, all, epsilon, xi, Method::convexopt, params);
}

/// Two-step baseline: (1) optimize coverage with every center operated,
/// (2) rank centers by w_def_j x*_j + loss_def_j, keep the min_NP best and up
/// to cap_C - min_NP more with positive score, patching partition coverage by
/// adding (if below cap_C) or swapping in each uncovered partition's best
/// center, (3) re-optimize coverage on the selected subset.
inline SolveReport two_steps(const GameInstance& g, double epsilon = 1e-3, double xi = 1e-5,
                             const PgdParams& params = {.polyak = true}) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport full = convex_opt(g, epsilon, xi, params);

    std::vector<double> score(g.n_centers);
    for (int i = 0; i < g.n_centers; ++i)
        score[i] = g.w_def(i) * full.strategy.coverage[i] + g.loss_def[i];

    std::vector<int> order(g.n_centers);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });

    std::vector<char> selected(g.n_centers, 0);
    int count = 0;
    for (int idx : order) {
        if (count >= g.cap_C) break;
        if (count < g.min_NP || score[idx] > 0) {
            selected[idx] = 1;
            ++count;
        } else {
            break;
        }
    }

    // patch partition coverage
    std::vector<int> per_part(g.n_partitions(), 0);
    for (int j = 0; j < g.n_centers; ++j)
        if (selected[j]) ++per_part[g.partition_of(j)];
    for (int l = 0; l < g.n_partitions(); ++l) {
        if (per_part[l] > 0) continue;
        int best_in = -1;
        for (int idx : order)
            if (g.partition_of(idx) == l) {
                best_in = idx;
                break;
            }
        if (count < g.cap_C) {
            selected[best_in] = 1;
            ++count;
            ++per_part[l];
        } else {
            // swap out the worst selected center whose partition stays covered
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                const int victim = *it;
                if (!selected[victim]) continue;
                if (per_part[g.partition_of(victim)] <= 1) continue;
                selected[victim] = 0;
                --per_part[g.partition_of(victim)];
                selected[best_in] = 1;
                ++per_part[l];
                break;
            }
        }
    }

    std::vector<int> S;
    for (int j = 0; j < g.n_centers; ++j)
        if (selected[j]) S.push_back(j);

    SolveReport rep = optimize_coverage(g, S, epsilon, xi, Method::twosteps, params);
    rep.inner_diagnostics["step1_utility"] = full.utility;
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace qsg
