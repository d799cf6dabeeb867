#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qsg/search.hpp"

namespace qsg {

enum class OracleMethod { automatic, grid, dual_inner };

/// Ground-truth solve by exhaustive subset enumeration. `grid` maximizes the
/// utility over a coverage lattice (independent of every solver path);
/// `dual_inner` runs a per-subset bisection + fixed-subset dual solve and
/// scales to n <= 16. error_bound documents how far below the true optimum the
/// reported utility may sit.
struct OracleResult {
    Strategy best_strategy;
    double best_utility = 0.0;
    long long subsets_evaluated = 0;
    OracleMethod method = OracleMethod::grid;
    double error_bound = 0.0;
};

namespace detail {

// Recursive lattice sweep over coverage for one subset, pruning on the budget
// and partition caps as it goes.
struct GridScan {
    const GameInstance& g;
    const std::vector<int>& S;
    int res;
    Strategy work;
    std::vector<double> part_used;
    double budget_used = 0.0;
    double best = -1e300;
    Strategy best_strategy;

    GridScan(const GameInstance& gi, const std::vector<int>& s, int r)
        : g(gi), S(s), res(r), part_used(gi.n_partitions(), 0.0) {
        work.subset = S;
        work.coverage.assign(S.size(), 0.0);
    }

    void run(size_t i) {
        if (i == S.size()) {
            const double u = defender_utility(g, work);
            if (u > best) {
                best = u;
                best_strategy = work;
            }
            return;
        }
        const int j = S[i];
        const int l = g.partition_of(j);
        for (int a = 0; a <= res; ++a) {
            const double x = static_cast<double>(a) / res;
            if (budget_used + x > g.m + 1e-12) break;
            if (part_used[l] + x > g.beta[l] + 1e-12) break;
            work.coverage[i] = x;
            budget_used += x;
            part_used[l] += x;
            run(i + 1);
            budget_used -= x;
            part_used[l] -= x;
        }
        work.coverage[i] = 0.0;
    }
};

}  // namespace detail

inline OracleResult brute_force_eqopt(const GameInstance& g, int resolution = 0,
                                      OracleMethod method = OracleMethod::automatic) {
    if (method == OracleMethod::automatic)
        method = g.n_centers <= 5 ? OracleMethod::grid : OracleMethod::dual_inner;
    OracleResult out;
    out.method = method;

    if (method == OracleMethod::grid) {
        if (g.n_centers > 8) throw SizeError("grid oracle limited to n <= 8");
        if (resolution <= 0) resolution = g.n_centers <= 5 ? 50 : 20;
        double best = -1e300;
        for (const auto& S : enumerate_feasible_subsets(g, 8)) {
            detail::GridScan scan(g, S, resolution);
            scan.run(0);
            ++out.subsets_evaluated;
            if (scan.best > best) {
                best = scan.best;
                out.best_strategy = scan.best_strategy;
            }
        }
        if (out.subsets_evaluated == 0) throw ValidationError("no feasible subset exists");
        out.best_utility = best;
        double wsum = 0;
        for (int j : out.best_strategy.subset) wsum += g.w_def(j);
        out.error_bound = wsum / resolution;
        return out;
    }

    if (g.n_centers > 16) throw SizeError("dual_inner oracle limited to n <= 16");
    const double eps_o = 1e-4, xi_o = 1e-8;
    double best = -1e300;
    for (const auto& S : enumerate_feasible_subsets(g, 16)) {
        SolveReport rep = optimize_coverage(g, S, eps_o, xi_o, Method::oracle);
        ++out.subsets_evaluated;
        if (rep.utility > best) {
            best = rep.utility;
            out.best_strategy = rep.strategy;
        }
    }
    if (out.subsets_evaluated == 0) throw ValidationError("no feasible subset exists");
    out.best_utility = best;
    // bisection window plus dual-descent slack per subset, measured against the
    // grid oracle in the test suite
    out.error_bound = 3 * eps_o + 2e-4;
    return out;
}

/// Exact maximum of the thresholded objective B over subsets and lattice
/// coverage (x_j in {0, 1/res, ..., 1}), by dynamic programming over
/// partitions. The lattice only restricts coverage, so the result is a lower
/// bound on max B; budgets are floored to lattice units.
inline double max_bopt_grid(const GameInstance& g, double delta0, int resolution = 40) {
    const double NEG = -1e300;
    const int res = resolution;
    const double raw_g = std::floor(res * g.m + 1e-9);
    const int G =
        raw_g >= static_cast<double>(res) * g.n_centers ? res * g.n_centers : static_cast<int>(raw_g);

    // per-partition tables: best value with exactly s selected members and b units
    std::vector<std::vector<std::vector<double>>> part_tables;
    for (int l = 0; l < g.n_partitions(); ++l) {
        const auto& members = g.partitions[l];
        const int smax = std::min<int>(members.size(), g.cap_C);
        const double raw_b = std::floor(res * g.beta[l] + 1e-9);
        const int bmax = raw_b >= G ? G : static_cast<int>(raw_b);
        std::vector<std::vector<double>> table(smax + 1, std::vector<double>(bmax + 1, NEG));
        table[0][0] = 0.0;
        for (int j : members) {
            std::vector<double> val(res + 1);
            for (int a = 0; a <= res; ++a)
                val[a] = bopt_center_value(g, j, static_cast<double>(a) / res, delta0);
            auto next = table;
            for (int s = 0; s < smax; ++s)
                for (int b = 0; b <= bmax; ++b) {
                    if (table[s][b] == NEG) continue;
                    const int amax = std::min(res, bmax - b);
                    for (int a = 0; a <= amax; ++a) {
                        double cand = table[s][b] + val[a];
                        if (cand > next[s + 1][b + a]) next[s + 1][b + a] = cand;
                    }
                }
            table = std::move(next);
        }
        part_tables.push_back(std::move(table));
    }

    // combine partitions, at least one member from each
    std::vector<std::vector<double>> comb(g.cap_C + 1, std::vector<double>(G + 1, NEG));
    comb[0][0] = 0.0;
    for (const auto& table : part_tables) {
        std::vector<std::vector<double>> next(g.cap_C + 1, std::vector<double>(G + 1, NEG));
        for (int s = 0; s <= g.cap_C; ++s)
            for (int b0 = 0; b0 <= G; ++b0) {
                if (comb[s][b0] == NEG) continue;
                for (int sl = 1; sl < static_cast<int>(table.size()); ++sl) {
                    if (s + sl > g.cap_C) break;
                    for (int bl = 0; bl < static_cast<int>(table[sl].size()); ++bl) {
                        if (table[sl][bl] == NEG || b0 + bl > G) continue;
                        const double cand = comb[s][b0] + table[sl][bl];
                        if (cand > next[s + sl][b0 + bl]) next[s + sl][b0 + bl] = cand;
                    }
                }
            }
        comb = std::move(next);
    }
    double best = NEG;
    for (int s = g.min_NP; s <= g.cap_C; ++s)
        for (int b = 0; b <= G; ++b) best = std::max(best, comb[s][b]);
    return best;
}

/// Minimum of the fixed-subset dual value over a lattice of (nu, mu) in
/// [0, nu_range] x [0, mu_range]^L, optionally refined by zooming around the
/// incumbent cell. Upper-bounds the true dual minimum.
inline double dual_grid_min(const GameInstance& g, const std::vector<int>& S, double delta0,
                            double nu_range, double mu_range, int steps, int refine_levels = 1) {
    if (!(nu_range > 0) || !(mu_range > 0)) throw std::domain_error("dual_grid_min: ranges must be positive");
    if (steps < 2) throw std::domain_error("dual_grid_min: steps must be >= 2");
    const int dims = 1 + g.n_partitions();
    double cells = 1;
    for (int d = 0; d < dims; ++d) cells *= steps;
    if (cells > 5e7) throw SizeError("dual_grid_min: grid too large");

    std::vector<double> lo(dims, 0.0), hi(dims);
    hi[0] = nu_range;
    for (int d = 1; d < dims; ++d) hi[d] = mu_range;

    DualPoint dual{0.0, std::vector<double>(g.n_partitions(), 0.0)};
    auto value_at = [&](const std::vector<double>& pt) {
        dual.nu = pt[0];
        for (int l = 0; l < g.n_partitions(); ++l) dual.mu[l] = pt[1 + l];
        double v = dual.nu * g.m;
        for (int l = 0; l < g.n_partitions(); ++l) v += dual.mu[l] * g.beta[l];
        for (int j : S) v += detail::center_best(g, j, dual.nu, dual.mu[g.partition_of(j)], delta0).h;
        return v;
    };

    double best = 1e300;
    std::vector<double> best_pt(dims, 0.0);
    for (int level = 0; level < refine_levels; ++level) {
        std::vector<int> idx(dims, 0);
        std::vector<double> pt(dims);
        while (true) {
            for (int d = 0; d < dims; ++d)
                pt[d] = lo[d] + (hi[d] - lo[d]) * idx[d] / (steps - 1);
            const double v = value_at(pt);
            if (v < best) {
                best = v;
                best_pt = pt;
            }
            int d = 0;
            while (d < dims && ++idx[d] == steps) idx[d++] = 0;
            if (d == dims) break;
        }
        // zoom to +-2 cells around the incumbent
        for (int d = 0; d < dims; ++d) {
            const double spacing = (hi[d] - lo[d]) / (steps - 1);
            lo[d] = std::max(0.0, best_pt[d] - 2 * spacing);
            hi[d] = best_pt[d] + 2 * spacing;
        }
    }
    return best;
}

}  // namespace qsg
