#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qsg/numerics.hpp"
#include "qsg/objective.hpp"

namespace qsg {

/// Lagrange multipliers: nu for the resource budget, mu[l] per partition cap.
struct DualPoint {
    double nu = 0.0;
    std::vector<double> mu;  // size n_partitions, componentwise >= 0
};

namespace detail {

struct CenterBest {
    double x_star = 0.0;
    double y_star = 1.0;
    double h = 0.0;
};

// Per-center maximum of the separable dual term. Routes the degenerate
// transform (lambda*w_att == 0) through its linear x-space form: the attacker
// weight is constant, so only the sign of w_def*weight - price matters.
inline CenterBest center_best(const GameInstance& g, int j, double nu, double mu_l,
                              double delta0) {
    CenterBest out;
    if (transform_degenerate(g, j)) {
        const double slope = g.w_def(j) * std::exp(g.lambda * g.reward_att[j]) - (nu + mu_l);
        out.x_star = slope > 0 ? 1.0 : 0.0;
        out.y_star = 1.0;
    } else {
        const ClosedFormResult cf = closed_form_y(g, j, nu, mu_l, delta0);
        out.x_star = cf.x_star;
        out.y_star = cf.y_star;
    }
    out.h = g_term_x(g, j, nu, mu_l, out.x_star, delta0);
    return out;
}

}  // namespace detail

/// h_j(nu, mu, delta0) = max over the y box of the center's dual term,
/// evaluated exactly through the closed form.
inline double h_score(const GameInstance& g, int j, const DualPoint& dual, double delta0) {
    return detail::center_best(g, j, dual.nu, dual.mu[g.partition_of(j)], delta0).h;
}

/// Inner maximization at fixed duals: optimal subset, per-member coverage
/// optimum and the attained Lagrangian value.
struct FixedDualsOutcome {
    std::vector<int> subset;       // S*, sorted
    std::vector<double> y_star;    // aligned with subset
    std::vector<double> x_star;    // aligned with subset
    std::vector<double> h_scores;  // per center, 0..n-1
    double value = 0.0;            // sum of h over S* + nu*m + sum_l mu_l*beta_l
    bool tie_detected = false;     // two h values within 1e-9
    int h_evaluations = 0;         // structural check: exactly one per center
};

/// Exact solve of the fixed-duals subproblem: one closed-form maximization per
/// center, one sort, then the best center of every partition followed by a
/// greedy pass that keeps adding while scores are positive or the subset is
/// still below min_NP, stopping at cap_C. Ties break toward lower index.
inline FixedDualsOutcome fixed_duals_solve(const GameInstance& g, const DualPoint& dual,
                                           double delta0) {
    const int n = g.n_centers;
    const int L = g.n_partitions();
    FixedDualsOutcome out;
    out.h_scores.resize(n);
    std::vector<detail::CenterBest> best(n);
    for (int j = 0; j < n; ++j) {
        best[j] = detail::center_best(g, j, dual.nu, dual.mu[g.partition_of(j)], delta0);
        out.h_scores[j] = best[j].h;
        ++out.h_evaluations;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (out.h_scores[a] != out.h_scores[b]) return out.h_scores[a] > out.h_scores[b];
        return a < b;
    });
    for (int i = 0; i + 1 < n; ++i)
        if (std::abs(out.h_scores[order[i]] - out.h_scores[order[i + 1]]) <= 1e-9)
            out.tie_detected = true;

    std::vector<char> selected(n, 0);
    int count = 0;
    std::vector<char> partition_done(L, 0);
    for (int idx : order) {  // best h per partition
        const int l = g.partition_of(idx);
        if (!partition_done[l]) {
            partition_done[l] = 1;
            selected[idx] = 1;
            ++count;
        }
    }
    for (int idx : order) {
        if (count >= g.cap_C) break;
        if (selected[idx]) continue;
        if (out.h_scores[idx] > 0 || count < g.min_NP) {
            selected[idx] = 1;
            ++count;
        } else if (count >= g.min_NP) {
            break;  // sorted descending: nothing later can qualify
        }
    }

    double value = dual.nu * g.m;
    for (int l = 0; l < L; ++l) value += dual.mu[l] * g.beta[l];
    for (int j = 0; j < n; ++j) {
        if (!selected[j]) continue;
        out.subset.push_back(j);
        out.x_star.push_back(best[j].x_star);
        out.y_star.push_back(best[j].y_star);
        value += out.h_scores[j];
    }
    out.value = value;
    return out;
}

/// Subgradient of the fixed-duals value at the outcome's maximizer:
///   d/d nu   =  m      - sum_{j in S*} x*_j
///   d/d mu_l =  beta_l - sum_{j in K_l cap S*} x*_j
/// (equals sum log y* / (lambda w_att) + const through the transform).
inline std::pair<double, std::vector<double>> danskin_gradient(const GameInstance& g,
                                                               const FixedDualsOutcome& outcome,
                                                               double /*delta0*/) {
    double d_nu = g.m;
    std::vector<double> d_mu(g.beta.begin(), g.beta.end());
    for (size_t i = 0; i < outcome.subset.size(); ++i) {
        d_nu -= outcome.x_star[i];
        d_mu[g.partition_of(outcome.subset[i])] -= outcome.x_star[i];
    }
    return {d_nu, std::move(d_mu)};
}

struct PgdParams {
    double eta0 = 1.0;    // step eta0/sqrt(t)
    int max_iters = 5000;
    bool polyak = false;  // Polyak-style adaptive steps (needed when duals are large)
};

// internal: one dual evaluation used by the projected descent
namespace detail {
struct DualEval {
    double value = 0.0;
    std::vector<int> subset;
    std::vector<double> x_star;
    std::vector<double> y_star;
    bool tie = false;
};

struct PgdCore {
    DualEval best;
    DualPoint best_dual;
    int iterations = 0;
    bool converged = false;
    int tie_solves = 0;
    int evals = 0;
};

// Projected subgradient descent on (nu, mu) >= 0 starting from zero. Keeps the
// best (lowest) value seen; subgradient steps are not monotone. Stops when the
// objective changes by less than xi between consecutive iterations.
template <typename SolveFn>
PgdCore pgd_descent(const GameInstance& g, double xi, const PgdParams& params, SolveFn solve) {
    const int L = g.n_partitions();
    PgdCore core;
    DualPoint dual{0.0, std::vector<double>(L, 0.0)};
    DualEval cur = solve(dual);
    ++core.evals;
    core.tie_solves += cur.tie ? 1 : 0;
    core.best = cur;
    core.best_dual = dual;

    double gamma = std::max(10.0 * xi, 0.05 * (std::abs(cur.value) + 1.0));
    int no_improve = 0;
    double prev_value = cur.value;

    for (int t = 1; t <= params.max_iters; ++t) {
        core.iterations = t;
        double d_nu = g.m;
        std::vector<double> d_mu(g.beta.begin(), g.beta.end());
        for (size_t i = 0; i < cur.subset.size(); ++i) {
            d_nu -= cur.x_star[i];
            d_mu[g.partition_of(cur.subset[i])] -= cur.x_star[i];
        }
        double gn2 = d_nu * d_nu;
        for (double v : d_mu) gn2 += v * v;
        if (gn2 == 0.0) {
            core.converged = true;
            break;
        }
        double eta;
        if (params.polyak) {
            eta = (cur.value - (core.best.value - gamma)) / gn2;
            eta = std::clamp(eta, 1e-12, 1e12);
        } else {
            eta = params.eta0 / std::sqrt(static_cast<double>(t));
        }
        dual.nu = std::max(0.0, dual.nu - eta * d_nu);
        for (int l = 0; l < L; ++l) dual.mu[l] = std::max(0.0, dual.mu[l] - eta * d_mu[l]);

        cur = solve(dual);
        ++core.evals;
        core.tie_solves += cur.tie ? 1 : 0;
        if (cur.value < core.best.value) {
            core.best = cur;
            core.best_dual = dual;
            no_improve = 0;
        } else {
            ++no_improve;
        }
        if (std::abs(cur.value - prev_value) < xi) {
            core.converged = true;
            break;
        }
        prev_value = cur.value;
        if (params.polyak && no_improve >= 20) {
            gamma = std::max(0.5 * gamma, xi);
            no_improve = 0;
        }
    }
    return core;
}
}  // namespace detail

/// Repairs the dual-optimal coverage into a feasible strategy: proportional
/// down-scaling against the budget, then against each partition cap. Coverage
/// is never increased, so feasibility is exact up to rounding.
inline Strategy extract_strategy(const GameInstance& g, const std::vector<int>& subset,
                                 const std::vector<double>& x) {
    Strategy s;
    s.subset = subset;
    s.coverage = x;
    double total = std::accumulate(s.coverage.begin(), s.coverage.end(), 0.0);
    if (total > g.m && total > 0) {
        const double scale = g.m / total;
        for (double& v : s.coverage) v *= scale;
    }
    std::vector<double> part_total(g.n_partitions(), 0.0);
    for (size_t i = 0; i < s.subset.size(); ++i) part_total[g.partition_of(s.subset[i])] += s.coverage[i];
    for (size_t i = 0; i < s.subset.size(); ++i) {
        const int l = g.partition_of(s.subset[i]);
        if (part_total[l] > g.beta[l] && part_total[l] > 0)
            s.coverage[i] *= g.beta[l] / part_total[l];
    }
    for (double& v : s.coverage) v = std::clamp(v, 0.0, 1.0);
    return s;
}

inline Strategy extract_strategy(const GameInstance& g, const FixedDualsOutcome& outcome) {
    return extract_strategy(g, outcome.subset, outcome.x_star);
}

struct PgdResult {
    FixedDualsOutcome outcome;  // at the best dual point seen
    DualPoint dual;
    int iterations = 0;
    bool converged = false;
    int tie_solves = 0;
    int fixed_duals_calls = 0;
};

/// Full heuristic inner solver for one threshold delta0: projected gradient
/// descent on the duals with the fixed-duals subset solve inside.
inline PgdResult pgd_solve(const GameInstance& g, double delta0, double xi,
                           const PgdParams& params = {}) {
    if (!(xi > 0)) throw std::domain_error("pgd_solve: xi must be positive");
    auto solve = [&](const DualPoint& d) {
        FixedDualsOutcome o = fixed_duals_solve(g, d, delta0);
        detail::DualEval e;
        e.value = o.value;
        e.subset = std::move(o.subset);
        e.x_star = std::move(o.x_star);
        e.y_star = std::move(o.y_star);
        e.tie = o.tie_detected;
        return e;
    };
    detail::PgdCore core = detail::pgd_descent(g, xi, params, solve);

    PgdResult res;
    // re-solve at the best dual to return a complete outcome
    res.outcome = fixed_duals_solve(g, core.best_dual, delta0);
    res.dual = core.best_dual;
    res.iterations = core.iterations;
    res.converged = core.converged;
    res.tie_solves = core.tie_solves;
    res.fixed_duals_calls = core.evals + 1;
    return res;
}

struct FixedSubsetResult {
    Strategy strategy;          // repaired, feasible
    double value = 0.0;         // best dual value (upper bound on max_x B)
    double primal_value = 0.0;  // B at the repaired strategy
    DualPoint dual;
    int iterations = 0;
    bool converged = false;
};

/// Same projected descent with the subset held fixed; the inner step reduces
/// to one closed-form maximization per member. With the transformed inner
/// problem concave, strong duality makes this solve max_x B(S, x, delta0).
/// Cardinality constraints are not checked (baselines run it with S = all).
inline FixedSubsetResult pgd_solve_fixed_subset(const GameInstance& g,
                                                const std::vector<int>& S, double delta0,
                                                double xi, const PgdParams& params = {}) {
    if (!(xi > 0)) throw std::domain_error("pgd_solve_fixed_subset: xi must be positive");
    if (S.empty()) throw ValidationError("pgd_solve_fixed_subset: empty subset");
    const int L = g.n_partitions();
    auto solve = [&](const DualPoint& d) {
        detail::DualEval e;
        e.subset = S;
        e.x_star.resize(S.size());
        e.y_star.resize(S.size());
        double value = d.nu * g.m;
        for (int l = 0; l < L; ++l) value += d.mu[l] * g.beta[l];
        for (size_t i = 0; i < S.size(); ++i) {
            const int j = S[i];
            const auto cb = detail::center_best(g, j, d.nu, d.mu[g.partition_of(j)], delta0);
            e.x_star[i] = cb.x_star;
            e.y_star[i] = cb.y_star;
            value += cb.h;
        }
        e.value = value;
        return e;
    };
    detail::PgdCore core = detail::pgd_descent(g, xi, params, solve);

    FixedSubsetResult res;
    res.strategy = extract_strategy(g, core.best.subset, core.best.x_star);
    res.value = core.best.value;
    res.primal_value = bopt_value(g, res.strategy, delta0);
    res.dual = core.best_dual;
    res.iterations = core.iterations;
    res.converged = core.converged;
    return res;
}

}  // namespace qsg
