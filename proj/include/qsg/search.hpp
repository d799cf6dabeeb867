#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "qsg/dual_heuristic.hpp"

namespace qsg {

enum class Method { heuristic, milp, hybrid, convexopt, twosteps, oracle };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::heuristic: return "heuristic";
        case Method::milp: return "milp";
        case Method::hybrid: return "hybrid";
        case Method::convexopt: return "convexopt";
        case Method::twosteps: return "twosteps";
        case Method::oracle: return "oracle";
    }
    return "?";
}

inline std::optional<Method> method_from_name(const std::string& s) {
    for (Method m : {Method::heuristic, Method::milp, Method::hybrid, Method::convexopt,
                     Method::twosteps, Method::oracle})
        if (s == method_name(m)) return m;
    return std::nullopt;
}

/// Result of one solve: the final threshold, the strategy, its recomputed
/// utility and solver diagnostics.
struct SolveReport {
    double delta0_final = 0.0;
    Strategy strategy;
    double utility = 0.0;    // defender_utility, recomputed at report time
    double bound_gap = 0.0;  // |delta0_final - utility|
    Method method = Method::heuristic;
    int bisect_iterations = 0;
    std::map<std::string, double> inner_diagnostics;
    double wall_time_sec = 0.0;
};

/// One inner solve of the thresholded problem at a given delta0: a strategy
/// approximately maximizing B plus the attained objective (its sign drives the
/// bisection) and diagnostics to aggregate.
struct InnerSolution {
    Strategy strategy;
    double objective = 0.0;
    std::map<std::string, double> diag;
};
using InnerSolver = std::function<InnerSolution(double)>;

struct BisectBounds {
    std::optional<double> lower;  // a value with inner objective known >= 0
    std::optional<double> upper;  // a value with inner objective known < 0
};

namespace detail {
inline void merge_diag(std::map<std::string, double>& into,
                       const std::map<std::string, double>& from) {
    for (const auto& [k, v] : from) into[k] += v;
}
}  // namespace detail

/// Bisection on the threshold delta0: raises the lower bound while the inner
/// objective is >= 0, otherwise lowers the upper bound, until the bracket is
/// narrower than epsilon. Default bracket: U = max_j (w_def_j + loss_def_j),
/// L = min_j loss_def_j. Returns the last inner solution at the final delta0.
inline SolveReport binary_search(const GameInstance& g, const InnerSolver& inner, double epsilon,
                                 Method tag = Method::heuristic, const BisectBounds& bounds = {}) {
    if (!(epsilon > 0)) throw std::domain_error("binary_search: epsilon must be positive");
    const auto t0 = std::chrono::steady_clock::now();

    double upper, lower;
    if (bounds.upper) {
        upper = *bounds.upper;
    } else {
        upper = -1e300;
        for (int j = 0; j < g.n_centers; ++j) upper = std::max(upper, g.w_def(j) + g.loss_def[j]);
    }
    if (bounds.lower) {
        lower = *bounds.lower;
    } else {
        lower = 1e300;
        for (int j = 0; j < g.n_centers; ++j) lower = std::min(lower, g.loss_def[j]);
    }

    SolveReport rep;
    rep.method = tag;
    InnerSolution last;
    double last_delta = 0.5 * (upper + lower);
    bool ran = false;
    int iters = 0;
    while (upper - lower >= epsilon) {
        const double delta0 = 0.5 * (upper + lower);
        InnerSolution sol;
        try {
            sol = inner(delta0);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error("inner solver failed at delta0=" + std::to_string(delta0) +
                        " (iteration " + std::to_string(iters + 1) + "): " + e.what());
        }
        ++iters;
        if (sol.objective >= 0)
            lower = delta0;
        else
            upper = delta0;
        last = std::move(sol);
        last_delta = delta0;
        ran = true;
    }
    if (!ran) {  // degenerate bracket: still produce a strategy
        last = inner(last_delta);
    }

    rep.delta0_final = last_delta;
    rep.strategy = last.strategy;
    rep.utility = defender_utility(g, rep.strategy);
    rep.bound_gap = std::abs(rep.delta0_final - rep.utility);
    rep.bisect_iterations = iters;
    rep.inner_diagnostics = last.diag;
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Heuristic inner solver: projected dual descent with subset selection. The
/// objective reported to the bisection is the best dual value (an upper bound
/// on max B at delta0); the strategy is the repaired primal.
inline InnerSolver make_heuristic_inner(const GameInstance& g, double xi,
                                        const PgdParams& params = {.polyak = true}) {
    return [&g, xi, params](double delta0) {
        PgdResult res = pgd_solve(g, delta0, xi, params);
        InnerSolution sol;
        sol.strategy = extract_strategy(g, res.outcome);
        sol.objective = res.outcome.value;
        sol.diag["pgd_iterations"] = res.iterations;
        sol.diag["tie_solves"] = res.tie_solves;
        sol.diag["fixed_duals_calls"] = res.fixed_duals_calls;
        sol.diag["nonconverged_pgd"] = res.converged ? 0 : 1;
        return sol;
    };
}

/// Coverage-only solve on a fixed subset: bisection with the fixed-subset dual
/// descent inside. Shared by the baselines and the hybrid polish step so equal
/// subsets get identical coverage.
inline SolveReport optimize_coverage(const GameInstance& g, const std::vector<int>& S,
                                     double epsilon, double xi, Method tag,
                                     const PgdParams& params = {.polyak = true}) {
    InnerSolver inner = [&g, &S, xi, params](double delta0) {
        FixedSubsetResult r = pgd_solve_fixed_subset(g, S, delta0, xi, params);
        InnerSolution sol;
        sol.strategy = std::move(r.strategy);
        sol.objective = r.primal_value;
        sol.diag["pgd_iterations"] = r.iterations;
        sol.diag["nonconverged_pgd"] = r.converged ? 0 : 1;
        return sol;
    };
    return binary_search(g, inner, epsilon, tag);
}

}  // namespace qsg
