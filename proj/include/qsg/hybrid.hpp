#pragma once

#include <cstdlib>
#include <string>

#include "qsg/pwla.hpp"
#include "qsg/search.hpp"

namespace qsg {

inline InnerSolver make_exact_inner(const GameInstance& g, double xi) {
    return [&g, xi](double delta0) {
        auto [strategy, objective] = solve_small_exact(g, delta0, xi);
        InnerSolution sol;
        sol.strategy = std::move(strategy);
        sol.objective = objective;
        sol.diag["exact_inner_calls"] = 1;
        return sol;
    };
}

inline InnerSolver make_pwla_grid_inner(const GameInstance& g, int pieces) {
    return [&g, pieces](double delta0) {
        auto [strategy, objective] = solve_pwla_grid(g, delta0, pieces);
        InnerSolution sol;
        sol.strategy = std::move(strategy);
        sol.objective = objective;
        sol.diag["pwla_inner_calls"] = 1;
        return sol;
    };
}

inline InnerSolver make_external_inner(const GameInstance& g, int pieces,
                                       const std::string& solver_cmd, double timeout_sec) {
    return [&g, pieces, solver_cmd, timeout_sec](double delta0) {
        const PwlaModel mod = build_pwla(g, delta0, pieces);
        const ExternalSolution ext = solve_external(mod, solver_cmd, timeout_sec);
        InnerSolution sol;
        sol.strategy = strategy_from_assignment(mod, ext.values);
        sol.objective = ext.objective;
        sol.diag["external_inner_calls"] = 1;
        return sol;
    };
}

struct HybridOptions {
    double epsilon = 1e-3;
    double xi = 1e-5;            // clamped to epsilon/100 if larger
    int pieces = 20;             // K for the PWLA leg
    std::string solver_cmd;      // falls back to QSG_MILP_SOLVER
    double solver_timeout = 600.0;
    int pwla_dp_limit = 300;     // largest n handled by the internal PWLA leg
    PgdParams pgd{.polyak = true};
};

inline std::string milp_solver_from_env() {
    const char* env = std::getenv("QSG_MILP_SOLVER");
    return env ? env : "";
}

/// Two-leg solve: run the dual heuristic inside the bisection; accept its
/// answer when the self-reported bound gap |delta0 - F| is within epsilon.
/// Otherwise rerun the bisection with a PWLA leg between the bounds the
/// heuristic just certified (lower = F of its strategy, upper = delta0 + 2
/// epsilon), polish coverage on the returned subset, and keep the best
/// strategy seen. The PWLA leg uses the exact small solver for n <= 16, the
/// internal lattice solver up to pwla_dp_limit, then an external MILP solver
/// if configured; with none available the heuristic answer is returned with
/// a warning flag in the diagnostics.
inline SolveReport hybrid_solve(const GameInstance& g, const HybridOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eps = opts.epsilon;
    const double xi = std::min(opts.xi, eps * 1e-2);

    SolveReport heur = binary_search(g, make_heuristic_inner(g, xi, opts.pgd), eps,
                                     Method::heuristic);
    SolveReport rep = heur;
    rep.method = Method::hybrid;
    rep.inner_diagnostics["milp_invoked"] = 0;
    rep.inner_diagnostics["heuristic_utility"] = heur.utility;

    const double gap = std::abs(heur.delta0_final - heur.utility);
    if (gap > eps) {
        InnerSolver milp_inner;
        std::string solver_cmd = opts.solver_cmd.empty() ? milp_solver_from_env() : opts.solver_cmd;
        if (g.n_centers <= 16)
            milp_inner = make_exact_inner(g, xi);
        else if (g.n_centers <= opts.pwla_dp_limit)
            milp_inner = make_pwla_grid_inner(g, opts.pieces);
        else if (!solver_cmd.empty())
            milp_inner = make_external_inner(g, opts.pieces, solver_cmd, opts.solver_timeout);

        if (!milp_inner) {
            rep.inner_diagnostics["warning_no_milp_leg"] = 1;
        } else {
            rep.inner_diagnostics["milp_invoked"] = 1;
            BisectBounds bounds;
            bounds.lower = heur.utility;
            bounds.upper = std::max(heur.delta0_final, heur.utility) + 2 * eps;
            SolveReport milp = binary_search(g, milp_inner, eps, Method::milp, bounds);
            SolveReport polish =
                optimize_coverage(g, milp.strategy.subset, eps, xi, Method::hybrid, opts.pgd);

            // never lose ground: keep the best of heuristic, milp leg, polish
            rep.bisect_iterations += milp.bisect_iterations + polish.bisect_iterations;
            detail::merge_diag(rep.inner_diagnostics, milp.inner_diagnostics);
            for (const SolveReport* cand : {&milp, &polish}) {
                const double u = defender_utility(g, cand->strategy);
                if (u > rep.utility) {
                    rep.strategy = cand->strategy;
                    rep.utility = u;
                    rep.delta0_final = cand->delta0_final;
                }
            }
        }
    }
    rep.bound_gap = std::abs(rep.delta0_final - rep.utility);
    rep.wall_time_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace qsg
