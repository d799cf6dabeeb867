#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qsg/baselines.hpp"
#include "qsg/hybrid.hpp"
#include "qsg/instance_io.hpp"
#include "qsg/oracle.hpp"

namespace qsg {

// ---------------------------------------------------------------------------
// method dispatch shared by the CLI and the experiment harness
// ---------------------------------------------------------------------------

struct SolveOptions {
    double epsilon = 1e-3;
    double xi = 1e-5;
    int pieces = 20;
    std::string solver_cmd;  // empty -> QSG_MILP_SOLVER
    double solver_timeout = 600.0;
};

inline SolveReport solve_with_method(const GameInstance& g, Method method,
                                     const SolveOptions& opts = {}) {
    switch (method) {
        case Method::hybrid: {
            HybridOptions h;
            h.epsilon = opts.epsilon;
            h.xi = opts.xi;
            h.pieces = opts.pieces;
            h.solver_cmd = opts.solver_cmd;
            h.solver_timeout = opts.solver_timeout;
            return hybrid_solve(g, h);
        }
        case Method::heuristic:
            return binary_search(g, make_heuristic_inner(g, opts.xi), opts.epsilon,
                                 Method::heuristic);
        case Method::milp: {
            if (g.n_centers <= 16)
                return binary_search(g, make_exact_inner(g, opts.xi), opts.epsilon, Method::milp);
            const std::string cmd =
                opts.solver_cmd.empty() ? milp_solver_from_env() : opts.solver_cmd;
            if (cmd.empty())
                throw ConfigError(
                    "milp method needs an external solver for n > 16; pass --solver-cmd or set "
                    "QSG_MILP_SOLVER (the hybrid method runs without one)");
            return binary_search(g, make_external_inner(g, opts.pieces, cmd, opts.solver_timeout),
                                 opts.epsilon, Method::milp);
        }
        case Method::convexopt:
            return convex_opt(g, opts.epsilon, opts.xi);
        case Method::twosteps:
            return two_steps(g, opts.epsilon, opts.xi);
        case Method::oracle: {
            const auto t0 = std::chrono::steady_clock::now();
            OracleResult orc = brute_force_eqopt(g);
            SolveReport rep;
            rep.method = Method::oracle;
            rep.strategy = orc.best_strategy;
            rep.utility = orc.best_utility;
            rep.delta0_final = orc.best_utility;
            rep.bound_gap = orc.error_bound;
            rep.inner_diagnostics["subsets_evaluated"] =
                static_cast<double>(orc.subsets_evaluated);
            rep.wall_time_sec =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return rep;
        }
    }
    throw ConfigError("unknown method");
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

enum class ExperimentKind { pwla_convergence, expected_reward, scalability, fairness };

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::pwla_convergence: return "pwla_convergence";
        case ExperimentKind::expected_reward: return "expected_reward";
        case ExperimentKind::scalability: return "scalability";
        case ExperimentKind::fairness: return "fairness";
    }
    return "?";
}

inline std::optional<ExperimentKind> experiment_from_name(const std::string& s) {
    for (ExperimentKind k :
         {ExperimentKind::pwla_convergence, ExperimentKind::expected_reward,
          ExperimentKind::scalability, ExperimentKind::fairness})
        if (s == experiment_name(k)) return k;
    return std::nullopt;
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::expected_reward;
    std::vector<int> sizes = {20};
    int repetitions = 10;
    std::uint64_t seed_base = 0;
    std::vector<Method> methods = {Method::hybrid, Method::heuristic, Method::convexopt,
                                   Method::twosteps};
    std::string output_dir = "qsg_out";
    std::vector<int> pieces_list = {5, 10, 15, 20, 25, 30};  // pwla_convergence sweep
    int pieces_ref = 200;                                    // reference K
    std::vector<double> budgets;  // optional m sweep at n = sizes.front()
    double epsilon = 1e-3;
    double xi = 1e-5;
    int threads = 0;  // 0 -> hardware concurrency
};

struct RunRecord {
    std::string experiment;
    int run_id = 0;
    std::uint64_t seed = 0;
    int n = 0;
    double m = 0;
    int pieces = 0;
    std::string method;
    std::string status = "ok";
    double utility = 0;
    double delta0 = 0;
    double bound_gap = 0;
    int bisect_iterations = 0;
    double pgd_iterations = 0;
    double tie_solves = 0;
    double milp_invoked = 0;
    double wall_time_ms = 0;
};

struct FairnessRecord {
    std::uint64_t seed = 0;
    int partition = 0;
    bool fsa = true;
    double total_coverage = 0;
    double beta = 0;
};

struct PwlaGapRecord {
    std::uint64_t seed = 0;
    int n = 0;
    int pieces = 0;
    double utility = 0;
    double utility_ref = 0;
    double gap_percent = 0;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    std::vector<FairnessRecord> fairness;
    std::vector<PwlaGapRecord> pwla_gaps;
};

namespace detail {

inline double diag_of(const SolveReport& rep, const char* key) {
    const auto it = rep.inner_diagnostics.find(key);
    return it == rep.inner_diagnostics.end() ? 0.0 : it->second;
}

inline RunRecord record_from_report(const SolveReport& rep) {
    RunRecord r;
    r.method = method_name(rep.method);
    r.utility = rep.utility;
    r.delta0 = rep.delta0_final;
    r.bound_gap = rep.bound_gap;
    r.bisect_iterations = rep.bisect_iterations;
    r.pgd_iterations = diag_of(rep, "pgd_iterations");
    r.tie_solves = diag_of(rep, "tie_solves");
    r.milp_invoked = diag_of(rep, "milp_invoked");
    r.wall_time_ms = rep.wall_time_sec * 1e3;
    return r;
}

// runs tasks 0..count-1 on a pool; each task must only touch its own slot
template <typename Fn>
void parallel_for(int count, int threads, Fn fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace detail

/// Runs the configured experiment and writes runs.csv / aggregate.csv plus the
/// experiment-specific files under output_dir. Per-run seeds are
/// seed_base + repetition index, so results do not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    ExperimentResult result;
    SolveOptions sopts;
    sopts.epsilon = cfg.epsilon;
    sopts.xi = cfg.xi;

    if (cfg.experiment == ExperimentKind::pwla_convergence) {
        struct Task {
            std::uint64_t seed;
            int n;
        };
        std::vector<Task> tasks;
        for (int n : cfg.sizes)
            for (int rep = 0; rep < cfg.repetitions; ++rep)
                tasks.push_back({cfg.seed_base + static_cast<std::uint64_t>(rep), n});
        std::vector<std::vector<PwlaGapRecord>> rows(tasks.size());
        detail::parallel_for(static_cast<int>(tasks.size()), cfg.threads, [&](int i) {
            const auto [seed, n] = tasks[i];
            const GameInstance g = generate_instance(seed, n);
            const double eps = std::min(cfg.epsilon, 1e-4);  // keep bisection noise below the gaps
            const SolveReport ref =
                binary_search(g, make_pwla_grid_inner(g, cfg.pieces_ref), eps, Method::milp);
            for (int K : cfg.pieces_list) {
                const SolveReport rep =
                    binary_search(g, make_pwla_grid_inner(g, K), eps, Method::milp);
                PwlaGapRecord rec;
                rec.seed = seed;
                rec.n = n;
                rec.pieces = K;
                rec.utility = rep.utility;
                rec.utility_ref = ref.utility;
                rec.gap_percent = 100.0 * std::abs(rep.utility - ref.utility) /
                                  std::max(1e-12, std::abs(ref.utility));
                rows[i].push_back(rec);
            }
        });
        for (auto& rs : rows)
            for (auto& r : rs) result.pwla_gaps.push_back(r);

        std::ofstream f(cfg.output_dir + "/pwla_gaps.csv");
        f << "seed,n,K,utility,utility_ref,gap_percent\n";
        for (const auto& r : result.pwla_gaps)
            f << r.seed << ',' << r.n << ',' << r.pieces << ',' << detail::csv_num(r.utility)
              << ',' << detail::csv_num(r.utility_ref) << ',' << detail::csv_num(r.gap_percent)
              << '\n';
    } else if (cfg.experiment == ExperimentKind::fairness) {
        struct Slot {
            std::vector<FairnessRecord> recs;
            RunRecord run_with, run_without;
        };
        std::vector<Slot> slots(cfg.repetitions);
        detail::parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
            const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(rep);
            const int n = cfg.sizes.front();
            const GameInstance with_fsa = apply_fairness_scenario(generate_instance(seed, n));
            GameInstance without_fsa = with_fsa;
            std::fill(without_fsa.beta.begin(), without_fsa.beta.end(), 1e9);  // FSA disabled
            const Method method = cfg.methods.front();
            for (bool fsa : {true, false}) {
                const GameInstance& g = fsa ? with_fsa : without_fsa;
                const SolveReport rep_s = solve_with_method(g, method, sopts);
                std::vector<double> totals(g.n_partitions(), 0.0);
                for (int i = 0; i < rep_s.strategy.size(); ++i)
                    totals[g.partition_of(rep_s.strategy.subset[i])] += rep_s.strategy.coverage[i];
                for (int l = 0; l < g.n_partitions(); ++l) {
                    FairnessRecord fr;
                    fr.seed = seed;
                    fr.partition = l;
                    fr.fsa = fsa;
                    fr.total_coverage = totals[l];
                    fr.beta = with_fsa.beta[l];
                    slots[rep].recs.push_back(fr);
                }
                RunRecord run = detail::record_from_report(rep_s);
                run.experiment = "fairness";
                run.seed = seed;
                run.n = n;
                run.m = g.m;
                (fsa ? slots[rep].run_with : slots[rep].run_without) = run;
            }
        });
        int run_id = 0;
        for (auto& s : slots) {
            for (auto& r : s.recs) result.fairness.push_back(r);
            s.run_with.run_id = run_id++;
            s.run_without.run_id = run_id++;
            result.runs.push_back(s.run_with);
            result.runs.push_back(s.run_without);
        }
        std::ofstream f(cfg.output_dir + "/fairness_partitions.csv");
        f << "seed,partition,fsa,total_coverage,beta\n";
        for (const auto& r : result.fairness)
            f << r.seed << ',' << r.partition << ',' << (r.fsa ? "with" : "without") << ','
              << detail::csv_num(r.total_coverage) << ',' << detail::csv_num(r.beta) << '\n';
    } else {
        // expected_reward / scalability share the sweep shape
        struct Task {
            std::uint64_t seed;
            int n;
            std::optional<double> m;
            Method method;
        };
        std::vector<Task> tasks;
        for (int n : cfg.sizes)
            for (int rep = 0; rep < cfg.repetitions; ++rep)
                for (Method mth : cfg.methods)
                    tasks.push_back({cfg.seed_base + static_cast<std::uint64_t>(rep), n,
                                     std::nullopt, mth});
        for (double m : cfg.budgets)  // optional budget sweep at the first size
            for (int rep = 0; rep < cfg.repetitions; ++rep)
                for (Method mth : cfg.methods)
                    tasks.push_back({cfg.seed_base + static_cast<std::uint64_t>(rep),
                                     cfg.sizes.front(), m, mth});

        std::vector<RunRecord> rows(tasks.size());
        detail::parallel_for(static_cast<int>(tasks.size()), cfg.threads, [&](int i) {
            const Task& t = tasks[i];
            RunRecord rec;
            rec.experiment = experiment_name(cfg.experiment);
            rec.run_id = i;
            rec.seed = t.seed;
            rec.n = t.n;
            rec.method = method_name(t.method);
            try {
                GenerateOverrides ov;
                ov.m = t.m;
                const GameInstance g = generate_instance(t.seed, t.n, ov);
                rec.m = g.m;
                const SolveReport rep = solve_with_method(g, t.method, sopts);
                RunRecord filled = detail::record_from_report(rep);
                filled.experiment = rec.experiment;
                filled.run_id = rec.run_id;
                filled.seed = rec.seed;
                filled.n = rec.n;
                filled.m = rec.m;
                rec = filled;
            } catch (const std::exception& e) {
                rec.status = std::string("error: ") + e.what();
            }
            rows[i] = rec;
        });
        result.runs = std::move(rows);
    }

    // runs.csv + aggregate.csv
    if (!result.runs.empty()) {
        std::ofstream f(cfg.output_dir + "/runs.csv");
        f << "experiment,run_id,seed,n,m,K,method,status,utility,delta0,bound_gap,"
             "bisect_iterations,pgd_iterations,tie_solves,milp_invoked,wall_time_ms\n";
        for (const auto& r : result.runs)
            f << r.experiment << ',' << r.run_id << ',' << r.seed << ',' << r.n << ','
              << detail::csv_num(r.m) << ',' << r.pieces << ',' << r.method << ',' << r.status
              << ',' << detail::csv_num(r.utility) << ',' << detail::csv_num(r.delta0) << ','
              << detail::csv_num(r.bound_gap) << ',' << r.bisect_iterations << ','
              << detail::csv_num(r.pgd_iterations) << ',' << detail::csv_num(r.tie_solves) << ','
              << detail::csv_num(r.milp_invoked) << ',' << detail::csv_num(r.wall_time_ms)
              << '\n';

        struct Agg {
            int count = 0;
            double u_sum = 0, u_sq = 0, t_sum = 0, t_sq = 0;
        };
        std::map<std::string, Agg> aggs;
        for (const auto& r : result.runs) {
            if (r.status != "ok") continue;
            char key[160];
            std::snprintf(key, sizeof key, "%s,%d,%s,%d,%s", r.experiment.c_str(), r.n,
                          detail::csv_num(r.m).c_str(), r.pieces, r.method.c_str());
            Agg& a = aggs[key];
            ++a.count;
            a.u_sum += r.utility;
            a.u_sq += r.utility * r.utility;
            a.t_sum += r.wall_time_ms;
            a.t_sq += r.wall_time_ms * r.wall_time_ms;
        }
        std::ofstream fa(cfg.output_dir + "/aggregate.csv");
        fa << "experiment,n,m,K,method,runs,utility_mean,utility_stderr,time_ms_mean,"
              "time_ms_stderr\n";
        for (const auto& [key, a] : aggs) {
            const double um = a.u_sum / a.count;
            const double tv = a.t_sum / a.count;
            const double uvar = std::max(0.0, a.u_sq / a.count - um * um);
            const double tvar = std::max(0.0, a.t_sq / a.count - tv * tv);
            const double den = a.count > 1 ? std::sqrt(static_cast<double>(a.count - 1)) : 1.0;
            fa << key << ',' << a.count << ',' << detail::csv_num(um) << ','
               << detail::csv_num(std::sqrt(uvar) / den) << ',' << detail::csv_num(tv) << ','
               << detail::csv_num(std::sqrt(tvar) / den) << '\n';
        }
    }

    // metadata: environment matters when reading wall-clock columns
    {
        nlohmann::json meta;
        meta["experiment"] = experiment_name(cfg.experiment);
        meta["sizes"] = cfg.sizes;
        meta["repetitions"] = cfg.repetitions;
        meta["seed_base"] = cfg.seed_base;
        meta["epsilon"] = cfg.epsilon;
        meta["xi"] = cfg.xi;
        meta["hardware_threads"] = std::thread::hardware_concurrency();
        std::vector<std::string> ms;
        for (Method m : cfg.methods) ms.push_back(method_name(m));
        meta["methods"] = ms;
        std::ofstream fm(cfg.output_dir + "/meta.json");
        fm << meta.dump(2) << '\n';
    }
    return result;
}

}  // namespace qsg
