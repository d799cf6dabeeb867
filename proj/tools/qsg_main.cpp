// qsg: solver CLI for the center-selection security game.
//
// Subcommands: solve, generate, experiment, verify. Exit codes:
//   0 ok, 2 configuration, 3 size guard, 4 infeasible, 5 timeout,
//   6 parse/validation, 10 unexpected error.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qsg/qsg.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSize = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitTimeout = 5;
constexpr int kExitParse = 6;
constexpr int kExitUnexpected = 10;

nlohmann::json report_to_json(const qsg::SolveReport& rep) {
    nlohmann::json j;
    j["method"] = qsg::method_name(rep.method);
    j["delta0"] = rep.delta0_final;
    j["utility"] = rep.utility;
    j["bound_gap"] = rep.bound_gap;
    j["bisect_iterations"] = rep.bisect_iterations;
    j["wall_time_sec"] = rep.wall_time_sec;
    j["strategy"]["subset"] = rep.strategy.subset;
    j["strategy"]["coverage"] = rep.strategy.coverage;
    j["diagnostics"] = rep.inner_diagnostics;
    return j;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver for the joint center-selection / security-allocation game"};
    app.require_subcommand(1);

    // solve
    std::string solve_path, solve_method = "hybrid", solve_out, solver_cmd;
    double epsilon = 1e-3, xi = 1e-5, solver_timeout = 600;
    int pieces = 20;
    auto* solve = app.add_subcommand("solve", "solve one instance file");
    solve->add_option("instance", solve_path, "instance file (JSON)")->required();
    solve->add_option("--method", solve_method,
                      "hybrid|heuristic|milp|convexopt|twosteps|oracle");
    solve->add_option("--epsilon", epsilon, "bisection tolerance");
    solve->add_option("--xi", xi, "dual descent stopping tolerance");
    solve->add_option("--pieces", pieces, "PWLA pieces K");
    solve->add_option("--out", solve_out, "write the report (JSON) here");
    solve->add_option("--solver-cmd", solver_cmd, "external MILP solver command");
    solve->add_option("--solver-timeout", solver_timeout, "external solver timeout (s)");

    // generate
    std::uint64_t gen_seed = 0;
    int gen_n = 20;
    std::string gen_out;
    bool gen_fairness = false;
    double gen_lambda, gen_m, gen_beta;
    int gen_cap, gen_np, gen_parts;
    auto* gen = app.add_subcommand("generate", "generate a random instance");
    gen->add_option("--seed", gen_seed, "PRNG seed")->required();
    gen->add_option("--n", gen_n, "number of candidate centers")->required();
    gen->add_option("--out", gen_out, "output instance file")->required();
    auto* opt_lambda = gen->add_option("--lambda", gen_lambda, "override lambda");
    auto* opt_m = gen->add_option("--m", gen_m, "override resources m");
    auto* opt_cap = gen->add_option("--cap-c", gen_cap, "override cap_C");
    auto* opt_np = gen->add_option("--min-np", gen_np, "override min_NP");
    auto* opt_parts = gen->add_option("--partitions", gen_parts, "override partition count");
    auto* opt_beta = gen->add_option("--beta", gen_beta, "override per-partition cap");
    gen->add_flag("--fairness-scenario", gen_fairness,
                  "apply the fairness scenario (partition 0 attacker bump, tight caps)");

    // experiment
    std::string exp_name = "expected_reward", exp_sizes = "20", exp_methods =
                               "hybrid,heuristic,convexopt,twosteps",
                exp_outdir = "qsg_out", exp_pieces_list = "5,10,15,20,25,30", exp_budgets;
    int exp_reps = 10, exp_pieces_ref = 200, exp_threads = 0;
    std::uint64_t exp_seed_base = 0;
    auto* exp = app.add_subcommand("experiment", "run an experiment suite, emit CSV");
    exp->add_option("--name", exp_name, "pwla_convergence|expected_reward|scalability|fairness")
        ->required();
    exp->add_option("--sizes", exp_sizes, "comma-separated instance sizes");
    exp->add_option("--reps", exp_reps, "repetitions (seeds) per configuration");
    exp->add_option("--seed-base", exp_seed_base, "first seed");
    exp->add_option("--methods", exp_methods, "comma-separated method list");
    exp->add_option("--out-dir", exp_outdir, "output directory");
    exp->add_option("--pieces-list", exp_pieces_list, "K sweep for pwla_convergence");
    exp->add_option("--pieces-ref", exp_pieces_ref, "reference K for pwla_convergence");
    exp->add_option("--budgets", exp_budgets, "optional m sweep at the first size");
    exp->add_option("--epsilon", epsilon, "bisection tolerance");
    exp->add_option("--xi", xi, "dual descent stopping tolerance");
    exp->add_option("--threads", exp_threads, "worker threads (0 = hardware)");

    // verify
    std::string verify_level = "fast";
    auto* ver = app.add_subcommand("verify", "run the invariant suites");
    ver->add_option("--level", verify_level, "fast|full");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            const auto method = qsg::method_from_name(solve_method);
            if (!method) throw qsg::ConfigError("unknown method: " + solve_method);
            const qsg::GameInstance g = qsg::read_instance(solve_path);
            qsg::SolveOptions opts;
            opts.epsilon = epsilon;
            opts.xi = xi;
            opts.pieces = pieces;
            opts.solver_cmd = solver_cmd;
            opts.solver_timeout = solver_timeout;
            const qsg::SolveReport rep = qsg::solve_with_method(g, *method, opts);
            const nlohmann::json j = report_to_json(rep);
            std::cout << j.dump(2) << '\n';
            if (!solve_out.empty()) {
                std::ofstream f(solve_out);
                f << j.dump(2) << '\n';
            }
            return 0;
        }
        if (*gen) {
            qsg::GenerateOverrides ov;
            if (*opt_lambda) ov.lambda = gen_lambda;
            if (*opt_m) ov.m = gen_m;
            if (*opt_cap) ov.cap_C = gen_cap;
            if (*opt_np) ov.min_NP = gen_np;
            if (*opt_parts) ov.n_partitions = gen_parts;
            if (*opt_beta) ov.beta = gen_beta;
            qsg::GameInstance g = qsg::generate_instance(gen_seed, gen_n, ov);
            if (gen_fairness) g = qsg::apply_fairness_scenario(g);
            qsg::write_instance(g, gen_out);
            std::cout << "wrote " << gen_out << " (n=" << g.n_centers << ", m=" << g.m << ")\n";
            return 0;
        }
        if (*exp) {
            const auto kind = qsg::experiment_from_name(exp_name);
            if (!kind) throw qsg::ConfigError("unknown experiment: " + exp_name);
            qsg::ExperimentConfig cfg;
            cfg.experiment = *kind;
            cfg.sizes = parse_int_list(exp_sizes);
            cfg.repetitions = exp_reps;
            cfg.seed_base = exp_seed_base;
            cfg.output_dir = exp_outdir;
            cfg.pieces_list = parse_int_list(exp_pieces_list);
            cfg.pieces_ref = exp_pieces_ref;
            if (!exp_budgets.empty()) cfg.budgets = parse_double_list(exp_budgets);
            cfg.epsilon = epsilon;
            cfg.xi = xi;
            cfg.threads = exp_threads;
            cfg.methods.clear();
            std::istringstream ms(exp_methods);
            std::string tok;
            while (std::getline(ms, tok, ',')) {
                const auto m = qsg::method_from_name(tok);
                if (!m) throw qsg::ConfigError("unknown method: " + tok);
                cfg.methods.push_back(*m);
            }
            if (cfg.sizes.empty() || cfg.repetitions < 1 || cfg.methods.empty())
                throw qsg::ConfigError("experiment needs nonempty sizes/methods, reps >= 1");
            const auto result = qsg::run_experiment(cfg);
            std::cout << "experiment " << exp_name << ": " << result.runs.size()
                      << " runs, output in " << exp_outdir << '\n';
            for (const auto& r : result.runs)
                if (r.status != "ok")
                    std::cout << "  run " << r.run_id << " (" << r.method << ", n=" << r.n
                              << "): " << r.status << '\n';
            return 0;
        }
        if (*ver) {
            if (verify_level != "fast" && verify_level != "full")
                throw qsg::ConfigError("verify level must be fast or full");
            const auto results = qsg::run_verify(verify_level == "full");
            bool all = true;
            for (const auto& r : results) {
                std::printf("%-36s %s  (%s)\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                            r.detail.c_str());
                all = all && r.pass;
            }
            std::printf("verify %s: %s\n", verify_level.c_str(), all ? "all suites passed"
                                                                     : "FAILURES present");
            return all ? 0 : 1;
        }
    } catch (const qsg::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qsg::SizeError& e) {
        std::cerr << "size error: " << e.what() << '\n';
        return kExitSize;
    } catch (const qsg::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const qsg::TimeoutError& e) {
        std::cerr << "timeout: " << e.what() << '\n';
        return kExitTimeout;
    } catch (const qsg::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitParse;
    } catch (const qsg::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnexpected;
    }
    return 0;
}
