#pragma once

#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include "qsg/dual_heuristic.hpp"
#include "qsg/objective.hpp"

namespace qsg {

// ---------------------------------------------------------------------------
// Piecewise-linear model of the thresholded objective
//
// Coverage of center j is split into K intervals: x_j = sum_k r_jk with
// r_jk in [0, 1/K]. Binary z_jk with z_jk >= z_{j,k+1} enforce left-to-right
// fill: r_jk is pinned to 1/K while z_jk = 1 and to 0 once the previous
// interval is not full. theta_j selects the center; r_j1 <= theta_j/K makes an
// unselected center carry no coverage at all. Budget and cap rows are stored
// scaled by K (sum of K*r_jk <= K*m), which is the same constraint with
// lattice-unit coefficients.
// ---------------------------------------------------------------------------

enum class RowSense { le, ge, eq };

struct LinearRow {
    std::string name;
    std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
    RowSense sense = RowSense::le;
    double rhs = 0.0;
};

struct PwlaBuildOptions {
    // Reproduces the verbatim objective scaling K*theta_j*(g_j(0) - delta0*g_j(0))
    // for comparison runs. The default consistent scaling is the one that makes
    // the model coincide with B at every lattice point.
    bool literal_objective = false;
};

struct PwlaModel {
    GameInstance instance;
    int pieces = 0;  // K
    double delta0 = 0.0;

    std::vector<double> gamma_N;     // n*K, index j*K + (k-1)
    std::vector<double> gamma_g;     // n*K
    std::vector<double> const_term;  // g_j(0) - delta0 * N_j(0)

    std::vector<double> objective;  // coefficient per variable
    std::vector<LinearRow> rows;
    int coupling_row_count = 0;  // select + ordering + both coupling families

    int n() const { return instance.n_centers; }
    int n_vars() const { return n() * (1 + 2 * pieces); }
    int theta_index(int j) const { return j; }
    int r_index(int j, int k) const { return n() + j * pieces + (k - 1); }        // k in 1..K
    int z_index(int j, int k) const { return n() + n() * pieces + j * pieces + (k - 1); }

    std::string var_name(int idx) const {
        const int nn = n(), K = pieces;
        char buf[48];
        if (idx < nn) {
            std::snprintf(buf, sizeof buf, "t_%d", idx);
        } else if (idx < nn + nn * K) {
            const int j = (idx - nn) / K, k = (idx - nn) % K + 1;
            std::snprintf(buf, sizeof buf, "r_%d_%d", j, k);
        } else {
            const int rel = idx - nn - nn * K;
            std::snprintf(buf, sizeof buf, "z_%d_%d", rel / K, rel % K + 1);
        }
        return buf;
    }
};

namespace detail {
inline double pwla_g_of(const GameInstance& g, int j, double x) {
    return attack_weight(g, j, x) * (g.w_def(j) * x + g.loss_def[j]);
}
}  // namespace detail

inline PwlaModel build_pwla(const GameInstance& g, double delta0, int pieces,
                            const PwlaBuildOptions& opts = {}) {
    if (pieces <= 0) throw std::domain_error("build_pwla: pieces must be >= 1");
    PwlaModel mod;
    mod.instance = g;
    mod.pieces = pieces;
    mod.delta0 = delta0;

    const int n = g.n_centers, K = pieces;
    mod.gamma_N.resize(n * K);
    mod.gamma_g.resize(n * K);
    mod.const_term.resize(n);
    for (int j = 0; j < n; ++j) {
        mod.const_term[j] = detail::pwla_g_of(g, j, 0.0) - delta0 * attack_weight(g, j, 0.0);
        double n_prev = attack_weight(g, j, 0.0);
        double g_prev = detail::pwla_g_of(g, j, 0.0);
        for (int k = 1; k <= K; ++k) {
            const double x = static_cast<double>(k) / K;
            const double n_cur = attack_weight(g, j, x);
            const double g_cur = detail::pwla_g_of(g, j, x);
            mod.gamma_N[j * K + (k - 1)] = K * (n_cur - n_prev);
            mod.gamma_g[j * K + (k - 1)] = K * (g_cur - g_prev);
            n_prev = n_cur;
            g_prev = g_cur;
        }
    }

    mod.objective.assign(mod.n_vars(), 0.0);
    for (int j = 0; j < n; ++j) {
        if (opts.literal_objective) {
            const double g0 = detail::pwla_g_of(g, j, 0.0);
            mod.objective[mod.theta_index(j)] = K * (g0 - delta0 * g0);
        } else {
            mod.objective[mod.theta_index(j)] = mod.const_term[j];
        }
        for (int k = 1; k <= K; ++k)
            mod.objective[mod.r_index(j, k)] =
                mod.gamma_g[j * K + (k - 1)] - delta0 * mod.gamma_N[j * K + (k - 1)];
    }

    const double invK = 1.0 / K;
    auto add_row = [&](LinearRow row) { mod.rows.push_back(std::move(row)); };

    {
        LinearRow row{"budget", {}, RowSense::le, K * g.m};
        for (int j = 0; j < n; ++j)
            for (int k = 1; k <= K; ++k) row.terms.emplace_back(mod.r_index(j, k), double(K));
        add_row(std::move(row));
    }
    for (int l = 0; l < g.n_partitions(); ++l) {
        LinearRow row{"fsa_" + std::to_string(l), {}, RowSense::le, K * g.beta[l]};
        for (int j : g.partitions[l])
            for (int k = 1; k <= K; ++k) row.terms.emplace_back(mod.r_index(j, k), double(K));
        add_row(std::move(row));
    }
    {
        LinearRow lo{"card_lo", {}, RowSense::ge, double(g.min_NP)};
        LinearRow hi{"card_hi", {}, RowSense::le, double(g.cap_C)};
        for (int j = 0; j < n; ++j) {
            lo.terms.emplace_back(mod.theta_index(j), 1.0);
            hi.terms.emplace_back(mod.theta_index(j), 1.0);
        }
        add_row(std::move(lo));
        add_row(std::move(hi));
    }
    for (int l = 0; l < g.n_partitions(); ++l) {
        LinearRow row{"fvca_" + std::to_string(l), {}, RowSense::ge, 1.0};
        for (int j : g.partitions[l]) row.terms.emplace_back(mod.theta_index(j), 1.0);
        add_row(std::move(row));
    }
    // selection gate: r_j1 <= theta_j / K  (kills coverage of unselected centers)
    for (int j = 0; j < n; ++j) {
        LinearRow row{"sel_" + std::to_string(j), {}, RowSense::le, 0.0};
        row.terms.emplace_back(mod.r_index(j, 1), 1.0);
        row.terms.emplace_back(mod.theta_index(j), -invK);
        add_row(std::move(row));
        ++mod.coupling_row_count;
    }
    for (int j = 0; j < n; ++j)
        for (int k = 1; k < K; ++k) {
            LinearRow row{"ord_" + std::to_string(j) + "_" + std::to_string(k), {}, RowSense::ge, 0.0};
            row.terms.emplace_back(mod.z_index(j, k), 1.0);
            row.terms.emplace_back(mod.z_index(j, k + 1), -1.0);
            add_row(std::move(row));
            ++mod.coupling_row_count;
        }
    for (int j = 0; j < n; ++j)
        for (int k = 1; k <= K; ++k) {
            LinearRow row{"cpllo_" + std::to_string(j) + "_" + std::to_string(k), {}, RowSense::ge, 0.0};
            row.terms.emplace_back(mod.r_index(j, k), 1.0);
            row.terms.emplace_back(mod.z_index(j, k), -invK);
            add_row(std::move(row));
            ++mod.coupling_row_count;
        }
    // fill gate: interval k may carry mass only if interval k-1 is full
    for (int j = 0; j < n; ++j)
        for (int k = 2; k <= K; ++k) {
            LinearRow row{"cplhi_" + std::to_string(j) + "_" + std::to_string(k), {}, RowSense::le, 0.0};
            row.terms.emplace_back(mod.r_index(j, k), 1.0);
            row.terms.emplace_back(mod.z_index(j, k - 1), -invK);
            add_row(std::move(row));
            ++mod.coupling_row_count;
        }
    return mod;
}

// ---------------------------------------------------------------------------
// assignments
// ---------------------------------------------------------------------------

/// Canonical (theta, r, z) encoding of a subset and its coverage: full
/// intervals first, the fractional remainder in the next interval.
inline std::vector<double> encode_solution(const PwlaModel& mod, const std::vector<int>& S,
                                           const std::vector<double>& x) {
    std::vector<double> v(mod.n_vars(), 0.0);
    const int K = mod.pieces;
    for (size_t i = 0; i < S.size(); ++i) {
        const int j = S[i];
        v[mod.theta_index(j)] = 1.0;
        int full = static_cast<int>(std::floor(x[i] * K + 1e-9));
        full = std::min(full, K);
        const double frac = x[i] - static_cast<double>(full) / K;
        for (int k = 1; k <= full; ++k) {
            v[mod.r_index(j, k)] = 1.0 / K;
            v[mod.z_index(j, k)] = 1.0;
        }
        if (full < K && frac > 0) v[mod.r_index(j, full + 1)] = frac;
    }
    return v;
}

inline double pwla_objective_value(const PwlaModel& mod, const std::vector<double>& v) {
    double val = 0.0;
    for (size_t i = 0; i < v.size(); ++i) val += mod.objective[i] * v[i];
    return val;
}

/// Checks an assignment against every row, the r bounds and binary
/// integrality. Throws SolverOutputError naming the first violated row.
inline void validate_assignment(const PwlaModel& mod, const std::vector<double>& v,
                                double tol = 1e-6) {
    if (static_cast<int>(v.size()) != mod.n_vars())
        throw SolverOutputError("assignment has wrong length");
    const int n = mod.n(), K = mod.pieces;
    for (int j = 0; j < n; ++j) {
        const double t = v[mod.theta_index(j)];
        if (std::abs(t - std::round(t)) > tol)
            throw SolverOutputError("theta not binary for center " + std::to_string(j));
        for (int k = 1; k <= K; ++k) {
            const double z = v[mod.z_index(j, k)];
            if (std::abs(z - std::round(z)) > tol)
                throw SolverOutputError("z not binary at " + mod.var_name(mod.z_index(j, k)));
            const double r = v[mod.r_index(j, k)];
            if (r < -tol || r > 1.0 / K + tol)
                throw SolverOutputError("r out of bounds at " + mod.var_name(mod.r_index(j, k)));
        }
    }
    for (const LinearRow& row : mod.rows) {
        double lhs = 0.0;
        for (const auto& [idx, c] : row.terms) lhs += c * v[idx];
        const bool ok = row.sense == RowSense::le   ? lhs <= row.rhs + tol
                        : row.sense == RowSense::ge ? lhs >= row.rhs - tol
                                                    : std::abs(lhs - row.rhs) <= tol;
        if (!ok)
            throw SolverOutputError("row " + row.name + " violated: lhs=" + std::to_string(lhs) +
                                    " rhs=" + std::to_string(row.rhs));
    }
}

/// Maps an assignment back to the game: S = {j : theta_j = 1}, x_j = sum_k r_jk.
inline Strategy strategy_from_assignment(const PwlaModel& mod, const std::vector<double>& v) {
    Strategy s;
    const int K = mod.pieces;
    for (int j = 0; j < mod.n(); ++j) {
        if (v[mod.theta_index(j)] < 0.5) continue;
        double x = 0.0;
        for (int k = 1; k <= K; ++k) x += v[mod.r_index(j, k)];
        s.subset.push_back(j);
        s.coverage.push_back(std::clamp(x, 0.0, 1.0));
    }
    return s;
}

// ---------------------------------------------------------------------------
// LP text export and a reader for the same dialect
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void append_terms(std::string& out, const PwlaModel& mod,
                         const std::vector<std::pair<int, double>>& terms) {
    bool first = true;
    for (const auto& [idx, c] : terms) {
        if (first) {
            out += (c < 0 ? "-" : "");
            first = false;
        } else {
            out += (c < 0 ? " - " : " + ");
        }
        out += fmt_num(std::abs(c));
        out += ' ';
        out += mod.var_name(idx);
    }
}
}  // namespace detail

/// Deterministic LP text form (CPLEX-style dialect, one row per line).
inline std::string export_lp_string(const PwlaModel& mod) {
    std::string out;
    out += "\\ qsg pwla model: n=" + std::to_string(mod.n()) + " K=" + std::to_string(mod.pieces) +
           " delta0=" + detail::fmt_num(mod.delta0) + "\n";
    out += "Maximize\n obj: ";
    {
        std::vector<std::pair<int, double>> terms;
        for (int i = 0; i < mod.n_vars(); ++i)
            if (mod.objective[i] != 0.0) terms.emplace_back(i, mod.objective[i]);
        detail::append_terms(out, mod, terms);
    }
    out += "\nSubject To\n";
    for (const LinearRow& row : mod.rows) {
        out += ' ' + row.name + ": ";
        detail::append_terms(out, mod, row.terms);
        out += row.sense == RowSense::le ? " <= " : row.sense == RowSense::ge ? " >= " : " = ";
        out += detail::fmt_num(row.rhs);
        out += '\n';
    }
    out += "Bounds\n";
    for (int j = 0; j < mod.n(); ++j)
        for (int k = 1; k <= mod.pieces; ++k)
            out += " 0 <= " + mod.var_name(mod.r_index(j, k)) + " <= " +
                   detail::fmt_num(1.0 / mod.pieces) + "\n";
    out += "Binaries\n";
    for (int j = 0; j < mod.n(); ++j) out += ' ' + mod.var_name(mod.theta_index(j)) + '\n';
    for (int j = 0; j < mod.n(); ++j)
        for (int k = 1; k <= mod.pieces; ++k) out += ' ' + mod.var_name(mod.z_index(j, k)) + '\n';
    out += "End\n";
    return out;
}

inline void export_lp(const PwlaModel& mod, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write LP file: " + path);
    f << export_lp_string(mod);
}

/// Parsed LP problem (the dialect emitted by export_lp: named single-line rows).
struct LpProblem {
    bool maximize = true;
    std::vector<std::pair<std::string, double>> objective;
    struct Row {
        std::string name;
        std::vector<std::pair<std::string, double>> terms;
        RowSense sense;
        double rhs;
    };
    std::vector<Row> rows;
    std::map<std::string, std::pair<double, double>> bounds;  // var -> [lo, hi]
    std::set<std::string> binaries;
};

namespace detail {
inline std::vector<std::pair<std::string, double>> parse_terms(const std::string& text,
                                                               const std::string& ctx) {
    std::vector<std::pair<std::string, double>> terms;
    std::istringstream in(text);
    std::string tok;
    double sign = 1.0, coef = 1.0;
    bool has_coef = false;
    while (in >> tok) {
        if (tok == "+") {
            sign = 1.0;
        } else if (tok == "-") {
            sign = -1.0;
        } else if (std::isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '.' ||
                   ((tok[0] == '-' || tok[0] == '+') && tok.size() > 1)) {
            if (has_coef)
                throw ParseError("lp: two coefficients in a row near '" + tok + "' in " + ctx);
            coef = sign * std::stod(tok);
            has_coef = true;
            sign = 1.0;
        } else {
            terms.emplace_back(tok, has_coef ? coef : sign);
            has_coef = false;
            sign = 1.0;
        }
    }
    if (has_coef) throw ParseError("lp: dangling coefficient in " + ctx);
    return terms;
}
}  // namespace detail

inline LpProblem parse_lp_string(const std::string& text) {
    LpProblem lp;
    enum class Section { none, objective, rows, bounds, binaries, done };
    Section section = Section::none;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        line = line.substr(pos);
        if (line[0] == '\\') continue;  // comment
        const std::string low = lower(line);
        if (low.rfind("maximize", 0) == 0 || low.rfind("minimize", 0) == 0) {
            lp.maximize = low[2] == 'x';
            section = Section::objective;
            continue;
        }
        if (low.rfind("subject to", 0) == 0 || low == "st" || low == "s.t.") {
            section = Section::rows;
            continue;
        }
        if (low.rfind("bounds", 0) == 0) {
            section = Section::bounds;
            continue;
        }
        if (low.rfind("binar", 0) == 0) {
            section = Section::binaries;
            continue;
        }
        if (low.rfind("end", 0) == 0) {
            section = Section::done;
            break;
        }
        const std::string ctx = "line " + std::to_string(lineno);
        switch (section) {
            case Section::objective: {
                const auto colon = line.find(':');
                lp.objective = detail::parse_terms(
                    colon == std::string::npos ? line : line.substr(colon + 1), ctx);
                break;
            }
            case Section::rows: {
                const auto colon = line.find(':');
                if (colon == std::string::npos) throw ParseError("lp: row without name at " + ctx);
                LpProblem::Row row;
                row.name = line.substr(0, colon);
                std::string body = line.substr(colon + 1);
                size_t op_pos;
                if ((op_pos = body.find("<=")) != std::string::npos) {
                    row.sense = RowSense::le;
                } else if ((op_pos = body.find(">=")) != std::string::npos) {
                    row.sense = RowSense::ge;
                } else if ((op_pos = body.find('=')) != std::string::npos) {
                    row.sense = RowSense::eq;
                } else {
                    throw ParseError("lp: row without comparison at " + ctx);
                }
                const size_t op_len = row.sense == RowSense::eq ? 1 : 2;
                row.terms = detail::parse_terms(body.substr(0, op_pos), ctx);
                row.rhs = std::stod(body.substr(op_pos + op_len));
                lp.rows.push_back(std::move(row));
                break;
            }
            case Section::bounds: {
                // forms: "lo <= var <= hi", "var <= hi", "var >= lo", "var = v"
                std::istringstream bs(line);
                std::vector<std::string> toks;
                std::string t;
                while (bs >> t) toks.push_back(t);
                auto is_num = [](const std::string& s) {
                    return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) ||
                                          s[0] == '-' || s[0] == '+' || s[0] == '.');
                };
                if (toks.size() == 5 && toks[1] == "<=" && toks[3] == "<=") {
                    lp.bounds[toks[2]] = {std::stod(toks[0]), std::stod(toks[4])};
                } else if (toks.size() == 3 && is_num(toks[2])) {
                    const double v = std::stod(toks[2]);
                    auto& b = lp.bounds.try_emplace(toks[0], 0.0, 1e300).first->second;
                    if (toks[1] == "<=") b.second = v;
                    else if (toks[1] == ">=") b.first = v;
                    else if (toks[1] == "=") b = {v, v};
                    else throw ParseError("lp: bad bound at " + ctx);
                } else {
                    throw ParseError("lp: bad bound at " + ctx);
                }
                break;
            }
            case Section::binaries: {
                std::istringstream bs(line);
                std::string name;
                while (bs >> name) lp.binaries.insert(name);
                break;
            }
            default:
                throw ParseError("lp: content outside any section at " + ctx);
        }
    }
    return lp;
}

inline LpProblem parse_lp_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open LP file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_lp_string(ss.str());
}

// ---------------------------------------------------------------------------
// external solver bridge
//
// Protocol: <solver_command> <model.lp> <solution.out>; the solution file has
// one "name value" pair per line, optional "=obj= <v>" and "=status= <s>"
// lines ("infeasible" reports an infeasible model), '#' starts a comment.
// ---------------------------------------------------------------------------

struct ExternalSolution {
    std::vector<int> theta;    // n
    std::vector<double> r;     // n*K, index j*K + (k-1)
    std::vector<int> z;        // n*K
    double objective = 0.0;    // recomputed from the assignment
    std::vector<double> values;
};

namespace detail {

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/qsg_milp_XXXXXX";
        if (!mkdtemp(tmpl)) throw Error("cannot create temp dir");
        path = tmpl;
    }
    ~TempDir() {
        // best effort cleanup of the two known files + dir
        ::unlink((path + "/model.lp").c_str());
        ::unlink((path + "/solution.out").c_str());
        ::rmdir(path.c_str());
    }
};

inline std::vector<std::string> split_command(const std::string& cmd) {
    std::vector<std::string> parts;
    std::istringstream in(cmd);
    std::string tok;
    while (in >> tok) parts.push_back(tok);
    return parts;
}

// Runs argv with a wall-clock deadline, capturing combined stdout/stderr.
// Returns exit status; fills log.
inline int run_with_timeout(const std::vector<std::string>& argv, double timeout_sec,
                            std::string& log) {
    int pipefd[2];
    if (pipe(pipefd) != 0) throw Error("pipe() failed");
    const pid_t pid = fork();
    if (pid < 0) throw Error("fork() failed");
    if (pid == 0) {
        dup2(pipefd[1], STDOUT_FILENO);
        dup2(pipefd[1], STDERR_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        std::vector<char*> cargv;
        for (const auto& s : argv) cargv.push_back(const_cast<char*>(s.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }
    close(pipefd[1]);
    fcntl(pipefd[0], F_SETFL, O_NONBLOCK);
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_sec);
    int status = 0;
    bool done = false;
    char buf[4096];
    while (!done) {
        ssize_t got;
        while ((got = read(pipefd[0], buf, sizeof buf)) > 0) log.append(buf, got);
        const pid_t w = waitpid(pid, &status, WNOHANG);
        if (w == pid) {
            done = true;
            break;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            close(pipefd[0]);
            throw TimeoutError("external solver exceeded " + std::to_string(timeout_sec) +
                               "s; partial output:\n" + log);
        }
        usleep(5000);
    }
    ssize_t got;
    while ((got = read(pipefd[0], buf, sizeof buf)) > 0) log.append(buf, got);
    close(pipefd[0]);
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

}  // namespace detail

inline ExternalSolution solve_external(const PwlaModel& mod, const std::string& solver_command,
                                       double timeout_sec) {
    if (solver_command.empty())
        throw ConfigError("no MILP solver configured; pass --solver-cmd or set QSG_MILP_SOLVER");
    if (!(timeout_sec > 0)) throw TimeoutError("external solver timeout is zero");
    const auto argv = detail::split_command(solver_command);
    if (argv.empty()) throw ConfigError("empty solver command");

    detail::TempDir tmp;
    const std::string model_path = tmp.path + "/model.lp";
    const std::string sol_path = tmp.path + "/solution.out";
    export_lp(mod, model_path);

    auto full = argv;
    full.push_back(model_path);
    full.push_back(sol_path);
    std::string log;
    const int status = detail::run_with_timeout(full, timeout_sec, log);
    if (status == 127)
        throw ConfigError("solver command not found or not executable: " + argv[0]);
    if (status != 0)
        throw SolverOutputError("solver exited with status " + std::to_string(status) + ":\n" + log);

    std::ifstream f(sol_path);
    if (!f) throw SolverOutputError("solver produced no solution file:\n" + log);
    std::map<std::string, int> var_index;
    for (int i = 0; i < mod.n_vars(); ++i) var_index[mod.var_name(i)] = i;

    ExternalSolution sol;
    sol.values.assign(mod.n_vars(), 0.0);
    std::string name;
    while (f >> name) {
        if (name[0] == '#') {
            std::string rest;
            std::getline(f, rest);
            continue;
        }
        if (name == "=status=") {
            std::string st;
            f >> st;
            if (st == "infeasible") throw InfeasibleError("solver reports the model infeasible");
            continue;
        }
        if (name == "=obj=") {
            double declared;
            f >> declared;
            continue;  // objective is recomputed from the assignment
        }
        double value;
        if (!(f >> value)) throw SolverOutputError("malformed solution line near '" + name + "'");
        const auto it = var_index.find(name);
        if (it == var_index.end()) throw SolverOutputError("unknown variable in solution: " + name);
        sol.values[it->second] = value;
    }
    validate_assignment(mod, sol.values);

    const int n = mod.n(), K = mod.pieces;
    sol.theta.resize(n);
    sol.r.resize(n * K);
    sol.z.resize(n * K);
    for (int j = 0; j < n; ++j) {
        sol.theta[j] = sol.values[mod.theta_index(j)] > 0.5 ? 1 : 0;
        for (int k = 1; k <= K; ++k) {
            sol.r[j * K + (k - 1)] = sol.values[mod.r_index(j, k)];
            sol.z[j * K + (k - 1)] = sol.values[mod.z_index(j, k)] > 0.5 ? 1 : 0;
        }
    }
    sol.objective = pwla_objective_value(mod, sol.values);
    return sol;
}

// ---------------------------------------------------------------------------
// internal exact solvers
// ---------------------------------------------------------------------------

/// Exact thresholded solve at desk scale: enumerate feasible subsets, solve
/// the concave transformed inner problem per subset, keep the best. Returns
/// the strategy and its (primal) objective value.
inline std::pair<Strategy, double> solve_small_exact(const GameInstance& g, double delta0,
                                                     double xi = 1e-8,
                                                     const PgdParams& params = {.polyak = true}) {
    if (g.n_centers > 16)
        throw SizeError("solve_small_exact limited to n <= 16; use the MILP path instead");
    Strategy best;
    double best_val = -1e300;
    for (const auto& S : enumerate_feasible_subsets(g, 16)) {
        FixedSubsetResult r = pgd_solve_fixed_subset(g, S, delta0, xi, params);
        if (r.primal_value > best_val) {
            best_val = r.primal_value;
            best = std::move(r.strategy);
        }
    }
    if (best.subset.empty()) throw ValidationError("no feasible subset exists");
    return {std::move(best), best_val};
}

/// Exact optimum of the PWLA model by dynamic programming over partitions.
/// Correctness rests on the lattice structure: the budget/cap rows form a
/// laminar system with unit coefficients, so with K*m and K*beta_l integral
/// the model attains its optimum at a lattice point (budgets are floored to
/// lattice units otherwise). Runs in polynomial time and replaces a general
/// MILP engine for the internal PWLA path.
inline std::pair<Strategy, double> solve_pwla_grid(const GameInstance& g, double delta0,
                                                   int pieces) {
    if (pieces <= 0) throw std::domain_error("solve_pwla_grid: pieces must be >= 1");
    const double NEG = -1e300;
    const int K = pieces;
    const int n = g.n_centers;
    // unit budgets computed in double first; m or beta may be huge
    const double raw_g = std::floor(K * g.m + 1e-9);
    const int G = raw_g >= static_cast<double>(K) * n ? K * n : static_cast<int>(raw_g);

    // per-center PWLA value at a lattice units (prefix sums of the r coefficients)
    std::vector<std::vector<double>> val(n, std::vector<double>(K + 1));
    {
        PwlaModel mod = build_pwla(g, delta0, K);
        for (int j = 0; j < n; ++j) {
            val[j][0] = mod.const_term[j];
            for (int k = 1; k <= K; ++k)
                val[j][k] = val[j][k - 1] +
                            (mod.gamma_g[j * K + (k - 1)] - delta0 * mod.gamma_N[j * K + (k - 1)]) / K;
        }
    }

    struct PartDp {
        std::vector<int> members;
        int smax, bmax;
        std::vector<std::vector<double>> table;          // [s][b]
        std::vector<std::vector<std::vector<int16_t>>> choice;  // [member][s][b]: -1 skip, a units
    };
    std::vector<PartDp> parts;
    for (int l = 0; l < g.n_partitions(); ++l) {
        PartDp p;
        p.members = g.partitions[l];
        p.smax = std::min<int>(p.members.size(), g.cap_C);
        const double raw_b = std::floor(K * g.beta[l] + 1e-9);
        p.bmax = raw_b >= G ? G : static_cast<int>(raw_b);
        p.table.assign(p.smax + 1, std::vector<double>(p.bmax + 1, NEG));
        p.table[0][0] = 0.0;
        for (int j : p.members) {
            std::vector<std::vector<int16_t>> ch(p.smax + 1,
                                                 std::vector<int16_t>(p.bmax + 1, -1));
            auto next = p.table;
            for (int s = 0; s < p.smax; ++s)
                for (int b = 0; b <= p.bmax; ++b) {
                    if (p.table[s][b] == NEG) continue;
                    const int amax = std::min(K, p.bmax - b);
                    for (int a = 0; a <= amax; ++a) {
                        const double cand = p.table[s][b] + val[j][a];
                        if (cand > next[s + 1][b + a]) {
                            next[s + 1][b + a] = cand;
                            ch[s + 1][b + a] = static_cast<int16_t>(a);
                        }
                    }
                }
            p.table = std::move(next);
            p.choice.push_back(std::move(ch));
        }
        parts.push_back(std::move(p));
    }

    // combine partitions; every partition contributes at least one member
    const int L = g.n_partitions();
    constexpr int64_t kPack = int64_t(1) << 24;
    if (G + 1 >= kPack) throw SizeError("solve_pwla_grid: lattice too large");
    std::vector<std::vector<double>> comb(g.cap_C + 1, std::vector<double>(G + 1, NEG));
    std::vector<std::vector<std::vector<int64_t>>> pick(
        L, std::vector<std::vector<int64_t>>(g.cap_C + 1, std::vector<int64_t>(G + 1, -1)));
    comb[0][0] = 0.0;
    for (int l = 0; l < L; ++l) {
        const PartDp& p = parts[l];
        std::vector<std::vector<double>> next(g.cap_C + 1, std::vector<double>(G + 1, NEG));
        for (int s = 0; s <= g.cap_C; ++s)
            for (int b = 0; b <= G; ++b) {
                if (comb[s][b] == NEG) continue;
                for (int sl = 1; sl <= p.smax && s + sl <= g.cap_C; ++sl)
                    for (int bl = 0; bl <= p.bmax && b + bl <= G; ++bl) {
                        if (p.table[sl][bl] == NEG) continue;
                        const double cand = comb[s][b] + p.table[sl][bl];
                        if (cand > next[s + sl][b + bl]) {
                            next[s + sl][b + bl] = cand;
                            pick[l][s + sl][b + bl] = sl * kPack + bl;
                        }
                    }
            }
        comb = std::move(next);
    }

    int best_s = -1, best_b = -1;
    double best = NEG;
    for (int s = g.min_NP; s <= g.cap_C; ++s)
        for (int b = 0; b <= G; ++b)
            if (comb[s][b] > best) {
                best = comb[s][b];
                best_s = s;
                best_b = b;
            }
    if (best_s < 0) throw ValidationError("solve_pwla_grid: no feasible assignment");

    // backtrack partitions, then members inside each partition
    Strategy strat;
    int s = best_s, b = best_b;
    for (int l = L - 1; l >= 0; --l) {
        const int64_t code = pick[l][s][b];
        if (code < 0) throw Error("solve_pwla_grid: backtrack failure");
        const int sl = static_cast<int>(code / kPack), bl = static_cast<int>(code % kPack);
        const PartDp& p = parts[l];
        int ps = sl, pb = bl;
        for (int mi = static_cast<int>(p.members.size()) - 1; mi >= 0; --mi) {
            const int16_t a = p.choice[mi][ps][pb];
            if (a >= 0) {
                strat.subset.push_back(p.members[mi]);
                strat.coverage.push_back(static_cast<double>(a) / K);
                ps -= 1;
                pb -= a;
            }
        }
        s -= sl;
        b -= bl;
    }
    // sort members by center index, keeping coverage aligned
    std::vector<size_t> order(strat.subset.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a2, size_t b2) { return strat.subset[a2] < strat.subset[b2]; });
    Strategy sorted;
    for (size_t i : order) {
        sorted.subset.push_back(strat.subset[i]);
        sorted.coverage.push_back(strat.coverage[i]);
    }
    return {std::move(sorted), best};
}

}  // namespace qsg
