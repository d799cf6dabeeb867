// Reference MILP solver for tiny exported models, used to exercise the
// external-solver bridge end to end without a third-party dependency.
//
// Usage: qsg_refsolver <model.lp> <solution.out>
//
// Enumerates the binary variables; for each assignment the remaining rows must
// be box constraints on a single continuous variable or capacity rows with one
// uniform positive coefficient over disjoint-or-nested variable sets (the
// shape the qsg exporter emits), which greedy-by-weight solves exactly.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "qsg/pwla.hpp"

namespace {

struct Capacity {
    std::vector<int> vars;  // continuous indexes
    double coef = 1.0;
    double rhs = 0.0;
};

int fail(const std::string& msg) {
    std::fprintf(stderr, "refsolver: %s\n", msg.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) return fail("usage: qsg_refsolver <model.lp> <solution.out>");
    qsg::LpProblem lp;
    try {
        lp = qsg::parse_lp_file(argv[1]);
    } catch (const std::exception& e) {
        return fail(e.what());
    }

    // variable tables
    std::vector<std::string> bin_names(lp.binaries.begin(), lp.binaries.end());
    std::map<std::string, int> bin_index;
    for (size_t i = 0; i < bin_names.size(); ++i) bin_index[bin_names[i]] = int(i);
    std::map<std::string, int> cont_index;
    std::vector<std::string> cont_names;
    auto touch_cont = [&](const std::string& name) {
        if (bin_index.count(name) || cont_index.count(name)) return;
        cont_index[name] = int(cont_names.size());
        cont_names.push_back(name);
    };
    for (const auto& [name, c] : lp.objective) touch_cont(name);
    for (const auto& row : lp.rows)
        for (const auto& [name, c] : row.terms) touch_cont(name);
    const int nb = int(bin_names.size()), nc = int(cont_names.size());
    if (nb > 22) return fail("too many binaries for enumeration: " + std::to_string(nb));

    std::vector<double> base_lo(nc, 0.0), base_hi(nc, 1e300);
    for (const auto& [name, b] : lp.bounds) {
        const auto it = cont_index.find(name);
        if (it == cont_index.end()) continue;
        base_lo[it->second] = b.first;
        base_hi[it->second] = b.second;
    }
    std::vector<double> obj_bin(nb, 0.0), obj_cont(nc, 0.0);
    for (const auto& [name, c] : lp.objective) {
        const double v = lp.maximize ? c : -c;
        if (bin_index.count(name)) obj_bin[bin_index[name]] += v;
        else obj_cont[cont_index[name]] += v;
    }

    double best_obj = -1e300;
    std::vector<int> best_bits;
    std::vector<double> best_cont;

    std::vector<int> bits(nb, 0);
    for (long long mask = 0; mask < (1LL << nb); ++mask) {
        for (int i = 0; i < nb; ++i) bits[i] = (mask >> i) & 1;
        std::vector<double> lo = base_lo, hi = base_hi;
        std::vector<Capacity> caps;
        bool feasible = true;

        for (const auto& row : lp.rows) {
            double const_part = 0.0;
            std::vector<std::pair<int, double>> cvars;
            for (const auto& [name, c] : row.terms) {
                const auto bi = bin_index.find(name);
                if (bi != bin_index.end()) const_part += c * bits[bi->second];
                else cvars.emplace_back(cont_index[name], c);
            }
            const double rhs = row.rhs - const_part;
            if (cvars.empty()) {
                const bool ok = row.sense == qsg::RowSense::le   ? 0 <= rhs + 1e-12
                                : row.sense == qsg::RowSense::ge ? 0 >= rhs - 1e-12
                                                                 : std::abs(rhs) <= 1e-12;
                if (!ok) {
                    feasible = false;
                    break;
                }
            } else if (cvars.size() == 1) {
                const auto [vi, c] = cvars[0];
                if (c == 0) continue;
                const double bound = rhs / c;
                const bool is_upper = (row.sense == qsg::RowSense::le) == (c > 0);
                if (row.sense == qsg::RowSense::eq) {
                    lo[vi] = std::max(lo[vi], bound);
                    hi[vi] = std::min(hi[vi], bound);
                } else if (is_upper) {
                    hi[vi] = std::min(hi[vi], bound);
                } else {
                    lo[vi] = std::max(lo[vi], bound);
                }
            } else {
                if (row.sense != qsg::RowSense::le) return fail("unsupported multi-var row sense");
                Capacity cap;
                cap.coef = cvars[0].second;
                cap.rhs = rhs;
                for (const auto& [vi, c] : cvars) {
                    if (std::abs(c - cap.coef) > 1e-12)
                        return fail("capacity row is not uniform: " + row.name);
                    cap.vars.push_back(vi);
                }
                if (cap.coef <= 0) return fail("capacity coefficient must be positive");
                caps.push_back(std::move(cap));
            }
        }
        if (!feasible) continue;
        std::vector<double> x(nc);
        double used_ok = true;
        for (int i = 0; i < nc; ++i) {
            if (lo[i] > hi[i] + 1e-12) {
                used_ok = false;
                break;
            }
            x[i] = lo[i];
        }
        if (!used_ok) continue;
        std::vector<double> slack(caps.size());
        for (size_t c = 0; c < caps.size(); ++c) {
            double used = 0;
            for (int vi : caps[c].vars) used += caps[c].coef * x[vi];
            slack[c] = caps[c].rhs - used;
            if (slack[c] < -1e-9) {
                used_ok = false;
                break;
            }
        }
        if (!used_ok) continue;

        // raise profitable variables greedily; capacities are nested so
        // weight order is exact
        std::vector<int> order(nc);
        for (int i = 0; i < nc; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return obj_cont[a] > obj_cont[b]; });
        for (int vi : order) {
            if (obj_cont[vi] <= 0) break;
            double room = hi[vi] - x[vi];
            for (size_t c = 0; c < caps.size(); ++c) {
                if (std::find(caps[c].vars.begin(), caps[c].vars.end(), vi) == caps[c].vars.end())
                    continue;
                room = std::min(room, slack[c] / caps[c].coef);
            }
            if (room <= 0) continue;
            x[vi] += room;
            for (size_t c = 0; c < caps.size(); ++c)
                if (std::find(caps[c].vars.begin(), caps[c].vars.end(), vi) != caps[c].vars.end())
                    slack[c] -= caps[c].coef * room;
        }

        double obj = 0;
        for (int i = 0; i < nb; ++i) obj += obj_bin[i] * bits[i];
        for (int i = 0; i < nc; ++i) obj += obj_cont[i] * x[i];
        if (obj > best_obj) {
            best_obj = obj;
            best_bits = bits;
            best_cont = x;
        }
    }

    std::ofstream out(argv[2]);
    if (!out) return fail("cannot write solution file");
    if (best_obj == -1e300) {
        out << "=status= infeasible\n";
        return 0;
    }
    out << "=status= optimal\n";
    out << "=obj= " << (lp.maximize ? best_obj : -best_obj) << '\n';
    for (int i = 0; i < nb; ++i) out << bin_names[i] << ' ' << best_bits[i] << '\n';
    char buf[40];
    for (int i = 0; i < nc; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", best_cont[i]);
        out << cont_names[i] << ' ' << buf << '\n';
    }
    return 0;
}
