#pragma once

#include <random>
#include <sstream>
#include <vector>

#include "qsg/hybrid.hpp"
#include "qsg/oracle.hpp"

namespace qsg {

struct VerifyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

using DanskinFn = std::function<std::pair<double, std::vector<double>>(
    const GameInstance&, const FixedDualsOutcome&, double)>;

namespace verify_detail {

inline double urand(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

inline GameInstance random_small_instance(std::uint64_t seed, int n, int L) {
    GenerateOverrides ov;
    ov.n_partitions = L;
    return generate_instance(seed, n, ov);
}

}  // namespace verify_detail

/// |W exp(W) - z| <= 1e-10 max(1,z) over a log-spaced grid, plus the log-space
/// evaluation path for arguments far beyond double overflow.
inline VerifyResult verify_lambert(bool full = true) {
    VerifyResult res{"lambert_w_residuals", true, ""};
    const int points = full ? 400 : 120;
    double worst = 0;
    for (int i = -1; i < points; ++i) {
        const double z = i < 0 ? 0.0 : std::pow(10.0, -8.0 + 18.0 * i / (points - 1));
        const double w = lambert_w0(z);
        const double resid = std::abs(w * std::exp(w) - z);
        worst = std::max(worst, resid / std::max(1.0, z));
        if (resid > 1e-10 * std::max(1.0, z)) res.pass = false;
    }
    for (double t : {25.0, 100.0, 400.0, 700.0, 1500.0}) {
        const double w = lambert_w0_exp_arg(t);
        const double resid = std::abs(w + std::log(w) - t);  // log of w e^w - t
        worst = std::max(worst, resid);
        if (resid > 1e-11 * std::max(1.0, t)) res.pass = false;
    }
    std::ostringstream ss;
    ss << "worst scaled residual " << worst;
    res.detail = ss.str();
    return res;
}

/// Closed-form coverage optimum vs golden-section maximization of the same
/// separable term, |x| difference within 1e-6 at random call sites.
inline VerifyResult verify_closed_form(bool full = true, int count = 0) {
    VerifyResult res{"closed_form_vs_golden_section", true, ""};
    if (count == 0) count = full ? 10000 : 1000;
    std::mt19937_64 rng(20240801);
    double worst = 0;
    int failures = 0;
    for (int it = 0; it < count; ++it) {
        GameInstance g;
        g.n_centers = 1;
        g.reward_def = {verify_detail::urand(rng, 1, 10)};
        g.loss_def = {verify_detail::urand(rng, -10, -1)};
        g.reward_att = {verify_detail::urand(rng, 1, 10)};
        g.loss_att = {verify_detail::urand(rng, -10, -1)};
        g.lambda = verify_detail::urand(rng, 0.05, 2.0);
        g.m = 1;
        g.cap_C = 1;
        g.min_NP = 1;
        g.partitions = {{0}};
        g.beta = {1.0};
        g.finalize();
        const double nu = (it % 4 == 0) ? 0.0
                                        : std::exp(verify_detail::urand(rng, -3.0, 10.0));
        const double mu = (it % 5 == 0) ? 0.0
                                        : std::exp(verify_detail::urand(rng, -3.0, 8.0));
        const double delta0 = verify_detail::urand(rng, -10, 10);
        const ClosedFormResult cf = closed_form_y(g, 0, nu, mu, delta0);
        const auto [x_gs, val_gs] = maximize_unimodal(
            [&](double x) { return g_term_x(g, 0, nu, mu, x, delta0); }, 0.0, 1.0, 1e-9);
        const double diff = std::abs(cf.x_star - x_gs);
        worst = std::max(worst, diff);
        if (diff > 1e-6) ++failures;
    }
    res.pass = failures == 0;
    std::ostringstream ss;
    ss << count << " call sites, worst |x| diff " << worst << ", failures " << failures;
    res.detail = ss.str();
    return res;
}

/// Danskin subgradient vs central finite differences of the fixed-duals value
/// at tie-free dual points (coordinatewise within 1e-4, h = 1e-5).
inline VerifyResult verify_danskin(bool full = true, DanskinFn grad_fn = {}, int count = 0) {
    VerifyResult res{"danskin_vs_finite_differences", true, ""};
    if (!grad_fn)
        grad_fn = [](const GameInstance& g, const FixedDualsOutcome& o, double d0) {
            return danskin_gradient(g, o, d0);
        };
    if (count == 0) count = full ? 1000 : 100;
    std::mt19937_64 rng(77001);
    double worst = 0;
    int checked = 0, failures = 0;
    while (checked < count) {
        const GameInstance g = verify_detail::random_small_instance(rng(), 8, 2);
        const double delta0 = verify_detail::urand(rng, -6, 6);
        DualPoint d{verify_detail::urand(rng, 0.5, 30.0),
                    {verify_detail::urand(rng, 0.5, 30.0), verify_detail::urand(rng, 0.5, 30.0)}};
        const FixedDualsOutcome out = fixed_duals_solve(g, d, delta0);
        // skip kinks: h-score ties (subset switch) and scores at the sign boundary
        bool tie = out.tie_detected;
        std::vector<double> hs = out.h_scores;
        std::sort(hs.begin(), hs.end());
        for (size_t i = 0; i + 1 < hs.size(); ++i)
            if (hs[i + 1] - hs[i] < 1e-3) tie = true;
        for (double h : hs)
            if (std::abs(h) < 1e-3) tie = true;
        if (tie) continue;
        ++checked;

        const auto [d_nu, d_mu] = grad_fn(g, out, delta0);
        std::vector<double> point = {d.nu, d.mu[0], d.mu[1]};
        const auto fd = finite_diff_grad(
            [&](const std::vector<double>& p) {
                DualPoint dp{p[0], {p[1], p[2]}};
                return fixed_duals_solve(g, dp, delta0).value;
            },
            point, 1e-5);
        const double diff = std::max({std::abs(fd[0] - d_nu), std::abs(fd[1] - d_mu[0]),
                                      std::abs(fd[2] - d_mu[1])});
        worst = std::max(worst, diff);
        if (diff > 1e-4) ++failures;
    }
    res.pass = failures == 0;
    std::ostringstream ss;
    ss << checked << " tie-free points, worst coordinate diff " << worst << ", failures "
       << failures;
    res.detail = ss.str();
    return res;
}

/// Every dual value visited by the heuristic upper-bounds the brute-force
/// primal maximum of B at that threshold (weak duality; the lattice maximum
/// only underestimates the primal side).
inline VerifyResult verify_weak_duality(bool full = true) {
    VerifyResult res{"weak_duality", true, ""};
    const int instances = full ? 10 : 4;
    double worst = 1e300;
    int checks = 0;
    for (int i = 0; i < instances; ++i) {
        const int n = 4 + i % 5;
        const GameInstance g = verify_detail::random_small_instance(900 + i, n, 2);
        InnerSolver inner = make_heuristic_inner(g, 1e-7);
        InnerSolver recording = [&](double delta0) {
            InnerSolution sol = inner(delta0);
            const double primal = max_bopt_grid(g, delta0, 40);
            ++checks;
            worst = std::min(worst, sol.objective - primal);
            if (sol.objective < primal - 1e-6) res.pass = false;
            return sol;
        };
        binary_search(g, recording, 1e-3);
    }
    std::ostringstream ss;
    ss << checks << " visited thresholds, min (dual - primal) margin " << worst;
    res.detail = ss.str();
    return res;
}

/// Hybrid utility against the enumeration oracle on small instances.
inline VerifyResult verify_oracle_equivalence(bool full = true) {
    VerifyResult res{"oracle_equivalence", true, ""};
    const int instances = full ? 10 : 4;
    double worst = 0;
    for (int i = 0; i < instances; ++i) {
        const int n = 4 + i % 5;
        const GameInstance g = verify_detail::random_small_instance(1300 + i, n, 2);
        const OracleResult orc = brute_force_eqopt(g);
        const SolveReport rep = hybrid_solve(g, {.epsilon = 1e-3});
        const double shortfall = orc.best_utility - rep.utility;
        worst = std::max(worst, shortfall);
        if (shortfall > 1e-3 + orc.error_bound) res.pass = false;
    }
    std::ostringstream ss;
    ss << instances << " instances, worst shortfall vs oracle " << worst;
    res.detail = ss.str();
    return res;
}

/// QR normalization stays exact under extreme rationality and payoffs.
inline VerifyResult verify_qr_normalization(bool full = true) {
    VerifyResult res{"qr_normalization", true, ""};
    std::mt19937_64 rng(5150);
    const int count = full ? 2000 : 400;
    double worst = 0;
    for (int it = 0; it < count; ++it) {
        const int n = 2 + static_cast<int>(rng() % 7);
        GameInstance g;
        g.n_centers = n;
        for (int j = 0; j < n; ++j) {
            g.reward_def.push_back(verify_detail::urand(rng, 1, 10));
            g.loss_def.push_back(verify_detail::urand(rng, -10, -1));
            g.reward_att.push_back(verify_detail::urand(rng, 1, 15));
            g.loss_att.push_back(verify_detail::urand(rng, -10, -1));
        }
        g.lambda = verify_detail::urand(rng, 0, 50);
        g.m = n;
        g.cap_C = n;
        g.min_NP = 1;
        g.partitions = {{}};
        for (int j = 0; j < n; ++j) g.partitions[0].push_back(j);
        g.beta = {double(n)};
        g.finalize();
        Strategy s;
        for (int j = 0; j < n; ++j) {
            s.subset.push_back(j);
            s.coverage.push_back(verify_detail::urand(rng, 0, 1));
        }
        const QrDistribution q = qr_probs(g, s);
        double sum = 0;
        for (double p : q.probs) sum += p;
        worst = std::max(worst, std::abs(sum - 1.0));
        if (std::abs(sum - 1.0) > 1e-12) res.pass = false;
    }
    std::ostringstream ss;
    ss << count << " distributions, worst |sum q - 1| = " << worst;
    res.detail = ss.str();
    return res;
}

/// The `verify` command: every invariant suite with a pass/fail scoreboard.
inline std::vector<VerifyResult> run_verify(bool full, DanskinFn grad_fn = {}) {
    std::vector<VerifyResult> out;
    out.push_back(verify_lambert(full));
    out.push_back(verify_closed_form(full));
    out.push_back(verify_danskin(full, grad_fn));
    out.push_back(verify_weak_duality(full));
    out.push_back(verify_oracle_equivalence(full));
    out.push_back(verify_qr_normalization(full));
    return out;
}

}  // namespace qsg
