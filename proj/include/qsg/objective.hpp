#pragma once

#include <cmath>
#include <vector>

#include "qsg/instance.hpp"

namespace qsg {

// Attack distribution of the quantal-response adversary over the operated
// subset. probs is aligned with strategy.subset; log_denominator is
// log sum_j exp(lambda * (reward_att_j - w_att_j * x_j)).
struct QrDistribution {
    std::vector<double> probs;
    double log_denominator = 0;
};

// attacker exponent for center j at coverage x
inline double attacker_logit(const GameInstance& g, int j, double x) {
    return g.lambda * (-g.w_att(j) * x + g.reward_att[j]);
}

/// Softmax over attacker utilities, computed with max-subtraction so the
/// normalization survives large lambda and payoffs.
inline QrDistribution qr_probs(const GameInstance& g, const Strategy& s) {
    if (s.subset.empty()) throw ValidationError("qr_probs: empty strategy");
    const int k = s.size();
    std::vector<double> logits(k);
    double max_logit = -1e300;
    for (int i = 0; i < k; ++i) {
        logits[i] = attacker_logit(g, s.subset[i], s.coverage[i]);
        max_logit = std::max(max_logit, logits[i]);
    }
    QrDistribution out;
    out.probs.resize(k);
    double sum = 0;
    for (int i = 0; i < k; ++i) {
        out.probs[i] = std::exp(logits[i] - max_logit);
        sum += out.probs[i];
    }
    for (double& p : out.probs) p /= sum;
    out.log_denominator = max_logit + std::log(sum);
    return out;
}

/// Defender expected utility F(S, x_S) = sum_j q_j * (w_def_j x_j + loss_def_j).
inline double defender_utility(const GameInstance& g, const Strategy& s) {
    const QrDistribution q = qr_probs(g, s);
    double val = 0;
    for (int i = 0; i < s.size(); ++i) {
        const int j = s.subset[i];
        val += q.probs[i] * (g.w_def(j) * s.coverage[i] + g.loss_def[j]);
    }
    return val;
}

// N_j(x) = exp(lambda * (reward_att_j - w_att_j * x)), the unnormalized attack weight.
inline double attack_weight(const GameInstance& g, int j, double x) {
    return std::exp(attacker_logit(g, j, x));
}

// One center's contribution to the thresholded objective:
//   N_j(x) * (w_def_j x + loss_def_j - delta0)
inline double bopt_center_value(const GameInstance& g, int j, double x, double delta0) {
    return attack_weight(g, j, x) * (g.w_def(j) * x + g.loss_def[j] - delta0);
}

/// Thresholded (Dinkelbach) objective
///   B = sum_j N_j(x_j) (w_def_j x_j + loss_def_j) - delta0 * D(x_S)
/// whose sign at delta0 decides the bisection step. Identity: B = D * (F - delta0).
inline double bopt_value(const GameInstance& g, const Strategy& s, double delta0) {
    if (s.subset.empty()) throw ValidationError("bopt_value: empty strategy");
    double val = 0;
    for (int i = 0; i < s.size(); ++i)
        val += bopt_center_value(g, s.subset[i], s.coverage[i], delta0);
    return val;
}

/// The y transform is constant (and so not invertible) when lambda*w_att_j == 0.
inline bool transform_degenerate(const GameInstance& g, int j) {
    return g.lambda * g.w_att(j) == 0.0;
}

/// y_j = exp(-lambda * w_att_j * x_j), mapping coverage [0,1] onto
/// [exp(-lambda*w_att_j), 1]; the inner problem becomes concave in y.
inline double to_y(const GameInstance& g, int j, double x) {
    if (transform_degenerate(g, j))
        throw DegenerateTransformError("to_y: lambda*w_att is zero for center " + std::to_string(j));
    return std::exp(-g.lambda * g.w_att(j) * x);
}

inline double from_y(const GameInstance& g, int j, double y) {
    if (transform_degenerate(g, j))
        throw DegenerateTransformError("from_y: lambda*w_att is zero for center " + std::to_string(j));
    return -std::log(y) / (g.lambda * g.w_att(j));
}

/// Separable Lagrangian term for one center, in y coordinates:
///   g_j = N(y)(-w_def log y / (lambda w_att) + loss_def - delta0)
///         - (nu + mu_l) * (-log y) / (lambda w_att),   N(y) = y * exp(lambda r_att).
inline double g_term(const GameInstance& g, int j, double nu, double mu_l, double y,
                     double delta0) {
    if (transform_degenerate(g, j))
        throw DegenerateTransformError("g_term: lambda*w_att is zero for center " + std::to_string(j));
    const double x = -std::log(y) / (g.lambda * g.w_att(j));
    const double n_of_y = y * std::exp(g.lambda * g.reward_att[j]);
    return n_of_y * (g.w_def(j) * x + g.loss_def[j] - delta0) - (nu + mu_l) * x;
}

// Same function expressed in x coordinates (identical values through the
// transform); safe for centers where the transform is degenerate.
inline double g_term_x(const GameInstance& g, int j, double nu, double mu_l, double x,
                       double delta0) {
    return bopt_center_value(g, j, x, delta0) - (nu + mu_l) * x;
}

/// Lagrangian of the transformed inner problem for subset S:
///   phi = sum_j N(y_j)(-w_def log y_j/(lambda w_att) + loss_def) - delta0 D(y)
///         - nu (sum_j -log y_j/(lambda w_att) - m)
///         - sum_l mu_l (sum_{K_l cap S} -log y_j/(lambda w_att) - beta_l)
/// Decomposes as sum_j g_term + nu*m + sum_l mu_l*beta_l.
inline double phi(const GameInstance& g, const std::vector<int>& S, double nu,
                  const std::vector<double>& mu, const std::vector<double>& y, double delta0) {
    if (nu < 0) throw std::domain_error("phi: nu must be nonnegative");
    for (double v : mu)
        if (v < 0) throw std::domain_error("phi: mu must be nonnegative");
    double val = nu * g.m;
    for (int l = 0; l < g.n_partitions(); ++l) val += mu[l] * g.beta[l];
    for (size_t i = 0; i < S.size(); ++i)
        val += g_term(g, S[i], nu, mu[g.partition_of(S[i])], y[i], delta0);
    return val;
}

}  // namespace qsg
