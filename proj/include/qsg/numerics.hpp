#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qsg/objective.hpp"

namespace qsg {

namespace detail {

// Solves w + log(w) = t by Newton steps; this is W(exp(t)) in log space and
// avoids overflowing exp() for large arguments. Needs t >= ~3 so the iterate
// stays positive.
inline double lambert_w0_log_form(double t) {
    double w = t - std::log(t);
    for (int it = 0; it < 50; ++it) {
        const double r = w + std::log(w) - t;
        if (std::abs(r) <= 1e-14 * std::max(1.0, std::abs(t))) break;
        w -= r * w / (w + 1.0);
    }
    return w;
}

}  // namespace detail

/// Principal-branch Lambert W for z >= 0: returns w with w*exp(w) = z.
/// Initial guess: truncated series for small z, log(1+z) for moderate z,
/// log z - log log z + log log z / log z for large z; then Halley refinement.
inline double lambert_w0(double z) {
    if (z < 0) throw std::domain_error("lambert_w0: argument must be nonnegative");
    if (z == 0) return 0.0;
    if (z > 1e8) return detail::lambert_w0_log_form(std::log(z));

    double w;
    if (z < 0.5) {
        w = z * (1.0 + z * (-1.0 + z * (1.5 - (8.0 / 3.0) * z)));
        if (w < 0) w = 0.0;
    } else if (z <= 2.718281828459045) {
        w = std::log1p(z);
    } else {
        const double l1 = std::log(z), l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        if (std::abs(f) <= 1e-13 * std::max(1.0, z)) break;
        const double denom = ew * (w + 1.0) - f * (w + 2.0) / (2.0 * w + 2.0);
        const double step = f / denom;
        w -= step;
        if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

/// W(exp(t)) without forming exp(t); safe for the huge exponents that appear
/// in the closed-form coverage optimum when the dual prices are large.
inline double lambert_w0_exp_arg(double t) {
    if (t <= 18.0) return lambert_w0(std::exp(t));
    return detail::lambert_w0_log_form(t);
}

enum class Clamp { lower, interior, upper };  // resulting coverage 0 / (0,1) / 1

/// Closed-form maximizer of the separable dual term for one center.
/// y_star = exp(-lambda*w_att * x_star) with x_star = clamp(beta_interior, 0, 1).
struct ClosedFormResult {
    double y_star = 1.0;
    double x_star = 0.0;
    double beta_interior = 0.0;  // unclamped stationary point in coverage units
    Clamp clamped = Clamp::lower;
    bool wd_zero = false;  // analytic branch for w_def == 0 (formula divides by w_def)
};

/// Maximizes g_term over the y box for center j at duals (nu, mu_l) and
/// threshold delta0. Interior optimum via the Lambert W closed form:
///   beta = (1/(lambda w_att)) [ 1 - (lambda w_att / w_def)(loss_def - delta0)
///           - W( (nu+mu_l)/w_def * exp(1 - lambda r_att
///                                      - (lambda w_att/w_def)(loss_def - delta0)) ) ]
/// w_def == 0 is resolved analytically instead of dividing by zero.
inline ClosedFormResult closed_form_y(const GameInstance& g, int j, double nu, double mu_l,
                                      double delta0) {
    if (nu < 0 || mu_l < 0) throw std::domain_error("closed_form_y: duals must be nonnegative");
    if (transform_degenerate(g, j))
        throw DegenerateTransformError("closed_form_y: lambda*w_att is zero for center " +
                                       std::to_string(j));
    const double lamw = g.lambda * g.w_att(j);
    const double wd = g.w_def(j);
    const double price = nu + mu_l;
    const double inf = std::numeric_limits<double>::infinity();

    ClosedFormResult res;
    if (wd != 0.0) {
        const double t = 1.0 - (lamw / wd) * (g.loss_def[j] - delta0);
        double w = 0.0;
        if (price > 0) {
            const double log_z = std::log(price) - std::log(wd) + t - g.lambda * g.reward_att[j];
            w = lambert_w0_exp_arg(log_z);
        }
        res.beta_interior = (t - w) / lamw;
    } else {
        // term is A*exp(-b x) - c x with A = exp(lambda r_att)(loss_def - delta0)
        res.wd_zero = true;
        const double a = std::exp(g.lambda * g.reward_att[j]) * (g.loss_def[j] - delta0);
        if (a < 0.0) {
            res.beta_interior =
                price > 0 ? std::log(-a * lamw / price) / lamw : inf;
        } else {
            res.beta_interior = -inf;  // decreasing on [0,1]
        }
    }

    if (res.beta_interior <= 0.0) {
        res.x_star = 0.0;
        res.clamped = Clamp::lower;
    } else if (res.beta_interior >= 1.0) {
        res.x_star = 1.0;
        res.clamped = Clamp::upper;
    } else {
        res.x_star = res.beta_interior;
        res.clamped = Clamp::interior;
    }
    res.y_star = std::exp(-lamw * res.x_star);
    return res;
}

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Returns (argmax within tol, f(argmax)).
inline std::pair<double, double> maximize_unimodal(const std::function<double(double)>& f,
                                                   double lo, double hi, double tol) {
    if (lo > hi) throw std::domain_error("maximize_unimodal: lo > hi");
    if (!(tol > 0)) throw std::domain_error("maximize_unimodal: tol must be positive");
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Central finite differences, one evaluation pair per coordinate.
inline std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> point,
    double h) {
    std::vector<double> grad(point.size());
    for (size_t i = 0; i < point.size(); ++i) {
        const double orig = point[i];
        point[i] = orig + h;
        const double up = f(point);
        point[i] = orig - h;
        const double down = f(point);
        point[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace qsg
