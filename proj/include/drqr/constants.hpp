#pragma once

// Closed-form scalar constants of Wasserstein-robust quantile regression.
//
// With q the Hoelder conjugate of p:
//   c_{alpha,p} = max(alpha, 1-alpha)                              p = 1
//               = (alpha^q (1-alpha) + alpha (1-alpha)^q)^{1/q}    1 < p < inf
//               = 2 alpha (1-alpha)                                p = inf
//   k1 = (p-1)/p^q * (alpha^q (1-alpha) + alpha (1-alpha)^q)
//   k2 = (p-1)/p^q * (alpha^q - (1-alpha)^q)
// Powers are evaluated in log space so that p close to 1 (q in the
// hundreds) neither underflows nor loses the leading term.

#include "drqr/core.hpp"

#include <cmath>
#include <utility>

namespace drqr {

namespace detail {

inline double logsumexp(double a, double b) {
    const double m = std::max(a, b);
    if (std::isinf(m)) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// log(alpha^q (1-alpha) + alpha (1-alpha)^q)
inline double log_mixed_moment(double alpha, double q) {
    return logsumexp(q * std::log(alpha) + std::log1p(-alpha), q * std::log1p(-alpha) + std::log(alpha));
}

/// alpha^q - (1-alpha)^q, with sign.
inline double power_difference(double alpha, double q) {
    const double la = q * std::log(alpha), lb = q * std::log1p(-alpha);
    if (la == lb) return 0.0;
    const double hi = std::max(la, lb), lo = std::min(la, lb);
    const double mag = std::exp(hi) * -std::expm1(lo - hi);
    return la > lb ? mag : -mag;
}

/// log((p-1)/p^q)
inline double log_k_factor(double p, double q) { return std::log(p - 1.0) - q * std::log(p); }

inline void require_interior(const WassersteinOrder& p, const char* what) {
    if (!p.is_interior()) throw DomainError(std::string(what) + " is defined only for p in (1, inf)");
}

} // namespace detail

/// Regularization coefficient c_{alpha,p}.
inline double c_alpha_p(double alpha, const WassersteinOrder& p) {
    check_alpha(alpha);
    if (p.is_infinite()) return 2.0 * alpha * (1.0 - alpha);
    if (p.is_one()) return std::max(alpha, 1.0 - alpha);
    const double q = p.conjugate();
    return std::exp(detail::log_mixed_moment(alpha, q) / q);
}

struct KConstants {
    double k1;
    double k2;
};

/// Constants of the one-dimensional dual for p in (1, inf).
inline KConstants k_constants(double alpha, const WassersteinOrder& p) {
    check_alpha(alpha);
    detail::require_interior(p, "k_constants");
    const double pv = p.value(), q = p.conjugate();
    const double lf = detail::log_k_factor(pv, q);
    return {std::exp(lf + detail::log_mixed_moment(alpha, q)), std::exp(lf) * detail::power_difference(alpha, q)};
}

/// All constants for one (alpha, p); k1 and k2 are zero unless p is in (1, inf).
struct RobustConstants {
    double c_alpha_p = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;

    static RobustConstants compute(double alpha, const WassersteinOrder& p) {
        RobustConstants rc;
        rc.c_alpha_p = drqr::c_alpha_p(alpha, p);
        if (p.is_interior()) {
            const auto k = k_constants(alpha, p);
            rc.k1 = k.k1;
            rc.k2 = k.k2;
        }
        return rc;
    }
};

/// Minimizer over lambda > 0 of lambda * r^p + k1 * lambda^{1-q}, where
/// r = radius_1d is the effective one-dimensional radius.
inline double lambda_star(double alpha, const WassersteinOrder& p, double radius_1d) {
    check_alpha(alpha);
    detail::require_interior(p, "lambda_star");
    if (!(radius_1d > 0.0))
        throw DomainError("lambda_star: unregularized: dual multiplier diverges (radius must be > 0)");
    const double pv = p.value(), q = p.conjugate();
    const double lk1 = detail::log_k_factor(pv, q) + detail::log_mixed_moment(alpha, q);
    return std::exp((std::log(q - 1.0) + lk1) / q - (pv / q) * std::log(radius_1d));
}

/// The penalty part of the one-dimensional dual, lambda * r^p + k1 * lambda^{1-q}.
inline double dual_penalty(double alpha, const WassersteinOrder& p, double radius_1d, double lambda) {
    const auto k = k_constants(alpha, p);
    const double q = p.conjugate();
    return lambda * std::pow(radius_1d, p.value()) + k.k1 * std::pow(lambda, 1.0 - q);
}

/// Robust intercept correction s* - s_bar* for radius epsilon and
/// dual_norm_beta_bar = ||(beta, -1)||_*.
inline double intercept_shift(double alpha, const WassersteinOrder& p, double epsilon, double dual_norm_beta_bar) {
    check_alpha(alpha);
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("intercept_shift: epsilon must be >= 0");
    if (!(dual_norm_beta_bar >= 0.0) || !std::isfinite(dual_norm_beta_bar))
        throw DomainError("intercept_shift: dual norm must be finite and >= 0");
    if (p.is_one()) return 0.0;
    if (p.is_infinite()) return (2.0 * alpha - 1.0) * epsilon * dual_norm_beta_bar;
    const double q = p.conjugate();
    const double log_c = detail::log_mixed_moment(alpha, q) / q;
    // (alpha^q - (1-alpha)^q) c^{1-q}, each power folded into one exponent.
    const double upper = std::exp(q * std::log(alpha) + (1.0 - q) * log_c);
    const double lower = std::exp(q * std::log1p(-alpha) + (1.0 - q) * log_c);
    return epsilon / q * (upper - lower) * dual_norm_beta_bar;
}

} // namespace drqr
