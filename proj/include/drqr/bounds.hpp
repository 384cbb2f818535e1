#pragma once

// Radius schedules and the arithmetic of the finite-sample guarantees.
//
// The moment order of the data is called m here; s is reserved for the
// intercept.

#include "drqr/constants.hpp"
#include "drqr/core.hpp"
#include "drqr/solver.hpp"

#include <optional>
#include <string>

namespace drqr {

struct BoundReport {
    double epsilon_N = 0.0;
    double c_alpha_const = 0.0;
    double eta = 0.0;
    double moment_order_m = 3.0;
    double Gamma = 0.0; ///< E ||(Y, X)||^m
    Eigen::Index d = 0;
    Eigen::Index N = 0;
};

namespace detail {

inline void check_schedule_inputs(Eigen::Index N, double eta, double alpha, double m, double Gamma, Eigen::Index d) {
    check_alpha(alpha);
    if (!(m > 2.0) || !std::isfinite(m)) throw DomainError("moment order m needs finite moment of order > 2");
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("confidence parameter eta must lie in (0,1)");
    if (!(Gamma >= 0.0) || !std::isfinite(Gamma)) throw DomainError("moment bound Gamma must be finite and >= 0");
    if (N < 1) throw DomainError("sample size N must be >= 1");
    if (d < 0) throw DomainError("dimension d must be >= 0");
}

} // namespace detail

/// (alpha v (1-alpha)) / (alpha ^ (1-alpha)).
inline double asymmetry_ratio(double alpha) {
    check_alpha(alpha);
    return std::max(alpha, 1.0 - alpha) / std::min(alpha, 1.0 - alpha);
}

/// Constant c_alpha of the radius schedule.
inline double radius_constant(double eta, double alpha, double m, double Gamma, Eigen::Index d) {
    detail::check_schedule_inputs(1, eta, alpha, m, Gamma, d);
    const double dd = static_cast<double>(d) + 2.0;
    const double inner = 360.0 * std::sqrt(dd) + 2.0 * std::sqrt(2.0 * std::log(3.0 / eta)) +
                         std::sqrt(3.0 * Gamma / eta) * (32.0 / (m - 2.0)) * std::sqrt(std::log(24.0 / eta) + 2.0 * dd);
    return asymmetry_ratio(alpha) * inner;
}

/// eps_N(eta) = c_alpha log(2N+1)^{1/m} / sqrt(N).
inline BoundReport radius_schedule(Eigen::Index N, double eta, double alpha, double m, double Gamma, Eigen::Index d) {
    detail::check_schedule_inputs(N, eta, alpha, m, Gamma, d);
    BoundReport rep;
    rep.c_alpha_const = radius_constant(eta, alpha, m, Gamma, d);
    const double n = static_cast<double>(N);
    rep.epsilon_N = rep.c_alpha_const * std::pow(std::log(2.0 * n + 1.0), 1.0 / m) / std::sqrt(n);
    rep.eta = eta;
    rep.moment_order_m = m;
    rep.Gamma = Gamma;
    rep.d = d;
    rep.N = N;
    return rep;
}

struct RegularizedBound {
    double value = 0.0;
    double rho = 0.0; ///< max(alpha, 1-alpha) ||(-beta, 1)||_*
    std::string warning;
};

/// High-confidence upper bound J~_N(lambda) + rho(beta~) lambda on the
/// out-of-sample risk of a regularized fit. When `p` is given, lambda is
/// checked against c_{alpha,p} eps_N(eta).
inline RegularizedBound regularized_bound(const FitResult& fit, double lambda, double alpha,
                                          const BoundReport& schedule,
                                          const std::optional<WassersteinOrder>& p = std::nullopt) {
    check_alpha(alpha);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
    RegularizedBound out;
    out.rho = std::max(alpha, 1.0 - alpha) * fit.dual_norm_beta_bar;
    out.value = fit.objective + out.rho * lambda;
    if (p) {
        const double expected = c_alpha_p(alpha, *p) * schedule.epsilon_N;
        if (std::abs(lambda - expected) > 1e-9 * std::max(1.0, expected))
            out.warning = "lambda differs from c_{alpha,p} * eps_N(eta)";
    }
    if (std::abs(fit.lambda - lambda) > 1e-12 * std::max(1.0, lambda))
        out.warning += (out.warning.empty() ? "" : "; ") + std::string("fit was computed at a different lambda");
    return out;
}

/// Integral of (alpha - F(y)) over [0, delta_s] (oriented), F the empirical
/// CDF of `test_residuals`. Equals E l(R) - E l(R - delta_s): the
/// out-of-sample advantage of moving the intercept up by delta_s.
inline double oos_gap(const Vector& test_residuals, double delta_s, double alpha) {
    check_alpha(alpha);
    if (test_residuals.size() == 0) throw DataError("oos_gap: empty residual sample");
    if (!std::isfinite(delta_s)) throw DomainError("oos_gap: delta_s must be finite");
    if (delta_s == 0.0) return 0.0;
    const double a = std::min(0.0, delta_s), b = std::max(0.0, delta_s);
    double covered = 0.0; // sum_i length of {y in [a, b] : R_i <= y}
    for (Eigen::Index i = 0; i < test_residuals.size(); ++i)
        covered += std::max(0.0, b - std::max(test_residuals(i), a));
    const double integral = alpha * (b - a) - covered / static_cast<double>(test_residuals.size());
    return delta_s > 0.0 ? integral : -integral;
}

} // namespace drqr
