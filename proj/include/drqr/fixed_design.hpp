#pragma once

// Regress-then-robustify for fixed designs: an OLS slope, then a
// one-dimensional robust quantile of the OLS residuals, and the radius
// arithmetic of the corresponding guarantee.

#include "drqr/bounds.hpp"
#include "drqr/constants.hpp"
#include "drqr/core.hpp"

#include <Eigen/QR>

namespace drqr {

struct OlsFit {
    Vector beta;
    Vector residuals;     ///< z_i = y_i - beta'x_i
    Vector hat_diagonals; ///< leverages h_ii = x_i'(X'X)^{-1}x_i
};

namespace detail {

inline Eigen::ColPivHouseholderQR<Matrix> full_rank_qr(const Matrix& X) {
    if (X.cols() == 0) throw DataError("design matrix has no columns");
    if (X.rows() < X.cols()) throw DataError("design matrix has fewer rows than columns");
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    const double largest = diag.maxCoeff();
    if (!(largest > 0.0) || diag.minCoeff() < 1e-10 * largest)
        throw DataError("design matrix is rank deficient");
    return qr;
}

} // namespace detail

/// Least squares through a column-pivoted QR factorization.
inline OlsFit ols_fit(const Dataset& data) {
    data.validate();
    const auto qr = detail::full_rank_qr(data.X);
    OlsFit fit;
    fit.beta = qr.solve(data.y);
    fit.residuals = data.y - data.X * fit.beta;
    const Matrix q_thin = qr.householderQ() * Matrix::Identity(data.size(), data.dim());
    fit.hat_diagonals = q_thin.rowwise().squaredNorm();
    return fit;
}

/// c'(X'X)^{-1}c for a full-rank X.
inline double inverse_gram_quadratic(const Matrix& X, const Vector& c) {
    if (c.size() != X.cols()) throw DataError("target vector length must equal the number of columns of X");
    const auto qr = detail::full_rank_qr(X);
    const auto d = X.cols();
    // X P = Q R  =>  X'X = P R'R P'
    const Vector pc = qr.colsPermutation().transpose() * c;
    const Matrix r = qr.matrixR().topLeftCorner(d, d).template triangularView<Eigen::Upper>();
    const Vector w = r.transpose().triangularView<Eigen::Lower>().solve(pc);
    return w.squaredNorm();
}

struct FixedDesignFit {
    Vector beta_ols;
    Vector residuals_z;
    double s_bar = 0.0;    ///< empirical alpha-quantile of z
    double s_robust = 0.0; ///< s_bar + (eps/q)(alpha^q - (1-alpha)^q) c^{1-q} for p > 1
    double objective = 0.0; ///< E l(z - s_bar) + c_{alpha,p} eps
    Vector hat_diagonals;
    Vector target_c;
};

inline FixedDesignFit fixed_design_dro(const Dataset& data, const ProblemSpec& spec, const Vector& target_c) {
    spec.validate();
    if (target_c.size() != data.dim()) throw DataError("target vector length must equal the number of covariates");
    const OlsFit ols = ols_fit(data);
    FixedDesignFit fit;
    fit.beta_ols = ols.beta;
    fit.residuals_z = ols.residuals;
    fit.hat_diagonals = ols.hat_diagonals;
    fit.target_c = target_c;
    fit.s_bar = empirical_quantile(ols.residuals, spec.alpha);
    fit.s_robust = fit.s_bar + intercept_shift(spec.alpha, spec.p, spec.epsilon, 1.0);
    fit.objective = mean_check_loss(ols.residuals, spec.alpha, fit.s_bar) + c_alpha_p(spec.alpha, spec.p) * spec.epsilon;
    return fit;
}

struct FixedDesignRadii {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double eps3 = 0.0;
    double eta = 0.0;
    double Gamma0 = 0.0; ///< E |e|^m
    double total = 0.0;
};

/// Empirical m-th absolute moment (1/N) sum |z_i|^m.
inline double gamma0_estimate(const Vector& z, double m) {
    if (z.size() == 0) throw DataError("gamma0_estimate: empty sample");
    if (!(m > 0.0)) throw DomainError("moment order must be > 0");
    return z.array().abs().pow(m).mean();
}

/// eps1 = eps_N(eta/3) with moment bound Gamma0 and d = number of columns of X,
/// eps2 = 3 Gamma0^{1/m} sqrt(d/N) / eta,
/// eps3 = Gamma0^{1/m} sqrt(3 c'(X'X)^{-1}c / eta),
/// total = eps1 + ratio (eps2 + eps3).
inline FixedDesignRadii fixed_design_radii(const Matrix& X, double eta, double alpha, double m, double Gamma0,
                                           const Vector& target_c, Eigen::Index N) {
    detail::check_schedule_inputs(N, eta, alpha, m, Gamma0, X.cols());
    FixedDesignRadii r;
    r.eta = eta;
    r.Gamma0 = Gamma0;
    const double d = static_cast<double>(X.cols());
    const double g = std::pow(Gamma0, 1.0 / m);
    r.eps1 = radius_schedule(N, eta / 3.0, alpha, m, Gamma0, X.cols()).epsilon_N;
    r.eps2 = 3.0 * g * std::sqrt(d / static_cast<double>(N)) / eta;
    r.eps3 = g * std::sqrt(3.0 * inverse_gram_quadratic(X, target_c) / eta);
    r.total = r.eps1 + asymmetry_ratio(alpha) * (r.eps2 + r.eps3);
    return r;
}

inline FixedDesignRadii fixed_design_radii(const Dataset& data, double eta, double alpha, double m, double Gamma0,
                                           const Vector& target_c) {
    return fixed_design_radii(data.X, eta, alpha, m, Gamma0, target_c, data.size());
}

} // namespace drqr
