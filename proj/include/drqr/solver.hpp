#pragma once

// Fitting of the regularized quantile regression program
//
//   min_{beta, s}  (1/N) sum_i l_alpha(y_i - beta'x_i - s) + lambda ||(beta, -1)||_*
//
// and of the Wasserstein-robust model, which solves the same program with
// lambda = c_{alpha,p} epsilon and then moves the intercept by the robust
// correction.
//
// Two solvers are provided. The default is a primal log-barrier method: the
// check loss is written in epigraph form (one variable per observation,
// eliminated through a Schur complement) and the dual-norm penalty through
// its own cone (second-order cone for L2, polyhedral for L1 and Linf), so a
// Newton step costs O(N d^2). The alternative is a subgradient method with
// Polyak-type diminishing steps, restarts and a coordinate-wise polish; it
// is kept as an independent cross-check. Both report the same optimality
// residual: the smallest Euclidean norm of an element of the subdifferential
// at the returned point.

#include "drqr/constants.hpp"
#include "drqr/core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cstdint>
#include <random>
#include <string>

namespace drqr {

enum class SolverMethod { interior_point, subgradient };

enum class StepRule { polyak_diminishing };

struct SolverConfig {
    int max_iters = 50000;
    double tol = 1e-6;          ///< target for the optimality residual
    std::uint64_t seed = 0;     ///< restarts of the subgradient method
    StepRule step_rule = StepRule::polyak_diminishing;
    int restarts = 3;
    SolverMethod method = SolverMethod::interior_point;
    double gap_tol = 1e-10;     ///< barrier duality-gap target, relative to max(1, objective)

    void validate() const {
        if (!(tol > 0.0)) throw DomainError("solver tolerance must be > 0");
        if (max_iters < 1) throw DomainError("max_iters must be >= 1");
        if (restarts < 1) throw DomainError("restarts must be >= 1");
        if (!(gap_tol > 0.0)) throw DomainError("gap_tol must be > 0");
    }
};

struct FitResult {
    Vector beta;
    double s_bar = 0.0;     ///< intercept of the regularized program
    double s_robust = 0.0;  ///< s_bar + robust intercept correction
    double objective = 0.0; ///< optimal value; equals the Wasserstein in-sample risk when lambda = c * eps
    int iterations = 0;
    double optimality_residual = 0.0;

    double alpha = 0.5;
    double lambda = 0.0;
    double dual_norm_beta_bar = 1.0;
    bool shift_applied = false; ///< s_robust carries the robust correction
    bool converged = false;
    std::string warning;
};

// ---------------------------------------------------------------------------

/// (1/N) sum l_alpha(y - X beta - s) + lambda ||(beta,-1)||_*, evaluated directly.
inline double regularized_objective(const Dataset& data, const Vector& beta, double s, double alpha, double lambda,
                                    Norm norm) {
    return mean_check_loss(residuals(data, beta, s), alpha) + lambda * augmented_dual_norm(beta, norm);
}

namespace detail {

/// Smallest-norm point of { g0 + V c : c in P }, P = box x (optional) simplex,
/// found with Wolfe's minimum-norm-point algorithm driven by a linear
/// minimization oracle over P.
struct SubgradientPolytope {
    Vector g0;
    Matrix V;          // one column per parameter
    Vector lb, ub;     // box part: the first nbox parameters
    Eigen::Index nbox = 0;
    bool simplex_equality = true; // remaining parameters: sum == 1 (else <= 1), all >= 0

    Eigen::Index nsimplex() const { return V.cols() - nbox; }

    Vector vertex(const Vector& direction) const {
        Vector c = Vector::Zero(V.cols());
        const Vector w = V.transpose() * direction;
        for (Eigen::Index k = 0; k < nbox; ++k) c(k) = w(k) > 0.0 ? lb(k) : ub(k);
        if (nsimplex() > 0) {
            Eigen::Index best = nbox;
            for (Eigen::Index k = nbox + 1; k < V.cols(); ++k)
                if (w(k) < w(best)) best = k;
            if (simplex_equality || w(best) < 0.0) c(best) = 1.0;
        }
        return c;
    }

    Vector point(const Vector& c) const { return g0 + V * c; }
};

inline double min_norm_point(const SubgradientPolytope& poly) {
    if (poly.V.cols() == 0) return poly.g0.norm();
    const Eigen::Index dim = poly.g0.size();
    std::vector<Vector> pts{poly.point(poly.vertex(poly.g0))};
    std::vector<double> weights{1.0};
    Vector x = pts[0];
    double scale = std::max(1.0, pts[0].squaredNorm());

    for (int major = 0; major < 500; ++major) {
        const Vector v = poly.point(poly.vertex(x));
        scale = std::max(scale, v.squaredNorm());
        if (x.squaredNorm() - x.dot(v) <= 1e-15 * scale) break;
        if (static_cast<Eigen::Index>(pts.size()) > dim + 1) break; // numerically stalled
        pts.push_back(v);
        weights.push_back(0.0);

        for (int minor = 0; minor < 500; ++minor) {
            const auto m = static_cast<Eigen::Index>(pts.size());
            Matrix S(dim, m);
            for (Eigen::Index k = 0; k < m; ++k) S.col(k) = pts[static_cast<std::size_t>(k)];
            Matrix K = Matrix::Zero(m + 1, m + 1);
            K.topLeftCorner(m, m) = S.transpose() * S;
            K.block(0, m, m, 1).setOnes();
            K.block(m, 0, 1, m).setOnes();
            Vector rhs = Vector::Zero(m + 1);
            rhs(m) = 1.0;
            const Vector sol = K.completeOrthogonalDecomposition().solve(rhs);
            const Vector mu = sol.head(m);
            if ((mu.array() > 1e-14).all()) {
                weights.assign(mu.data(), mu.data() + m);
                break;
            }
            double theta = 1.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                const double wk = weights[static_cast<std::size_t>(k)];
                if (mu(k) <= 1e-14 && wk - mu(k) > 0.0) theta = std::min(theta, wk / (wk - mu(k)));
            }
            for (Eigen::Index k = 0; k < m; ++k) {
                auto& wk = weights[static_cast<std::size_t>(k)];
                wk = (1.0 - theta) * wk + theta * mu(k);
            }
            std::vector<Vector> keep_pts;
            std::vector<double> keep_w;
            for (std::size_t k = 0; k < pts.size(); ++k)
                if (weights[k] > 1e-14) {
                    keep_pts.push_back(pts[k]);
                    keep_w.push_back(weights[k]);
                }
            if (keep_pts.empty()) {
                keep_pts.push_back(pts.back());
                keep_w.push_back(1.0);
            }
            pts = std::move(keep_pts);
            weights = std::move(keep_w);
        }
        double total = 0.0;
        for (double w : weights) total += w;
        x = Vector::Zero(dim);
        for (std::size_t k = 0; k < pts.size(); ++k) x += (weights[k] / total) * pts[k];
    }
    return x.norm();
}

} // namespace detail

/// Smallest norm of a subgradient of the regularized objective at (beta, s).
///
/// Residuals within `tie_tol` of zero may take any check-loss slope in
/// [alpha - 1, alpha]; coefficients within `tie_tol` (relative) of a kink of
/// the penalty may take any element of its subdifferential there.
inline double optimality_residual(const Dataset& data, const Vector& beta, double s, double alpha, double lambda,
                                  Norm norm, double tie_tol = -1.0) {
    const auto n = data.size();
    const auto d = data.dim();
    const double scale = 1.0 + data.y.cwiseAbs().maxCoeff() + (d > 0 ? data.X.cwiseAbs().maxCoeff() * beta.cwiseAbs().sum() : 0.0);
    if (tie_tol < 0.0) tie_tol = 1e-7 * scale;
    const Vector r = residuals(data, beta, s);
    const double inv_n = 1.0 / static_cast<double>(n);

    detail::SubgradientPolytope poly;
    poly.g0 = Vector::Zero(d + 1);
    std::vector<Vector> box_cols, simplex_cols;
    std::vector<double> lbs, ubs;

    auto row = [&](Eigen::Index i) {
        Vector a(d + 1);
        a.head(d) = data.X.row(i).transpose();
        a(d) = 1.0;
        return a;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        if (r(i) > tie_tol) poly.g0 -= alpha * inv_n * row(i);
        else if (r(i) < -tie_tol) poly.g0 -= (alpha - 1.0) * inv_n * row(i);
        else {
            box_cols.push_back(-inv_n * row(i));
            lbs.push_back(alpha - 1.0);
            ubs.push_back(alpha);
        }
    }
    if (lambda > 0.0 && d > 0) {
        const double btol = 1e-7 * (1.0 + beta.cwiseAbs().maxCoeff());
        switch (dual_of(norm)) {
        case Norm::L2:
            poly.g0.head(d) += lambda * beta / std::sqrt(1.0 + beta.squaredNorm());
            break;
        case Norm::L1: // penalty lambda (1 + sum |beta_j|)
            for (Eigen::Index j = 0; j < d; ++j) {
                if (std::abs(beta(j)) > btol) {
                    poly.g0(j) += lambda * (beta(j) > 0 ? 1.0 : -1.0);
                } else {
                    Vector col = Vector::Zero(d + 1);
                    col(j) = lambda;
                    box_cols.push_back(col);
                    lbs.push_back(-1.0);
                    ubs.push_back(1.0);
                }
            }
            break;
        case Norm::Linf: { // penalty lambda max(1, max_j |beta_j|)
            const double top = std::max(1.0, beta.cwiseAbs().maxCoeff());
            const bool const_active = beta.cwiseAbs().maxCoeff() <= 1.0 + btol;
            for (Eigen::Index j = 0; j < d; ++j) {
                if (std::abs(beta(j)) >= top - btol) {
                    Vector col = Vector::Zero(d + 1);
                    col(j) = lambda * (beta(j) >= 0 ? 1.0 : -1.0);
                    simplex_cols.push_back(col);
                }
            }
            poly.simplex_equality = !const_active;
            break;
        }
        }
    }
    poly.nbox = static_cast<Eigen::Index>(box_cols.size());
    poly.V.resize(d + 1, poly.nbox + static_cast<Eigen::Index>(simplex_cols.size()));
    poly.lb.resize(poly.nbox);
    poly.ub.resize(poly.nbox);
    for (Eigen::Index k = 0; k < poly.nbox; ++k) {
        poly.V.col(k) = box_cols[static_cast<std::size_t>(k)];
        poly.lb(k) = lbs[static_cast<std::size_t>(k)];
        poly.ub(k) = ubs[static_cast<std::size_t>(k)];
    }
    for (std::size_t k = 0; k < simplex_cols.size(); ++k) poly.V.col(poly.nbox + static_cast<Eigen::Index>(k)) = simplex_cols[k];
    return detail::min_norm_point(poly);
}

namespace detail {

/// Log-barrier path following for the regularized program.
///
/// Variables: theta = (beta, s, aux) and one epigraph variable u_i per row with
/// u_i >= alpha e_i, u_i >= (alpha - 1) e_i, e_i = y_i - beta'x_i - s.
/// Each centering step uses damped Newton steps 1/(1 + decrement), which keep
/// iterates strictly feasible for self-concordant barriers.
class BarrierSolver {
public:
    BarrierSolver(const Dataset& data, double alpha, double lambda, Norm norm, const SolverConfig& cfg)
        : data_(data), alpha_(alpha), lambda_(lambda), penalty_(dual_of(norm)), cfg_(cfg),
          n_(data.size()), d_(data.dim()) {
        use_penalty_ = lambda_ > 0.0 && d_ > 0;
        if (!use_penalty_) naux_ = 0;
        else if (penalty_ == Norm::L1) naux_ = d_;
        else naux_ = 1;
        ntheta_ = d_ + 1 + naux_;
        nu_ = 2.0 * static_cast<double>(n_);
        if (use_penalty_) {
            if (penalty_ == Norm::L2) nu_ += 2.0;
            else if (penalty_ == Norm::L1) nu_ += 2.0 * static_cast<double>(d_);
            else nu_ += 2.0 * static_cast<double>(d_) + 1.0;
        }
        A_.resize(n_, d_ + 1);
        A_.leftCols(d_) = data.X;
        A_.col(d_).setOnes();
    }

    struct Outcome {
        Vector beta;
        int newton_steps = 0;
        bool reached_gap = false;
    };

    Outcome solve() {
        Vector theta = Vector::Zero(ntheta_);
        theta(d_) = empirical_quantile(data_.y, alpha_);
        if (use_penalty_) {
            if (penalty_ == Norm::L1) theta.tail(naux_).setOnes();
            else theta(d_ + 1) = 2.0;
        }
        Vector e = data_.y - A_ * theta.head(d_ + 1);
        Vector u = e.cwiseAbs().array() + 1.0;

        const double inv_n = 1.0 / static_cast<double>(n_);
        double f0 = objective(theta, u);
        double tau = nu_ / std::max(f0, 1e-8);
        const double mu = 50.0;
        Outcome out;
        int steps = 0;
        while (steps < cfg_.max_iters) {
            // centering
            for (int inner = 0; inner < 200 && steps < cfg_.max_iters; ++inner) {
                ++steps;
                e = data_.y - A_ * theta.head(d_ + 1);
                Vector wA(n_), wB(n_);
                Vector gu(n_), huu(n_);
                Vector grad = Vector::Zero(ntheta_);
                Matrix H = Matrix::Zero(ntheta_, ntheta_);
                Vector red_w(n_), red_g(n_), huth(n_);
                for (Eigen::Index i = 0; i < n_; ++i) {
                    const double a = u(i) - alpha_ * e(i);
                    const double b = u(i) + (1.0 - alpha_) * e(i);
                    const double ia = 1.0 / a, ib = 1.0 / b;
                    const double p = ia * ia, q = ib * ib;
                    gu(i) = tau * inv_n - ia - ib;
                    huu(i) = p + q;
                    const double gth = -alpha_ * ia + (1.0 - alpha_) * ib; // times a_i
                    huth(i) = alpha_ * p - (1.0 - alpha_) * q;           // times a_i
                    red_w(i) = p * q / (p + q);
                    red_g(i) = gth - huth(i) * gu(i) / huu(i);
                }
                H.topLeftCorner(d_ + 1, d_ + 1) = A_.transpose() * red_w.asDiagonal() * A_;
                grad.head(d_ + 1) = A_.transpose() * red_g;
                add_penalty_terms(theta, tau, grad, H);

                Eigen::LDLT<Matrix> ldlt(H);
                Vector dtheta = ldlt.solve(-grad);
                if (!dtheta.allFinite()) {
                    Eigen::ColPivHouseholderQR<Matrix> qr(H);
                    dtheta = qr.solve(-grad);
                }
                const Vector adth = A_ * dtheta.head(d_ + 1);
                Vector du(n_);
                for (Eigen::Index i = 0; i < n_; ++i) du(i) = -(gu(i) + huth(i) * adth(i)) / huu(i);

                // squared Newton decrement
                double dec2 = -gradient_dot(theta, u, tau, dtheta, du);
                if (!(dec2 >= 0.0) || !std::isfinite(dec2)) dec2 = 0.0;
                const double dec = std::sqrt(dec2);
                if (dec2 / 2.0 <= 1e-9) break;

                // Backtracking on the barrier function; the damped step
                // 1/(1 + dec) is the guaranteed fallback.
                const double damped = 1.0 / (1.0 + dec);
                const double phi0 = barrier_value(theta, u, tau);
                double step = 1.0;
                bool moved = false;
                while (step > damped) {
                    const Vector th_new = theta + step * dtheta;
                    const Vector u_new = u + step * du;
                    if (feasible(th_new, u_new) && barrier_value(th_new, u_new, tau) <= phi0 - 0.1 * step * dec2) {
                        theta = th_new;
                        u = u_new;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) {
                    step = dec > 0.25 ? damped : 1.0;
                    for (int tries = 0; tries < 60; ++tries) {
                        const Vector th_new = theta + step * dtheta;
                        const Vector u_new = u + step * du;
                        if (feasible(th_new, u_new)) {
                            theta = th_new;
                            u = u_new;
                            break;
                        }
                        step *= 0.5;
                        if (tries == 59) step = 0.0;
                    }
                }
                if (step == 0.0) break;
            }
            if (nu_ / tau <= cfg_.gap_tol * std::max(1.0, objective(theta, u))) {
                out.reached_gap = true;
                break;
            }
            tau *= mu;
        }
        out.beta = theta.head(d_);
        out.newton_steps = steps;
        return out;
    }

private:
    double objective(const Vector& theta, const Vector& u) const {
        double f = u.sum() / static_cast<double>(n_);
        if (use_penalty_) {
            if (penalty_ == Norm::L1) f += lambda_ * (1.0 + theta.tail(naux_).sum());
            else f += lambda_ * theta(d_ + 1);
        }
        return f;
    }

    // tau * objective + barrier; +inf outside the domain.
    double barrier_value(const Vector& theta, const Vector& u, double tau) const {
        const double inf = std::numeric_limits<double>::infinity();
        const Vector e = data_.y - A_ * theta.head(d_ + 1);
        double acc = tau * objective(theta, u);
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double a = u(i) - alpha_ * e(i), b = u(i) + (1.0 - alpha_) * e(i);
            if (!(a > 0.0) || !(b > 0.0)) return inf;
            acc -= std::log(a) + std::log(b);
        }
        if (!use_penalty_) return acc;
        const auto beta = theta.head(d_);
        switch (penalty_) {
        case Norm::L2: {
            const double t = theta(d_ + 1), g = t * t - 1.0 - beta.squaredNorm();
            if (!(t > 0.0) || !(g > 0.0)) return inf;
            acc -= std::log(g);
            break;
        }
        case Norm::L1:
            for (Eigen::Index j = 0; j < d_; ++j) {
                const double w = theta(d_ + 1 + j);
                if (!(w - beta(j) > 0.0) || !(w + beta(j) > 0.0)) return inf;
                acc -= std::log(w - beta(j)) + std::log(w + beta(j));
            }
            break;
        case Norm::Linf: {
            const double t = theta(d_ + 1);
            if (!(t - 1.0 > 0.0)) return inf;
            acc -= std::log(t - 1.0);
            for (Eigen::Index j = 0; j < d_; ++j) {
                if (!(t - beta(j) > 0.0) || !(t + beta(j) > 0.0)) return inf;
                acc -= std::log(t - beta(j)) + std::log(t + beta(j));
            }
            break;
        }
        }
        return acc;
    }

    bool feasible(const Vector& theta, const Vector& u) const {
        if (!theta.allFinite() || !u.allFinite()) return false;
        const Vector e = data_.y - A_ * theta.head(d_ + 1);
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (!(u(i) - alpha_ * e(i) > 0.0) || !(u(i) + (1.0 - alpha_) * e(i) > 0.0)) return false;
        }
        if (!use_penalty_) return true;
        const auto beta = theta.head(d_);
        switch (penalty_) {
        case Norm::L2: {
            const double t = theta(d_ + 1);
            return t > 0.0 && t * t - 1.0 - beta.squaredNorm() > 0.0;
        }
        case Norm::L1:
            for (Eigen::Index j = 0; j < d_; ++j) {
                const double w = theta(d_ + 1 + j);
                if (!(w - beta(j) > 0.0) || !(w + beta(j) > 0.0)) return false;
            }
            return true;
        case Norm::Linf: {
            const double t = theta(d_ + 1);
            if (!(t - 1.0 > 0.0)) return false;
            for (Eigen::Index j = 0; j < d_; ++j)
                if (!(t - beta(j) > 0.0) || !(t + beta(j) > 0.0)) return false;
            return true;
        }
        }
        return true;
    }

    // Gradient (scaled objective tau*c plus barrier) dotted with a full step.
    double gradient_dot(const Vector& theta, const Vector& u, double tau, const Vector& dtheta, const Vector& du) const {
        const Vector e = data_.y - A_ * theta.head(d_ + 1);
        const Vector adth = A_ * dtheta.head(d_ + 1);
        const double inv_n = 1.0 / static_cast<double>(n_);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double a = u(i) - alpha_ * e(i);
            const double b = u(i) + (1.0 - alpha_) * e(i);
            // d a = du + alpha * a_i' dtheta ; d b = du - (1 - alpha) a_i' dtheta
            acc += tau * inv_n * du(i);
            acc -= (du(i) + alpha_ * adth(i)) / a;
            acc -= (du(i) - (1.0 - alpha_) * adth(i)) / b;
        }
        Vector g = Vector::Zero(ntheta_);
        Matrix dummy = Matrix::Zero(ntheta_, ntheta_);
        add_penalty_terms(theta, tau, g, dummy);
        return acc + g.dot(dtheta);
    }

    void add_penalty_terms(const Vector& theta, double tau, Vector& grad, Matrix& H) const {
        if (!use_penalty_) return;
        const auto beta = theta.head(d_);
        switch (penalty_) {
        case Norm::L2: {
            const Eigen::Index ti = d_ + 1;
            const double t = theta(ti);
            const double g = t * t - 1.0 - beta.squaredNorm();
            grad(ti) += tau * lambda_;
            // -log g with grad_g = (-2 beta, 2 t), hess_g = diag(-2 I, 2)
            Vector gg(d_ + 1);
            gg.head(d_) = -2.0 * beta;
            gg(d_) = 2.0 * t;
            grad.head(d_) += -gg.head(d_) / g;
            grad(ti) += -gg(d_) / g;
            Matrix outer = gg * gg.transpose() / (g * g);
            H.topLeftCorner(d_, d_) += outer.topLeftCorner(d_, d_);
            H.topLeftCorner(d_, d_).diagonal().array() += 2.0 / g;
            H.block(0, ti, d_, 1) += outer.block(0, d_, d_, 1);
            H.block(ti, 0, 1, d_) += outer.block(d_, 0, 1, d_);
            H(ti, ti) += outer(d_, d_) - 2.0 / g;
            break;
        }
        case Norm::L1:
            for (Eigen::Index j = 0; j < d_; ++j) {
                const Eigen::Index wi = d_ + 1 + j;
                const double w = theta(wi);
                const double m = w - beta(j), p = w + beta(j);
                grad(wi) += tau * lambda_ - 1.0 / m - 1.0 / p;
                grad(j) += 1.0 / m - 1.0 / p;
                const double im2 = 1.0 / (m * m), ip2 = 1.0 / (p * p);
                H(wi, wi) += im2 + ip2;
                H(j, j) += im2 + ip2;
                H(j, wi) += -im2 + ip2;
                H(wi, j) += -im2 + ip2;
            }
            break;
        case Norm::Linf: {
            const Eigen::Index ti = d_ + 1;
            const double t = theta(ti);
            grad(ti) += tau * lambda_ - 1.0 / (t - 1.0);
            H(ti, ti) += 1.0 / ((t - 1.0) * (t - 1.0));
            for (Eigen::Index j = 0; j < d_; ++j) {
                const double m = t - beta(j), p = t + beta(j);
                grad(ti) += -1.0 / m - 1.0 / p;
                grad(j) += 1.0 / m - 1.0 / p;
                const double im2 = 1.0 / (m * m), ip2 = 1.0 / (p * p);
                H(ti, ti) += im2 + ip2;
                H(j, j) += im2 + ip2;
                H(j, ti) += -im2 + ip2;
                H(ti, j) += -im2 + ip2;
            }
            break;
        }
        }
    }

    const Dataset& data_;
    double alpha_;
    double lambda_;
    Norm penalty_;
    SolverConfig cfg_;
    Eigen::Index n_, d_;
    bool use_penalty_ = false;
    Eigen::Index naux_ = 0, ntheta_ = 0;
    double nu_ = 0.0;
    Matrix A_;
};

/// Minimizes a convex function of one variable starting from `x0`.
template <typename F>
double minimize_convex_1d(F&& f, double x0, double width) {
    width = std::max(width, 1e-8);
    double lo = x0 - width, hi = x0 + width;
    for (int k = 0; k < 60 && f(lo) < f(x0); ++k) {
        lo = x0 - (x0 - lo) * 2.0;
    }
    for (int k = 0; k < 60 && f(hi) < f(x0); ++k) {
        hi = x0 + (hi - x0) * 2.0;
    }
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), dd = a + g * (b - a);
    double fc = f(c), fd = f(dd);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc <= fd) {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = f(dd);
        }
    }
    const double xm = 0.5 * (a + b);
    return f(xm) <= f(x0) ? xm : x0;
}

struct SubgradientOutcome {
    Vector beta;
    double s = 0.0;
    int iterations = 0;
};

inline SubgradientOutcome subgradient_solve(const Dataset& data, double alpha, double lambda, Norm norm,
                                            const SolverConfig& cfg) {
    const auto n = data.size(), d = data.dim();
    const Norm pen = dual_of(norm);
    auto objective = [&](const Vector& beta, double s) {
        return regularized_objective(data, beta, s, alpha, lambda, norm);
    };
    auto subgradient = [&](const Vector& beta, double s, Vector& g_beta, double& g_s) {
        const Vector r = residuals(data, beta, s);
        Vector psi(n);
        for (Eigen::Index i = 0; i < n; ++i) psi(i) = r(i) >= 0.0 ? alpha : alpha - 1.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        g_beta = -inv_n * (data.X.transpose() * psi);
        g_s = -inv_n * psi.sum();
        if (lambda > 0.0 && d > 0) {
            switch (pen) {
            case Norm::L2: g_beta += lambda * beta / std::sqrt(1.0 + beta.squaredNorm()); break;
            case Norm::L1:
                for (Eigen::Index j = 0; j < d; ++j) g_beta(j) += lambda * (beta(j) > 0 ? 1.0 : beta(j) < 0 ? -1.0 : 0.0);
                break;
            case Norm::Linf: {
                Eigen::Index jmax = 0;
                const double m = beta.cwiseAbs().maxCoeff(&jmax);
                if (m > 1.0) g_beta(jmax) += lambda * (beta(jmax) > 0 ? 1.0 : -1.0);
                break;
            }
            }
        }
    };

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SubgradientOutcome best{Vector::Zero(d), empirical_quantile(data.y, alpha), 0};
    double f_best = objective(best.beta, best.s);
    const double y_scale = 1.0 + data.y.cwiseAbs().maxCoeff();
    const int iters_per_restart = std::max(1, cfg.max_iters / cfg.restarts);

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        Vector beta = restart == 0 ? Vector(best.beta) : Vector(best.beta);
        double s = best.s;
        if (restart > 0)
            for (Eigen::Index j = 0; j < d; ++j) beta(j) += 0.1 * gauss(rng);
        double f_local_best = objective(beta, s);
        const double delta0 = 0.1 * std::max(f_local_best, 1e-3 * y_scale);
        Vector gb;
        double gs = 0.0;
        for (int k = 0; k < iters_per_restart; ++k) {
            ++best.iterations;
            const double f = objective(beta, s);
            if (f < f_best) {
                f_best = f;
                best.beta = beta;
                best.s = s;
            }
            f_local_best = std::min(f_local_best, f);
            subgradient(beta, s, gb, gs);
            const double gnorm2 = gb.squaredNorm() + gs * gs;
            if (gnorm2 == 0.0) break;
            const double target = f_local_best - delta0 / std::sqrt(static_cast<double>(k) + 1.0);
            const double step = (f - target) / gnorm2;
            beta -= step * gb;
            s -= step * gs;
        }
    }

    // coordinate-wise polish on (beta, s)
    Vector beta = best.beta;
    double s = empirical_quantile(residuals(data, beta, 0.0), alpha);
    double f_cur = objective(beta, s);
    for (int sweep = 0; sweep < 50; ++sweep) {
        const double f_start = f_cur;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double x0 = beta(j);
            auto fj = [&](double v) {
                Vector b = beta;
                b(j) = v;
                return objective(b, s);
            };
            beta(j) = minimize_convex_1d(fj, x0, 0.1 * (1.0 + std::abs(x0)));
            s = empirical_quantile(residuals(data, beta, 0.0), alpha);
            f_cur = objective(beta, s);
        }
        if (f_start - f_cur <= 1e-14 * (1.0 + std::abs(f_cur))) break;
    }
    best.beta = beta;
    best.s = s;
    return best;
}

} // namespace detail

/// Solves the regularized program for a given lambda >= 0.
///
/// The intercept s_bar is the left-continuous empirical alpha-quantile of
/// y - X beta, the exact minimizer over s for the returned slope. When
/// lambda equals c_{alpha,p} * spec.epsilon the robust correction is added to
/// form s_robust; otherwise s_robust = s_bar and shift_applied is false.
inline FitResult fit_regularized(const Dataset& data, const ProblemSpec& spec, double lambda,
                                 const SolverConfig& cfg = {}) {
    data.validate();
    spec.validate();
    cfg.validate();
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");

    FitResult fit;
    fit.alpha = spec.alpha;
    fit.lambda = lambda;
    if (cfg.method == SolverMethod::interior_point) {
        detail::BarrierSolver solver(data, spec.alpha, lambda, spec.norm, cfg);
        auto out = solver.solve();
        fit.beta = out.beta;
        fit.iterations = out.newton_steps;
        if (!out.reached_gap) fit.warning = "barrier method stopped before reaching the duality-gap target";
    } else {
        auto out = detail::subgradient_solve(data, spec.alpha, lambda, spec.norm, cfg);
        fit.beta = out.beta;
        fit.iterations = out.iterations;
    }
    fit.s_bar = empirical_quantile(residuals(data, fit.beta, 0.0), spec.alpha);
    fit.objective = regularized_objective(data, fit.beta, fit.s_bar, spec.alpha, lambda, spec.norm);
    fit.dual_norm_beta_bar = augmented_dual_norm(fit.beta, spec.norm);
    fit.optimality_residual = optimality_residual(data, fit.beta, fit.s_bar, spec.alpha, lambda, spec.norm);
    fit.converged = fit.warning.empty() && fit.optimality_residual <= cfg.tol;
    if (fit.warning.empty() && !fit.converged) fit.warning = "optimality residual above tolerance";

    const double matched = c_alpha_p(spec.alpha, spec.p) * spec.epsilon;
    fit.shift_applied = std::abs(lambda - matched) <= 1e-12 * std::max(1.0, lambda);
    fit.s_robust = fit.s_bar;
    if (fit.shift_applied) fit.s_robust += intercept_shift(spec.alpha, spec.p, spec.epsilon, fit.dual_norm_beta_bar);
    return fit;
}

/// Wasserstein-robust fit: the regularized program at lambda = c_{alpha,p} eps,
/// followed by the robust intercept correction.
inline FitResult fit_dro(const Dataset& data, const ProblemSpec& spec, const SolverConfig& cfg = {}) {
    spec.validate();
    return fit_regularized(data, spec, c_alpha_p(spec.alpha, spec.p) * spec.epsilon, cfg);
}

/// beta'x + s_robust.
inline double predict_quantile(const FitResult& fit, const Vector& x) {
    if (x.size() != fit.beta.size()) throw DataError("predict_quantile: dimension mismatch");
    return fit.beta.dot(x) + fit.s_robust;
}

} // namespace drqr
