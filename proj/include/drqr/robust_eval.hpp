#pragma once

// Worst-case expected check loss over a type-p Wasserstein ball around the
// empirical law, for fixed (beta, s).
//
// The ball in R^{d+1} projects onto a one-dimensional ball around the law of
// the residuals z_i = y_i - beta'x_i - s with radius eps ||(beta,-1)||_*, where
// the supremum has closed forms for p = 1 and p = inf and a one-dimensional
// dual in lambda for p in (1, inf):
//
//   inf_{lambda > 0}  E l(Z + k2 lambda^{1-q}) + lambda r^p + k1 lambda^{1-q}.
//
// Also provided: an evaluation that never projects (it displaces points in
// R^{d+1} along the dual-achieving direction), a brute-force oracle for the
// atom-splitting reduction of the primal problem, and an audit of the
// "worst-case risk = nominal risk + c * eps" identity for a few losses.

#include "drqr/constants.hpp"
#include "drqr/core.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

namespace drqr {

struct InnerSupResult {
    double value = 0.0;
    std::optional<double> lambda_opt; ///< dual minimizer, p in (1, inf) with positive radius
    bool attained = true;             ///< false when the supremum is not attained (p = 1)
};

/// Residuals z_i = y_i - beta'x_i - s of the projected one-dimensional problem.
inline Vector project_residuals(const Dataset& data, const Vector& beta, double s) { return residuals(data, beta, s); }

/// eps ||(beta, -1)||_*: radius of the projected ball.
inline double effective_radius(double epsilon, const Vector& beta, Norm norm) {
    return epsilon * augmented_dual_norm(beta, norm);
}

namespace detail {

/// Golden-section minimization of a unimodal function on [lo, hi].
template <typename F>
std::pair<double, double> golden_minimize(F&& f, double lo, double hi, double xtol, int max_iter = 400) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double x = fc <= fd ? c : d;
    return {x, std::min(fc, fd)};
}

/// Minimizes a convex function of log(lambda), starting from a bracket
/// around `center` and widening it while the minimum sits on an edge.
template <typename F>
std::pair<double, double> minimize_over_log_lambda(F&& h, double center) {
    double lo = std::log(center) - std::log(100.0), hi = std::log(center) + std::log(100.0);
    const double step = std::log(100.0);
    int expansions = 0;
    for (;;) {
        const double flo = h(lo), fhi = h(hi);
        const double fin_lo = h(lo + 1e-3 * (hi - lo)), fin_hi = h(hi - 1e-3 * (hi - lo));
        bool widened = false;
        if (flo <= fin_lo) {
            lo -= step;
            widened = true;
        }
        if (fhi <= fin_hi) {
            hi += step;
            widened = true;
        }
        if (!widened) break;
        if (++expansions > 40) {
            std::ostringstream os;
            os << "lambda search did not bracket a minimum: log-lambda bracket [" << lo << ", " << hi
               << "], edge values " << flo << ", " << fhi;
            throw SolverError(os.str());
        }
    }
    const auto [t, value] = golden_minimize(h, lo, hi, 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi)));
    return {std::exp(t), value};
}

} // namespace detail

/// Worst-case expected check loss over the one-dimensional ball of radius
/// `radius_1d` around the weighted residual law (z, w). Equal weights when
/// `w` is empty.
inline InnerSupResult worst_case_value_1d(const Vector& z, double alpha, const WassersteinOrder& p, double radius_1d,
                                          const Vector& w = Vector()) {
    check_alpha(alpha);
    if (!(radius_1d >= 0.0) || !std::isfinite(radius_1d)) throw DomainError("radius must be finite and >= 0");
    if (z.size() == 0) throw DataError("empty residual sample");
    const Vector weights = w.size() == 0 ? Vector::Constant(z.size(), 1.0 / static_cast<double>(z.size())) : w;
    auto expected = [&](double shift) { return weighted_check_loss(z, weights, alpha, -shift); };

    InnerSupResult out;
    if (radius_1d == 0.0) {
        out.value = expected(0.0);
        return out;
    }
    if (p.is_one()) {
        out.value = expected(0.0) + radius_1d * std::max(alpha, 1.0 - alpha);
        double favorable = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const bool up = alpha >= 0.5 && z(i) >= 0.0;
            const bool down = alpha <= 0.5 && z(i) <= 0.0;
            if (up || down) favorable += weights(i);
        }
        out.attained = alpha == 0.5 || favorable > 0.0;
        return out;
    }
    if (p.is_infinite()) {
        out.value = expected((2.0 * alpha - 1.0) * radius_1d) + 2.0 * alpha * (1.0 - alpha) * radius_1d;
        return out;
    }
    const auto k = k_constants(alpha, p);
    const double q = p.conjugate(), pv = p.value();
    const double rp = std::pow(radius_1d, pv);
    auto h = [&](double t) {
        const double lq = std::exp((1.0 - q) * t); // lambda^{1-q}
        return expected(k.k2 * lq) + std::exp(t) * rp + k.k1 * lq;
    };
    const auto [lambda, value] = detail::minimize_over_log_lambda(h, lambda_star(alpha, p, radius_1d));
    out.value = value;
    out.lambda_opt = lambda;
    return out;
}

/// Worst-case expected check loss of the residual y - beta'x - s over the
/// ball of radius spec.epsilon around the empirical law of `data`.
inline InnerSupResult worst_case_value(const Dataset& data, const Vector& beta, double s, const ProblemSpec& spec) {
    spec.validate();
    data.validate();
    return worst_case_value_1d(project_residuals(data, beta, s), spec.alpha, spec.p,
                               effective_radius(spec.epsilon, beta, spec.norm));
}

/// The same quantity evaluated without projecting: each atom is displaced in
/// R^{d+1} along +-v, v = dual_direction((-beta, 1)), and the loss is
/// recomputed from the displaced point. Agrees with worst_case_value up to
/// rounding; kept as an independent check of the projection.
inline double worst_case_value_lifted(const Dataset& data, const Vector& beta, double s, const ProblemSpec& spec) {
    spec.validate();
    data.validate();
    const auto n = data.size(), d = data.dim();
    const double alpha = spec.alpha;
    Vector nb(d + 1);
    nb.head(d) = -beta;
    nb(d) = 1.0;
    auto loss_at = [&](Eigen::Index i, const Vector& delta) {
        const double y = data.y(i) + delta(d);
        const double fitted = d > 0 ? beta.dot(data.X.row(i).transpose() + delta.head(d)) : 0.0;
        return check_loss(y - fitted - s, alpha);
    };
    const Vector zero = Vector::Zero(d + 1);
    double base = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) base += loss_at(i, zero);
    base /= static_cast<double>(n);
    if (spec.epsilon == 0.0) return base;
    const Vector v = dual_direction(nb, spec.norm);
    const double gain = nb.dot(v); // residual change per unit of transport

    if (spec.p.is_infinite()) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            acc += std::max(loss_at(i, spec.epsilon * v), loss_at(i, -spec.epsilon * v));
        return acc / static_cast<double>(n);
    }
    if (spec.p.is_one()) {
        // growth rate of the loss along +-v once atom 0 is past its kink
        const double far = 2.0 * std::abs(residuals(data, beta, s)(0)) / gain + 1.0;
        double rate = 0.0;
        for (double sigma : {1.0, -1.0})
            rate = std::max(rate, loss_at(0, sigma * (far + 1.0) * v) - loss_at(0, sigma * far * v));
        return base + spec.epsilon * rate;
    }
    const double pv = spec.p.value();
    const Vector z = residuals(data, beta, s);
    auto atom_sup = [&](Eigen::Index i, double lambda) {
        double best = loss_at(i, zero);
        for (double sigma : {1.0, -1.0}) {
            const double kink = -sigma * z(i) / gain; // displacement at which the residual crosses 0
            std::vector<double> cands{0.0};
            auto piece = [&](double a, double b, double slope) {
                if (slope > 0.0) {
                    double t = std::pow(slope / (pv * lambda), 1.0 / (pv - 1.0));
                    cands.push_back(std::clamp(t, a, b));
                }
            };
            const double inf = std::numeric_limits<double>::infinity();
            if (kink > 0.0) {
                // the residual has sign of z on [0, kink] and the opposite sign beyond
                const double s1 = sigma * gain * (z(i) >= 0.0 ? alpha : alpha - 1.0);
                const double s2 = sigma * gain * (z(i) >= 0.0 ? alpha - 1.0 : alpha);
                cands.push_back(kink);
                piece(0.0, kink, s1);
                piece(kink, inf, s2);
            } else {
                const double zs = z(i) + sigma * gain; // sign of the residual just after leaving 0
                piece(0.0, inf, sigma * gain * (zs >= 0.0 ? alpha : alpha - 1.0));
            }
            for (double t : cands) best = std::max(best, loss_at(i, sigma * t * v) - lambda * std::pow(t, pv));
        }
        return best;
    };
    const double rp = std::pow(spec.epsilon, pv);
    auto h = [&](double t) {
        const double lambda = std::exp(t);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += atom_sup(i, lambda);
        return acc / static_cast<double>(n) + lambda * rp;
    };
    const double center = lambda_star(alpha, spec.p, spec.epsilon * gain) * std::pow(gain, pv);
    return detail::minimize_over_log_lambda(h, std::max(center, 1e-300)).second;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace detail {

struct HullSegment {
    double slope;  // gain per unit of budget
    double length; // budget width (per unit mass) times the atom weight
};

/// Upper concave hull of points sorted by x, starting at (0, 0); returns the
/// hull's segments.
inline std::vector<HullSegment> concave_hull_segments(const std::vector<double>& x, const std::vector<double>& y,
                                                      double weight) {
    std::vector<std::size_t> hull;
    for (std::size_t k = 0; k < x.size(); ++k) {
        while (hull.size() >= 2) {
            const auto a = hull[hull.size() - 2], b = hull.back();
            // drop b if it lies on or below the chord a -> k
            const double cross = (x[b] - x[a]) * (y[k] - y[a]) - (y[b] - y[a]) * (x[k] - x[a]);
            if (cross >= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(k);
    }
    std::vector<HullSegment> segs;
    for (std::size_t j = 1; j < hull.size(); ++j) {
        const double dx = x[hull[j]] - x[hull[j - 1]];
        const double dy = y[hull[j]] - y[hull[j - 1]];
        if (dx > 0.0 && dy > 0.0) segs.push_back({dy / dx, dx * weight});
    }
    return segs;
}

} // namespace detail

struct OracleConfig {
    int grid_points = 3000;       ///< uniform displacement grid per atom
    int tail_points = 300;        ///< geometric grid beyond the uniform range
    double max_work = 5e7;        ///< budget guard on atoms x grid points
};

/// Lower bound on sup E_G[L(Z)] over the p-Wasserstein ball of radius r
/// around the weighted law (z, w), for convex L, from the atom-splitting
/// reduction: each atom i keeps mass w_i and splits it between two
/// displaced copies, subject to sum_i w_i (theta |d1|^p + (1-theta) |d2|^p) <= r^p.
///
/// Each atom's best split for a given per-unit budget is the upper concave
/// hull of its single-displacement gains over a displacement grid; the
/// budget is then spread across atoms greedily by hull slope, which is the
/// exact optimum of the discretized problem.
inline double oracle_sup_1d(const Vector& z, const Vector& w, const std::function<double(double)>& loss,
                            const WassersteinOrder& p, double r, const OracleConfig& cfg = {}) {
    if (z.size() == 0 || w.size() != z.size()) throw DataError("oracle: inconsistent atoms and weights");
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("oracle: radius must be finite and >= 0");
    if (static_cast<double>(z.size()) * (cfg.grid_points + cfg.tail_points) > cfg.max_work)
        throw DomainError("oracle: instance too large for brute force (" + std::to_string(z.size()) + " atoms)");
    double base = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) base += w(i) * loss(z(i));
    if (r == 0.0) return base;

    const double zmax = z.cwiseAbs().maxCoeff();
    if (p.is_infinite()) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            double best = loss(z(i));
            for (int k = 0; k <= cfg.grid_points; ++k) {
                const double delta = -r + 2.0 * r * k / cfg.grid_points;
                best = std::max(best, loss(z(i) + delta));
            }
            acc += w(i) * best;
        }
        return acc;
    }

    const double pv = p.value();
    const double wmin = w.minCoeff();
    if (!(wmin > 0.0)) throw DataError("oracle: weights must be positive");
    const double reach = std::pow(std::pow(r, pv) / wmin, 1.0 / pv); // all budget on one atom
    const double d1 = 2.0 * (zmax + reach) + 1e-12;
    const double tail_end = d1 * (p.is_one() ? 1e6 : 1e3);

    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(cfg.grid_points + cfg.tail_points) + static_cast<std::size_t>(z.size()) + 1);
    for (int k = 0; k <= cfg.grid_points; ++k) grid.push_back(d1 * k / cfg.grid_points);
    for (int k = 1; k <= cfg.tail_points; ++k)
        grid.push_back(d1 * std::pow(tail_end / d1, static_cast<double>(k) / cfg.tail_points));
    for (Eigen::Index i = 0; i < z.size(); ++i) grid.push_back(std::abs(z(i))); // kinks of L(z +- delta)
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<detail::HullSegment> segments;
    std::vector<double> bx(grid.size()), gy(grid.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double l0 = loss(z(i));
        for (std::size_t k = 0; k < grid.size(); ++k) {
            bx[k] = std::pow(grid[k], pv);
            gy[k] = std::max(loss(z(i) + grid[k]), loss(z(i) - grid[k])) - l0;
        }
        const auto segs = detail::concave_hull_segments(bx, gy, w(i));
        segments.insert(segments.end(), segs.begin(), segs.end());
    }
    std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) { return a.slope > b.slope; });
    double budget = std::pow(r, pv), gained = 0.0;
    for (const auto& seg : segments) {
        if (budget <= 0.0) break;
        const double used = std::min(budget, seg.length);
        gained += seg.slope * used;
        budget -= used;
    }
    return base + gained;
}

/// Oracle lower bound on the worst-case expected check loss at (beta, s).
inline double oracle_sup(const Dataset& data, const Vector& beta, double s, const ProblemSpec& spec,
                         const OracleConfig& cfg = {}) {
    spec.validate();
    data.validate();
    const Vector z = project_residuals(data, beta, s);
    const double alpha = spec.alpha;
    return oracle_sup_1d(z, Vector::Constant(z.size(), 1.0 / static_cast<double>(z.size())),
                         [alpha](double u) { return check_loss(u, alpha); }, spec.p,
                         effective_radius(spec.epsilon, beta, spec.norm), cfg);
}

// ---------------------------------------------------------------------------
// Identity audit

struct AuditLoss {
    enum class Kind { check, squared, huber };
    Kind kind = Kind::check;
    double param = 0.5; ///< alpha for the check loss, threshold for Huber

    static AuditLoss check(double alpha) { return {Kind::check, alpha}; }
    static AuditLoss squared() { return {Kind::squared, 0.0}; }
    static AuditLoss huber(double delta) { return {Kind::huber, delta}; }

    static AuditLoss parse(const std::string& text, double param) {
        if (text == "check") return check(param);
        if (text == "squared") return squared();
        if (text == "huber") return huber(param);
        throw DomainError("unsupported loss '" + text + "' (expected check|squared|huber)");
    }

    double operator()(double u) const {
        switch (kind) {
        case Kind::check: return check_loss(u, param);
        case Kind::squared: return u * u;
        case Kind::huber: {
            const double a = std::abs(u);
            return a <= param ? 0.5 * u * u : param * (a - 0.5 * param);
        }
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind) {
        case Kind::check: return "check";
        case Kind::squared: return "squared";
        case Kind::huber: return "huber";
        }
        return "?";
    }
};

struct IdentityAuditReport {
    double lhs = 0.0;        ///< worst-case risk after location adjustment, by oracle
    double nominal = 0.0;    ///< inf_s E_{G0}[L(Z - s)]
    double rhs = 0.0;        ///< nominal + c * eps (check loss), nominal otherwise
    std::optional<double> reference_c; ///< c_{alpha,p} for the check loss
    double implied_c = 0.0;  ///< (lhs - nominal) / eps, 0 when eps = 0
    double abs_diff = 0.0;   ///< |lhs - rhs|
    bool holds = false;      ///< abs_diff <= tol, meaningful when a reference c exists or eps = 0
};

/// Audits sup_{G in B_p(G0, eps)} inf_s E_G[L(Z - s)] = inf_s E_{G0}[L(Z - s)] + c eps.
///
/// The left side is evaluated as inf_s sup_G (the two agree by the minimax
/// theorem: the objective is convex in s and linear in G over a convex ball),
/// with the inner supremum from the atom-splitting oracle and the outer
/// infimum by golden-section search.
inline IdentityAuditReport identity_audit(const AuditLoss& loss, const WeightedPointCloud& g0, double epsilon,
                                          const WassersteinOrder& p, double tol = 2e-2, const OracleConfig& cfg = {}) {
    if (g0.x.cols() != 0) throw DataError("identity_audit expects a one-dimensional cloud (no covariates)");
    g0.validate();
    if (!p.is_interior()) throw DomainError("identity_audit requires p in (1, inf)");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("radius must be finite and >= 0");
    if (loss.kind == AuditLoss::Kind::squared && p.value() < 2.0 && epsilon > 0.0)
        throw DomainError("squared loss: the worst-case risk is unbounded for p < 2");
    if (loss.kind == AuditLoss::Kind::check) check_alpha(loss.param);
    if (loss.kind == AuditLoss::Kind::huber && !(loss.param > 0.0)) throw DomainError("Huber threshold must be > 0");

    const Vector& z = g0.y;
    const Vector& w = g0.weight;
    const double lo = z.minCoeff() - 4.0 * epsilon - 1.0, hi = z.maxCoeff() + 4.0 * epsilon + 1.0;
    const double xtol = 1e-9 * (1.0 + hi - lo);
    auto nominal_at = [&](double s) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) acc += w(i) * loss(z(i) - s);
        return acc;
    };
    auto worst_at = [&](double s) {
        const Vector zs = z.array() - s;
        return oracle_sup_1d(zs, w, [&loss](double u) { return loss(u); }, p, epsilon, cfg);
    };

    IdentityAuditReport rep;
    rep.nominal = detail::golden_minimize(nominal_at, lo, hi, xtol).second;
    // the minimum of a piecewise-linear nominal risk sits on an atom
    for (Eigen::Index i = 0; i < z.size(); ++i) rep.nominal = std::min(rep.nominal, nominal_at(z(i)));
    rep.lhs = detail::golden_minimize(worst_at, lo, hi, xtol, 200).second;
    if (loss.kind == AuditLoss::Kind::check) rep.reference_c = c_alpha_p(loss.param, p);
    rep.rhs = rep.nominal + (rep.reference_c ? *rep.reference_c * epsilon : 0.0);
    rep.implied_c = epsilon > 0.0 ? (rep.lhs - rep.nominal) / epsilon : 0.0;
    rep.abs_diff = std::abs(rep.lhs - rep.rhs);
    rep.holds = (rep.reference_c || epsilon == 0.0) && rep.abs_diff <= tol;
    return rep;
}

} // namespace drqr
