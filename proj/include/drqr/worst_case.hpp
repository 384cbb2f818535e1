#pragma once

// Explicit worst-case distributions: point clouds obtained by moving the
// empirical atoms in R^{d+1}, each cloud atom remembering its source atom so
// that the transport cost of the identity coupling can be reported.

#include "drqr/constants.hpp"
#include "drqr/core.hpp"
#include "drqr/robust_eval.hpp"
#include "drqr/solver.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace drqr {

struct WorstCaseReport {
    WeightedPointCloud cloud;
    std::vector<Eigen::Index> source; ///< empirical atom each cloud atom was moved from
    double transport_cost = 0.0;      ///< p-th root of the identity-coupling cost (sup for p = inf)
    double achieved_value = 0.0;      ///< expected check loss under the cloud
    double closed_form_value = 0.0;   ///< worst_case_value at the same (beta, s)
    bool attained = false;
    bool dual_direction_used = false; ///< p in (1, inf): the fallback direction was needed
    std::string note;
};

/// Transport cost between the empirical law of `data` and `cloud` under the
/// coupling that sends atom source[k] to cloud atom k.
inline double transport_cost(const Dataset& data, const WeightedPointCloud& cloud,
                             const std::vector<Eigen::Index>& source, const WassersteinOrder& p, Norm norm) {
    if (static_cast<Eigen::Index>(source.size()) != cloud.size()) throw DataError("transport_cost: source map size");
    const auto d = data.dim();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < cloud.size(); ++k) {
        const auto i = source[static_cast<std::size_t>(k)];
        Vector delta(d + 1);
        delta.head(d) = cloud.x.row(k).transpose() - data.X.row(i).transpose();
        delta(d) = cloud.y(k) - data.y(i);
        const double len = norm_value(delta, norm);
        if (p.is_infinite()) {
            if (cloud.weight(k) > 0.0) acc = std::max(acc, len);
        } else {
            acc += cloud.weight(k) * std::pow(len, p.value());
        }
    }
    return p.is_infinite() ? acc : std::pow(acc, 1.0 / p.value());
}

/// Expected check loss of y - beta'x - s under a point cloud.
inline double cloud_expected_loss(const WeightedPointCloud& cloud, const Vector& beta, double s, double alpha) {
    Vector r = cloud.y - (cloud.x.cols() > 0 ? Vector(cloud.x * beta) : Vector::Zero(cloud.size()));
    r.array() -= s;
    return weighted_check_loss(r, cloud.weight, alpha);
}

namespace detail {

struct Move {
    Eigen::Index source;
    double weight;
    double step; // signed multiple of the direction
};

inline WeightedPointCloud build_cloud(const Dataset& data, const std::vector<Move>& moves, const Vector& direction,
                                      std::vector<Eigen::Index>& source) {
    const auto d = data.dim();
    const auto m = static_cast<Eigen::Index>(moves.size());
    WeightedPointCloud cloud{Matrix(m, d), Vector(m), Vector(m)};
    source.clear();
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& mv = moves[static_cast<std::size_t>(k)];
        cloud.x.row(k) = data.X.row(mv.source) + mv.step * direction.head(d).transpose();
        cloud.y(k) = data.y(mv.source) + mv.step * direction(d);
        cloud.weight(k) = mv.weight;
        source.push_back(mv.source);
    }
    return cloud;
}

/// (-beta, 1): residual y - beta'x grows by its inner product with a displacement.
inline Vector residual_gradient(const Vector& beta) {
    Vector g(beta.size() + 1);
    g.head(beta.size()) = -beta;
    g(beta.size()) = 1.0;
    return g;
}

inline void finish_report(WorstCaseReport& rep, const Dataset& data, const Vector& beta, double s,
                          const ProblemSpec& spec) {
    rep.transport_cost = transport_cost(data, rep.cloud, rep.source, spec.p, spec.norm);
    rep.achieved_value = cloud_expected_loss(rep.cloud, beta, s, spec.alpha);
    rep.closed_form_value = worst_case_value(data, beta, s, spec).value;
}

inline bool values_match(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

} // namespace detail

/// p = 1: the atoms on the favorable side of zero are pushed by eps / pi
/// along the dual-achieving direction, pi being their empirical mass
/// ({z >= 0} upward for alpha > 1/2, {z <= 0} downward for alpha < 1/2,
/// every atom away from zero for alpha = 1/2). When pi = 0 the supremum is
/// not attained and the cloud is left empty.
inline WorstCaseReport worst_case_p1(const Dataset& data, const Vector& beta, double s, const ProblemSpec& spec) {
    spec.validate();
    data.validate();
    if (!spec.p.is_one()) throw DomainError("worst_case_p1 requires p = 1");
    const auto n = data.size();
    const Vector z = residuals(data, beta, s);
    const Vector v = dual_direction(detail::residual_gradient(beta), spec.norm);
    const double w = 1.0 / static_cast<double>(n);

    std::vector<char> moves_up(static_cast<std::size_t>(n), 0), moves_down(static_cast<std::size_t>(n), 0);
    double pi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (spec.alpha > 0.5) moves_up[k] = z(i) >= 0.0;
        else if (spec.alpha < 0.5) moves_down[k] = z(i) <= 0.0;
        else {
            moves_up[k] = z(i) >= 0.0;
            moves_down[k] = z(i) < 0.0;
        }
        if (moves_up[k] || moves_down[k]) pi += w;
    }

    WorstCaseReport rep;
    if (spec.epsilon > 0.0 && pi == 0.0) {
        rep.attained = false;
        rep.closed_form_value = worst_case_value(data, beta, s, spec).value;
        rep.achieved_value = mean_check_loss(z, spec.alpha);
        rep.note = "favorable event has zero mass: supremum not attained";
        return rep;
    }
    std::vector<detail::Move> moves;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double step = 0.0;
        if (spec.epsilon > 0.0) {
            if (moves_up[k]) step = spec.epsilon / pi;
            if (moves_down[k]) step = -spec.epsilon / pi;
        }
        moves.push_back({i, w, step});
    }
    rep.cloud = detail::build_cloud(data, moves, v, rep.source);
    detail::finish_report(rep, data, beta, s, spec);
    rep.attained = detail::values_match(rep.achieved_value, rep.closed_form_value, 1e-8);
    return rep;
}

/// p = inf: every atom moves by eps * sgn(z + (2 alpha - 1) eps ||(beta,-1)||_*)
/// along the dual-achieving direction, with sgn(0) = +1.
inline WorstCaseReport worst_case_pinf(const Dataset& data, const Vector& beta, double s, const ProblemSpec& spec) {
    spec.validate();
    data.validate();
    if (!spec.p.is_infinite()) throw DomainError("worst_case_pinf requires p = inf");
    const auto n = data.size();
    const Vector z = residuals(data, beta, s);
    const Vector v = dual_direction(detail::residual_gradient(beta), spec.norm);
    const double r = effective_radius(spec.epsilon, beta, spec.norm);
    std::vector<detail::Move> moves;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sign = z(i) + (2.0 * spec.alpha - 1.0) * r >= 0.0 ? 1.0 : -1.0;
        moves.push_back({i, 1.0 / static_cast<double>(n), sign * spec.epsilon});
    }
    WorstCaseReport rep;
    rep.cloud = detail::build_cloud(data, moves, v, rep.source);
    detail::finish_report(rep, data, beta, s, spec);
    rep.attained = detail::values_match(rep.achieved_value, rep.closed_form_value, 1e-8);
    return rep;
}

/// p in (1, inf), at an optimal fit (beta*, s*): atoms in an event A of mass
/// 1 - alpha on the upper tail of the residuals move by
/// eps c^{1-q} alpha^{q-1} along a unit direction u, the rest by
/// -eps c^{1-q} (1-alpha)^{q-1}. The atom straddling the boundary of A is
/// split in two weighted copies so that A has mass exactly 1 - alpha.
///
/// u is (-beta*, 1) normalized in the transport norm, which raises the
/// residual; for L1 and Linf this may fall short of the supremum, and the
/// construction is then repeated with the dual-achieving direction.
inline WorstCaseReport worst_case_p_finite(const Dataset& data, const ProblemSpec& spec, const FitResult& fit) {
    spec.validate();
    data.validate();
    if (!spec.p.is_interior()) throw DomainError("worst_case_p_finite requires p in (1, inf)");
    const auto n = data.size();
    const Vector& beta = fit.beta;
    const double s = fit.s_robust;
    const Vector z = residuals(data, beta, s);
    const double alpha = spec.alpha, q = spec.q();
    const double c = c_alpha_p(alpha, spec.p);
    const double up = spec.epsilon * std::pow(c, 1.0 - q) * std::pow(alpha, q - 1.0);
    const double down = spec.epsilon * std::pow(c, 1.0 - q) * std::pow(1.0 - alpha, q - 1.0);
    const double w = 1.0 / static_cast<double>(n);

    // ascending by residual, ties by index; A is filled from the top
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return z(a) < z(b); });
    std::vector<double> mass_in_a(static_cast<std::size_t>(n), 0.0);
    double remaining = 1.0 - alpha;
    for (auto it = order.rbegin(); it != order.rend() && remaining > 1e-12; ++it) {
        const double take = std::min(w, remaining);
        mass_in_a[static_cast<std::size_t>(*it)] = take;
        remaining -= take;
    }

    auto build = [&](const Vector& direction) {
        std::vector<detail::Move> moves;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double in_a = mass_in_a[static_cast<std::size_t>(i)];
            const double rest = w - in_a;
            if (in_a > 1e-15) moves.push_back({i, in_a, up});
            if (rest > 1e-15) moves.push_back({i, rest, -down});
        }
        WorstCaseReport rep;
        rep.cloud = detail::build_cloud(data, moves, direction, rep.source);
        // re-normalize weights exactly after splitting
        rep.cloud.weight /= rep.cloud.weight.sum();
        detail::finish_report(rep, data, beta, s, spec);
        rep.attained = detail::values_match(rep.achieved_value, rep.closed_form_value, 1e-6);
        return rep;
    };

    const Vector g = detail::residual_gradient(beta);
    WorstCaseReport rep = build(g / norm_value(g, spec.norm));
    if (!rep.attained && spec.norm != Norm::L2) {
        WorstCaseReport alt = build(dual_direction(g, spec.norm));
        if (alt.attained) {
            rep = alt;
            rep.dual_direction_used = true;
        }
    }
    if (!fit.converged || fit.optimality_residual > 1e-4)
        rep.note = "fit is not certified optimal; attainment check is informational";
    return rep;
}

/// Dispatches on spec.p; p in (1, inf) needs the fit, the other orders use
/// fit.beta and fit.s_robust.
inline WorstCaseReport worst_case(const Dataset& data, const ProblemSpec& spec, const FitResult& fit) {
    if (spec.p.is_one()) return worst_case_p1(data, fit.beta, fit.s_robust, spec);
    if (spec.p.is_infinite()) return worst_case_pinf(data, fit.beta, fit.s_robust, spec);
    return worst_case_p_finite(data, spec, fit);
}

} // namespace drqr
