#pragma once

// Domain types shared by every part of the library: problem specification,
// datasets, transport-norm geometry, the check loss and empirical quantiles.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a parameter lies outside its mathematical domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an iterative routine cannot produce a usable answer.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Transport norm

/// Norm used as the ground cost on R^{d+1}.
enum class Norm { L1, L2, Linf };

inline std::string_view to_string(Norm norm) {
    switch (norm) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
    }
    return "?";
}

inline Norm parse_norm(std::string_view text) {
    if (text == "l1" || text == "L1" || text == "1") return Norm::L1;
    if (text == "l2" || text == "L2" || text == "2") return Norm::L2;
    if (text == "linf" || text == "Linf" || text == "inf") return Norm::Linf;
    throw DomainError("unknown norm '" + std::string(text) + "' (expected l1|l2|linf)");
}

/// The norm whose unit ball is polar to that of `norm`.
constexpr Norm dual_of(Norm norm) {
    switch (norm) {
    case Norm::L1: return Norm::Linf;
    case Norm::Linf: return Norm::L1;
    case Norm::L2: return Norm::L2;
    }
    return Norm::L2;
}

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* what) {
    if (!v.allFinite()) throw DataError(std::string(what) + ": non-finite entry");
}

} // namespace detail

/// Primal norm ||v|| for the given tag.
template <typename Derived>
double norm_value(const Eigen::MatrixBase<Derived>& v, Norm norm) {
    detail::require_finite(v, "norm_value");
    if (v.size() == 0) return 0.0;
    switch (norm) {
    case Norm::L1: return v.template lpNorm<1>();
    case Norm::L2: return v.norm();
    case Norm::Linf: return v.template lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

/// Dual norm ||v||_* = sup{ w'v : ||w|| <= 1 }.
template <typename Derived>
double dual_norm(const Eigen::MatrixBase<Derived>& v, Norm norm) {
    return norm_value(v, dual_of(norm));
}

/// Unit vector w (in the primal norm) with v'w = ||v||_*.
///
/// Tie-breaking is deterministic: the smallest index attaining max |v_j| for
/// the L1 primal norm, and sign(0) = +1 for the Linf primal norm.
template <typename Derived>
Vector dual_direction(const Eigen::MatrixBase<Derived>& v, Norm norm) {
    detail::require_finite(v, "dual_direction");
    if (v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0)
        throw DomainError("dual_direction: undefined direction for the zero vector");
    Vector w = Vector::Zero(v.size());
    switch (norm) {
    case Norm::L1: {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < v.size(); ++j)
            if (std::abs(v(j)) > std::abs(v(best))) best = j;
        w(best) = v(best) > 0 ? 1.0 : -1.0;
        break;
    }
    case Norm::L2:
        w = v / v.norm();
        break;
    case Norm::Linf:
        for (Eigen::Index j = 0; j < v.size(); ++j) w(j) = v(j) >= 0 ? 1.0 : -1.0;
        break;
    }
    return w;
}

/// (beta, -1): the coefficient vector acting on the stacked point (x, y).
inline Vector augmented(const Vector& beta) {
    Vector out(beta.size() + 1);
    out.head(beta.size()) = beta;
    out(beta.size()) = -1.0;
    return out;
}

/// ||(beta, -1)||_*, which equals ||(-beta, 1)||_* by symmetry of norms.
inline double augmented_dual_norm(const Vector& beta, Norm norm) {
    return dual_norm(augmented(beta), norm);
}

// ---------------------------------------------------------------------------
// Wasserstein order

/// Order p of the Wasserstein distance; p = infinity is a distinct state
/// rather than a large float.
class WassersteinOrder {
public:
    static WassersteinOrder finite(double p) {
        if (!(p >= 1.0) || !std::isfinite(p))
            throw DomainError("Wasserstein order must be a finite number >= 1 (use infinity() for p = inf)");
        return WassersteinOrder(p, false);
    }
    static WassersteinOrder infinity() { return WassersteinOrder(0.0, true); }

    /// Accepts "inf"/"infinity" or a decimal number >= 1.
    static WassersteinOrder parse(std::string_view text) {
        if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(std::string(text), &used);
        } catch (const std::exception&) {
            throw DomainError("invalid Wasserstein order '" + std::string(text) + "'");
        }
        if (used != text.size()) throw DomainError("invalid Wasserstein order '" + std::string(text) + "'");
        if (std::isinf(value)) return infinity();
        return finite(value);
    }

    bool is_infinite() const { return infinite_; }
    bool is_one() const { return !infinite_ && p_ == 1.0; }
    /// True for p in (1, inf).
    bool is_interior() const { return !infinite_ && p_ > 1.0; }

    /// Finite value of p; +inf when infinite.
    double value() const { return infinite_ ? std::numeric_limits<double>::infinity() : p_; }

    /// Hoelder conjugate q with 1/p + 1/q = 1 (q = inf for p = 1, q = 1 for p = inf).
    double conjugate() const {
        if (infinite_) return 1.0;
        if (p_ == 1.0) return std::numeric_limits<double>::infinity();
        return p_ / (p_ - 1.0);
    }

    std::string to_string() const {
        if (infinite_) return "inf";
        std::string s = std::to_string(p_);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    friend bool operator==(const WassersteinOrder& a, const WassersteinOrder& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.p_ == b.p_);
    }

private:
    WassersteinOrder(double p, bool infinite) : p_(p), infinite_(infinite) {}
    double p_;
    bool infinite_;
};

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("quantile level alpha must lie in (0,1)");
}

/// Quantile level, Wasserstein order, transport norm and radius.
struct ProblemSpec {
    double alpha = 0.5;
    WassersteinOrder p = WassersteinOrder::finite(1.0);
    Norm norm = Norm::L2;
    double epsilon = 0.0;

    double q() const { return p.conjugate(); }

    void validate() const {
        check_alpha(alpha);
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("radius epsilon must be finite and >= 0");
        if (p.is_interior()) {
            const double pv = p.value(), qv = q();
            if (std::abs(1.0 / pv + 1.0 / qv - 1.0) > 1e-12) throw DomainError("inconsistent Hoelder conjugate");
        }
    }
};

// ---------------------------------------------------------------------------
// Data

/// Covariates X (N x d) and responses y (N); the empirical reference law.
struct Dataset {
    Matrix X;
    Vector y;

    Eigen::Index size() const { return y.size(); }
    Eigen::Index dim() const { return X.cols(); }

    void validate() const {
        if (y.size() < 1) throw DataError("dataset is empty");
        if (X.rows() != y.size()) throw DataError("row count of X does not match length of y");
        if (!X.allFinite() || !y.allFinite()) throw DataError("dataset contains non-finite entries");
    }
};

/// Finite discrete law on R^{d+1}; each point is stored as (x, y).
struct WeightedPointCloud {
    Matrix x;      // one row per atom
    Vector y;
    Vector weight; // probabilities

    Eigen::Index size() const { return weight.size(); }

    void validate() const {
        if (x.rows() != y.size() || y.size() != weight.size()) throw DataError("point cloud: inconsistent sizes");
        if (!x.allFinite() || !y.allFinite()) throw DataError("point cloud: non-finite point");
        if ((weight.array() < 0.0).any()) throw DataError("point cloud: negative weight");
        if (std::abs(weight.sum() - 1.0) > 1e-12) throw DataError("point cloud: weights do not sum to one");
    }

    static WeightedPointCloud empirical(const Dataset& data) {
        const auto n = data.size();
        return {data.X, data.y, Vector::Constant(n, 1.0 / static_cast<double>(n))};
    }
};

// ---------------------------------------------------------------------------
// Check loss and quantiles

/// l_alpha(u) = u (alpha - 1{u < 0}).
inline double check_loss(double u, double alpha) {
    return u >= 0.0 ? alpha * u : (alpha - 1.0) * u;
}

/// Mean check loss of the residuals `r - shift`.
template <typename Derived>
double mean_check_loss(const Eigen::MatrixBase<Derived>& r, double alpha, double shift = 0.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += check_loss(r(i) - shift, alpha);
    return acc / static_cast<double>(r.size());
}

/// Weighted mean check loss.
inline double weighted_check_loss(const Vector& r, const Vector& w, double alpha, double shift = 0.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += w(i) * check_loss(r(i) - shift, alpha);
    return acc;
}

/// 1-based rank k of the left-continuous alpha-quantile inf{t : F(t) >= alpha}
/// of n equally weighted atoms.
inline std::size_t quantile_rank(std::size_t n, double alpha) {
    check_alpha(alpha);
    // The slack absorbs rounding of alpha * n when it is an integer.
    const double target = alpha * static_cast<double>(n) - 1e-9;
    auto k = static_cast<std::size_t>(std::ceil(target));
    return std::clamp<std::size_t>(k, 1, n);
}

/// Left-continuous empirical alpha-quantile.
template <typename Derived>
double empirical_quantile(const Eigen::MatrixBase<Derived>& values, double alpha) {
    if (values.size() == 0) throw DataError("empirical_quantile: empty sample");
    std::vector<double> v(values.derived().data(), values.derived().data() + values.size());
    const std::size_t k = quantile_rank(v.size(), alpha);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
    return v[k - 1];
}

inline double empirical_quantile(const std::vector<double>& values, double alpha) {
    return empirical_quantile(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())), alpha);
}

/// Residuals y - X beta - s.
inline Vector residuals(const Dataset& data, const Vector& beta, double s = 0.0) {
    if (beta.size() != data.dim()) throw DataError("coefficient dimension does not match the data");
    Vector r = data.y - data.X * beta;
    r.array() -= s;
    return r;
}

} // namespace drqr
