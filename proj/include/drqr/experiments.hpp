#pragma once

// Simulation harness: synthetic linear-model data, radius grids, k-fold
// cross-validation, and the comparisons between the robust model (DR-QR),
// the regularized model with the same penalty but no intercept correction
// (R-QR) and plain empirical risk minimization (SAA).

#include "drqr/bounds.hpp"
#include "drqr/constants.hpp"
#include "drqr/core.hpp"
#include "drqr/csv.hpp"
#include "drqr/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace drqr {

// ---------------------------------------------------------------------------
// Inverse normal CDF

/// Phi^{-1}(u): Acklam's rational approximation refined by one Halley step
/// on erfc, accurate to about 1e-15 in the body of the distribution.
inline double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("inverse_normal_cdf: probability must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    const double lo = 0.02425, hi = 1.0 - lo;
    double x;
    if (u < lo) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= hi) {
        const double q = u - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
    const double step = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

// ---------------------------------------------------------------------------
// Configuration

enum class Generator { sparse02, uniform15, unitnorm };

inline std::string to_string(Generator g) {
    switch (g) {
    case Generator::sparse02: return "sparse02";
    case Generator::uniform15: return "uniform15";
    case Generator::unitnorm: return "unitnorm";
    }
    return "?";
}

inline Generator parse_generator(const std::string& text) {
    if (text == "sparse02") return Generator::sparse02;
    if (text == "uniform15") return Generator::uniform15;
    if (text == "unitnorm") return Generator::unitnorm;
    throw DomainError("unknown generator '" + text + "' (expected sparse02|uniform15|unitnorm)");
}

struct RadiusRule {
    enum class Kind { proportional, grid, theorem };
    Kind kind = Kind::proportional;
    double kappa = 1.0;          ///< proportional: eps = kappa / sqrt(N)
    std::vector<double> values;  ///< grid
    double eta = 0.1;            ///< theorem
    double m = 3.0;
    double gamma = -1.0;         ///< theorem: moment bound; < 0 estimates it from the training sample

    static RadiusRule proportional(double kappa) { return {Kind::proportional, kappa, {}, 0.1, 3.0, -1.0}; }
    static RadiusRule grid(std::vector<double> values) { return {Kind::grid, 1.0, std::move(values), 0.1, 3.0, -1.0}; }
};

/// {a 10^-b : a = 1..10, b = 1..3} u {1.1, ..., 2.0}, sorted and deduplicated.
inline std::vector<double> default_radius_grid() {
    std::vector<double> g;
    for (int b = 1; b <= 3; ++b)
        for (int a = 1; a <= 10; ++a) g.push_back(std::round(a * std::pow(10.0, 3 - b)) / 1000.0);
    for (int k = 11; k <= 20; ++k) g.push_back(k / 10.0);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }), g.end());
    return g;
}

struct ExperimentConfig {
    Generator generator = Generator::sparse02;
    int d = 30;
    double sigma = 5.0;
    double alpha = 0.7;
    WassersteinOrder p = WassersteinOrder::finite(2.0);
    Norm norm = Norm::L2;
    std::vector<int> N_grid{50};
    RadiusRule radius_rule;
    int test_size = 4000;
    int replications = 20;
    std::uint64_t seed = 0;
    int folds = 5;

    std::vector<double> alpha_grid;           ///< intercept table; defaults to {alpha}
    std::vector<WassersteinOrder> p_grid;     ///< intercept table; defaults to {p}
    int threads = 0;                          ///< 0: DRQR_THREADS or hardware concurrency
    SolverConfig solver;

    void validate() const {
        check_alpha(alpha);
        if (d < 1) throw DomainError("d must be >= 1");
        if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
        if (test_size < 1) throw DomainError("test_size must be >= 1");
        if (replications < 1) throw DomainError("replications must be >= 1");
        if (folds < 2) throw DomainError("folds must be >= 2");
        if (N_grid.empty()) throw DomainError("N_grid must not be empty");
        for (int n : N_grid)
            if (n < 1) throw DomainError("every N must be >= 1");
        if (radius_rule.kind == RadiusRule::Kind::grid && radius_rule.values.empty())
            throw DomainError("radius grid must not be empty");
        for (double e : radius_rule.values)
            if (!(e >= 0.0)) throw DomainError("radii must be >= 0");
        for (double a : alpha_grid) check_alpha(a);
        solver.validate();
    }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto order = [](const nlohmann::json& v) {
        return v.is_string() ? WassersteinOrder::parse(v.get<std::string>()) : WassersteinOrder::finite(v.get<double>());
    };
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& key = it.key();
            const auto& v = it.value();
            if (key == "generator") c.generator = parse_generator(v.get<std::string>());
            else if (key == "d") c.d = v.get<int>();
            else if (key == "sigma") c.sigma = v.get<double>();
            else if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "p") c.p = order(v);
            else if (key == "norm") c.norm = parse_norm(v.get<std::string>());
            else if (key == "N_grid") c.N_grid = v.get<std::vector<int>>();
            else if (key == "test_size") c.test_size = v.get<int>();
            else if (key == "replications") c.replications = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "folds") c.folds = v.get<int>();
            else if (key == "alpha_grid") c.alpha_grid = v.get<std::vector<double>>();
            else if (key == "p_grid") {
                c.p_grid.clear();
                for (const auto& e : v) c.p_grid.push_back(order(e));
            } else if (key == "threads") c.threads = v.get<int>();
            else if (key == "radius_rule") {
                const auto kind = v.at("kind").get<std::string>();
                if (kind == "proportional") {
                    c.radius_rule = RadiusRule::proportional(v.value("kappa", 1.0));
                } else if (kind == "grid") {
                    c.radius_rule = RadiusRule::grid(v.contains("values") ? v.at("values").get<std::vector<double>>()
                                                                          : default_radius_grid());
                } else if (kind == "theorem") {
                    c.radius_rule.kind = RadiusRule::Kind::theorem;
                    c.radius_rule.eta = v.value("eta", 0.1);
                    c.radius_rule.m = v.value("m", 3.0);
                    c.radius_rule.gamma = v.value("gamma", -1.0);
                } else {
                    throw DomainError("unknown radius rule '" + kind + "' (expected proportional|grid|theorem)");
                }
            } else if (key == "solver") {
                c.solver.tol = v.value("tol", c.solver.tol);
                c.solver.gap_tol = v.value("gap_tol", c.solver.gap_tol);
                c.solver.max_iters = v.value("max_iters", c.solver.max_iters);
                c.solver.seed = v.value("seed", c.solver.seed);
                c.solver.restarts = v.value("restarts", c.solver.restarts);
                const auto method = v.value("method", std::string("interior_point"));
                if (method == "interior_point") c.solver.method = SolverMethod::interior_point;
                else if (method == "subgradient") c.solver.method = SolverMethod::subgradient;
                else throw DomainError("unknown solver method '" + method + "'");
            } else {
                throw DomainError("unknown configuration key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid configuration: ") + e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open configuration '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid configuration: ") + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Data generation

struct Sample {
    Dataset train;
    Dataset test;
    Vector beta_true;
    double sigma = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Engine for one named stream of one replicate.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t tag) {
    return std::mt19937_64(splitmix64(splitmix64(seed ^ splitmix64(replicate)) ^ tag));
}

inline Vector draw_beta(const ExperimentConfig& cfg, std::mt19937_64& rng) {
    Vector beta = Vector::Zero(cfg.d);
    switch (cfg.generator) {
    case Generator::sparse02: {
        std::bernoulli_distribution active(0.2), positive(0.5);
        do {
            for (int j = 0; j < cfg.d; ++j) beta(j) = active(rng) ? (positive(rng) ? 1.0 : -1.0) : 0.0;
        } while ((beta.array() != 0.0).count() == 0);
        break;
    }
    case Generator::uniform15: {
        std::uniform_real_distribution<double> u(1.0, 5.0);
        for (int j = 0; j < cfg.d; ++j) beta(j) = u(rng);
        break;
    }
    case Generator::unitnorm:
        beta.setConstant(1.0 / std::sqrt(static_cast<double>(cfg.d)));
        break;
    }
    return beta;
}

inline Dataset draw_rows(int n, const Vector& beta, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Dataset data{Matrix(n, beta.size()), Vector(n)};
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < beta.size(); ++j) data.X(i, j) = gauss(rng);
        data.y(i) = data.X.row(i).dot(beta) + sigma * gauss(rng);
    }
    return data;
}

inline Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), data.dim()), Vector(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.X.row(static_cast<Eigen::Index>(k)) = data.X.row(rows[k]);
        out.y(static_cast<Eigen::Index>(k)) = data.y(rows[k]);
    }
    return out;
}

} // namespace detail

/// Training set of size N and test set for one replicate. beta_true and the
/// test set depend only on (seed, replicate); the training set also on N.
inline Sample generate(const ExperimentConfig& cfg, int N, int replicate) {
    if (N < 1) throw DomainError("N must be >= 1");
    const auto rep = static_cast<std::uint64_t>(replicate);
    auto beta_rng = detail::stream(cfg.seed, rep, 1);
    auto train_rng = detail::stream(cfg.seed, rep, 1000 + static_cast<std::uint64_t>(N));
    auto test_rng = detail::stream(cfg.seed, rep, 2);
    Sample s;
    s.beta_true = detail::draw_beta(cfg, beta_rng);
    s.sigma = cfg.sigma;
    s.train = detail::draw_rows(N, s.beta_true, cfg.sigma, train_rng);
    s.test = detail::draw_rows(cfg.test_size, s.beta_true, cfg.sigma, test_rng);
    return s;
}

/// Radii prescribed by the rule for training size N.
inline std::vector<double> radii_for(const ExperimentConfig& cfg, int N, const Dataset& train) {
    switch (cfg.radius_rule.kind) {
    case RadiusRule::Kind::proportional: return {cfg.radius_rule.kappa / std::sqrt(static_cast<double>(N))};
    case RadiusRule::Kind::grid: return cfg.radius_rule.values;
    case RadiusRule::Kind::theorem: {
        double gamma = cfg.radius_rule.gamma;
        if (gamma < 0.0) {
            gamma = 0.0;
            for (Eigen::Index i = 0; i < train.size(); ++i) {
                Vector row(train.dim() + 1);
                row(0) = train.y(i);
                row.tail(train.dim()) = train.X.row(i).transpose();
                gamma += std::pow(norm_value(row, cfg.norm), cfg.radius_rule.m);
            }
            gamma /= static_cast<double>(train.size());
        }
        return {radius_schedule(N, cfg.radius_rule.eta, cfg.alpha, cfg.radius_rule.m, gamma, train.dim()).epsilon_N};
    }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Parallel replicate loop

/// Worker count: cfg.threads if positive, else DRQR_THREADS, else the
/// hardware concurrency; never more than the number of tasks.
inline int worker_count(int requested, int tasks) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("DRQR_THREADS")) n = std::atoi(env);
    }
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::max(1, std::min(n, tasks));
}

template <typename Task>
void parallel_for(int tasks, int requested_threads, Task&& task) {
    const int workers = worker_count(requested_threads, tasks);
    if (workers == 1) {
        for (int t = 0; t < tasks; ++t) task(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int t = next++; t < tasks; t = next++) {
                try {
                    task(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Comparison of DR-QR, R-QR and SAA

struct TrialResult {
    std::string model; ///< DRQR, RQR or SAA
    double alpha = 0.0;
    std::string p;
    std::string norm;
    int N = 0;
    double epsilon = 0.0;
    double lambda = 0.0;
    int replicate = 0;
    double test_loss = 0.0;
    double intercept = 0.0;
    double beta_norm = 0.0;
    double in_sample_objective = 0.0;
    std::uint64_t seed = 0;
    std::string flags;
};

inline double test_loss(const Dataset& test, const Vector& beta, double intercept, double alpha) {
    return mean_check_loss(residuals(test, beta, intercept), alpha);
}

namespace detail {

inline ProblemSpec spec_of(double alpha, const WassersteinOrder& p, Norm norm, double eps) {
    ProblemSpec spec;
    spec.alpha = alpha;
    spec.p = p;
    spec.norm = norm;
    spec.epsilon = eps;
    return spec;
}

inline TrialResult trial(const std::string& model, const ExperimentConfig& cfg, double alpha,
                         const WassersteinOrder& p, int N, double eps, int replicate, const FitResult& fit,
                         double intercept, const Dataset& test) {
    TrialResult r;
    r.model = model;
    r.alpha = alpha;
    r.p = p.to_string();
    r.norm = std::string(to_string(cfg.norm));
    r.N = N;
    r.epsilon = eps;
    r.lambda = fit.lambda;
    r.replicate = replicate;
    r.test_loss = test_loss(test, fit.beta, intercept, alpha);
    r.intercept = intercept;
    r.beta_norm = fit.beta.norm();
    r.in_sample_objective = fit.objective;
    r.seed = cfg.seed;
    r.flags = fit.converged ? "" : "nonconverged";
    return r;
}

inline bool trial_order(const TrialResult& a, const TrialResult& b) {
    return std::tie(a.model, a.alpha, a.p, a.norm, a.N, a.epsilon, a.replicate) <
           std::tie(b.model, b.alpha, b.p, b.norm, b.N, b.epsilon, b.replicate);
}

} // namespace detail

/// Fits every (N, radius, replicate) cell. DR-QR and R-QR share one fit at
/// lambda = c_{alpha,p} eps and differ only in the intercept; SAA (eps = 0)
/// is fitted once per (N, replicate) when N >= d.
inline std::vector<TrialResult> run_comparison(const ExperimentConfig& cfg) {
    cfg.validate();
    const int tasks = static_cast<int>(cfg.N_grid.size()) * cfg.replications;
    std::vector<std::vector<TrialResult>> per_task(static_cast<std::size_t>(tasks));
    const double c = c_alpha_p(cfg.alpha, cfg.p);
    parallel_for(tasks, cfg.threads, [&](int t) {
        const int N = cfg.N_grid[static_cast<std::size_t>(t / cfg.replications)];
        const int rep = t % cfg.replications;
        const Sample sample = generate(cfg, N, rep);
        auto& out = per_task[static_cast<std::size_t>(t)];
        for (double eps : radii_for(cfg, N, sample.train)) {
            const auto spec = detail::spec_of(cfg.alpha, cfg.p, cfg.norm, eps);
            const FitResult fit = fit_regularized(sample.train, spec, c * eps, cfg.solver);
            out.push_back(detail::trial("DRQR", cfg, cfg.alpha, cfg.p, N, eps, rep, fit, fit.s_robust, sample.test));
            out.push_back(detail::trial("RQR", cfg, cfg.alpha, cfg.p, N, eps, rep, fit, fit.s_bar, sample.test));
        }
        if (N >= cfg.d) {
            const auto spec = detail::spec_of(cfg.alpha, cfg.p, cfg.norm, 0.0);
            const FitResult fit = fit_regularized(sample.train, spec, 0.0, cfg.solver);
            out.push_back(detail::trial("SAA", cfg, cfg.alpha, cfg.p, N, 0.0, rep, fit, fit.s_bar, sample.test));
        }
    });
    std::vector<TrialResult> all;
    for (auto& v : per_task) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end(), detail::trial_order);
    return all;
}

// ---------------------------------------------------------------------------
// CSV output and summaries

inline std::string fmt10(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& rows) {
    out << "model,alpha,p,norm,N,epsilon,replicate,test_loss,intercept,beta_norm,flags\n";
    for (const auto& r : rows)
        out << r.model << ',' << fmt10(r.alpha) << ',' << r.p << ',' << r.norm << ',' << r.N << ',' << fmt10(r.epsilon)
            << ',' << r.replicate << ',' << fmt10(r.test_loss) << ',' << fmt10(r.intercept) << ','
            << fmt10(r.beta_norm) << ',' << r.flags << '\n';
}

struct SummaryRow {
    std::string model;
    double alpha = 0.0;
    std::string p;
    std::string norm;
    int N = 0;
    double epsilon = 0.0;
    int count = 0;
    double mean_test_loss = 0.0;
    double sem_test_loss = 0.0;
    double q05_test_loss = 0.0;
    double q95_test_loss = 0.0;
    double mean_intercept = 0.0;
};

/// Linear-interpolation percentile of a sample (type 7).
inline double percentile(std::vector<double> v, double prob) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::vector<SummaryRow> summarize(const std::vector<TrialResult>& rows) {
    using Key = std::tuple<std::string, double, std::string, std::string, int, double>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : rows) {
        auto& g = groups[Key{r.model, r.alpha, r.p, r.norm, r.N, r.epsilon}];
        g.first.push_back(r.test_loss);
        g.second.push_back(r.intercept);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, vals] : groups) {
        SummaryRow s;
        std::tie(s.model, s.alpha, s.p, s.norm, s.N, s.epsilon) = key;
        const auto& losses = vals.first;
        s.count = static_cast<int>(losses.size());
        s.mean_test_loss = std::accumulate(losses.begin(), losses.end(), 0.0) / s.count;
        double ss = 0.0;
        for (double l : losses) ss += (l - s.mean_test_loss) * (l - s.mean_test_loss);
        s.sem_test_loss = s.count > 1 ? std::sqrt(ss / (s.count - 1)) / std::sqrt(static_cast<double>(s.count)) : 0.0;
        s.q05_test_loss = percentile(losses, 0.05);
        s.q95_test_loss = percentile(losses, 0.95);
        s.mean_intercept = std::accumulate(vals.second.begin(), vals.second.end(), 0.0) / s.count;
        out.push_back(s);
    }
    return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "model,alpha,p,norm,N,epsilon,count,mean_test_loss,sem_test_loss,q05_test_loss,q95_test_loss,mean_intercept\n";
    for (const auto& s : rows)
        out << s.model << ',' << fmt10(s.alpha) << ',' << s.p << ',' << s.norm << ',' << s.N << ',' << fmt10(s.epsilon)
            << ',' << s.count << ',' << fmt10(s.mean_test_loss) << ',' << fmt10(s.sem_test_loss) << ','
            << fmt10(s.q05_test_loss) << ',' << fmt10(s.q95_test_loss) << ',' << fmt10(s.mean_intercept) << '\n';
}

// ---------------------------------------------------------------------------
// Intercept table

struct InterceptRow {
    double alpha = 0.0;
    int N = 0;
    std::string p; ///< empty for SAA
    std::string model;
    double mean_intercept = 0.0;
    double theoretical = 0.0; ///< sigma Phi^{-1}(alpha)
    int count = 0;
};

/// Mean intercepts over replicates for every (alpha, N, p) with
/// eps = kappa / sqrt(N) (kappa from a proportional radius rule, else 1).
/// SAA rows appear only when N >= d.
inline std::vector<InterceptRow> run_intercept_table(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto alphas = cfg.alpha_grid.empty() ? std::vector<double>{cfg.alpha} : cfg.alpha_grid;
    const auto orders = cfg.p_grid.empty() ? std::vector<WassersteinOrder>{cfg.p} : cfg.p_grid;
    const double kappa = cfg.radius_rule.kind == RadiusRule::Kind::proportional ? cfg.radius_rule.kappa : 1.0;

    const int tasks = static_cast<int>(cfg.N_grid.size()) * cfg.replications;
    // per task: for each alpha: (per p: DRQR, RQR), SAA
    const std::size_t width = alphas.size() * (2 * orders.size() + 1);
    std::vector<std::vector<double>> values(static_cast<std::size_t>(tasks), std::vector<double>(width, 0.0));
    parallel_for(tasks, cfg.threads, [&](int t) {
        const int N = cfg.N_grid[static_cast<std::size_t>(t / cfg.replications)];
        const int rep = t % cfg.replications;
        const Sample sample = generate(cfg, N, rep);
        const double eps = kappa / std::sqrt(static_cast<double>(N));
        auto& row = values[static_cast<std::size_t>(t)];
        std::size_t k = 0;
        for (double a : alphas) {
            for (const auto& p : orders) {
                const auto spec = detail::spec_of(a, p, cfg.norm, eps);
                const FitResult fit = fit_dro(sample.train, spec, cfg.solver);
                row[k++] = fit.s_robust;
                row[k++] = fit.s_bar;
            }
            if (N >= cfg.d) {
                const FitResult fit = fit_regularized(sample.train, detail::spec_of(a, orders[0], cfg.norm, 0.0), 0.0, cfg.solver);
                row[k] = fit.s_bar;
            }
            ++k;
        }
    });

    std::vector<InterceptRow> out;
    for (std::size_t ni = 0; ni < cfg.N_grid.size(); ++ni) {
        const int N = cfg.N_grid[ni];
        auto mean_of = [&](std::size_t col) {
            double acc = 0.0;
            for (int rep = 0; rep < cfg.replications; ++rep)
                acc += values[ni * static_cast<std::size_t>(cfg.replications) + static_cast<std::size_t>(rep)][col];
            return acc / cfg.replications;
        };
        std::size_t k = 0;
        for (double a : alphas) {
            const double theory = cfg.sigma * inverse_normal_cdf(a);
            for (const auto& p : orders) {
                out.push_back({a, N, p.to_string(), "DRQR", mean_of(k++), theory, cfg.replications});
                out.push_back({a, N, p.to_string(), "RQR", mean_of(k++), theory, cfg.replications});
            }
            if (N >= cfg.d) out.push_back({a, N, "", "SAA", mean_of(k), theory, cfg.replications});
            ++k;
        }
    }
    return out;
}

inline void write_intercept_csv(std::ostream& out, const std::vector<InterceptRow>& rows) {
    out << "alpha,N,p,model,mean_intercept,theoretical,count\n";
    for (const auto& r : rows)
        out << fmt10(r.alpha) << ',' << r.N << ',' << r.p << ',' << r.model << ',' << fmt10(r.mean_intercept) << ','
            << fmt10(r.theoretical) << ',' << r.count << '\n';
}

// ---------------------------------------------------------------------------
// Radius study

struct RadiusStudyRow {
    int N = 0;
    double cv_radius = 0.0;     ///< mean over replicates of the k-fold CV choice
    double oracle_radius = 0.0; ///< mean over replicates of the test-loss minimizer
    double bound_radius = 0.0;  ///< smallest radius with J_oos <= J_N in >= 95% of replicates (NaN if none)
    std::vector<double> cv_radii;           ///< per replicate
    std::vector<double> validity_frequency; ///< per radius of the grid
};

/// Deterministic fold labels 0..folds-1 for n rows.
inline std::vector<int> fold_labels(int n, int folds, std::uint64_t seed, int replicate) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % folds;
    auto rng = detail::stream(seed, static_cast<std::uint64_t>(replicate), 3);
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

/// Per N: the DR-QR radius picked by k-fold cross-validation, the radius
/// minimizing test loss, and the smallest radius for which the in-sample
/// worst-case risk bounds the test loss in at least 95% of replicates.
/// Radii come from the grid rule (default grid when the rule is not a grid).
inline std::vector<RadiusStudyRow> run_radius_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto grid = cfg.radius_rule.kind == RadiusRule::Kind::grid ? cfg.radius_rule.values : default_radius_grid();
    const double c = c_alpha_p(cfg.alpha, cfg.p);
    const auto ng = static_cast<std::size_t>(grid.size());
    const int tasks = static_cast<int>(cfg.N_grid.size()) * cfg.replications;
    struct Cell {
        double cv = 0.0, oracle = 0.0;
        std::vector<char> valid;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(tasks));

    parallel_for(tasks, cfg.threads, [&](int t) {
        const int N = cfg.N_grid[static_cast<std::size_t>(t / cfg.replications)];
        const int rep = t % cfg.replications;
        const Sample sample = generate(cfg, N, rep);
        if (N < cfg.folds) throw DomainError("radius study needs N >= folds");
        const auto labels = fold_labels(N, cfg.folds, cfg.seed, rep);
        std::vector<double> cv_loss(ng, 0.0);
        for (int f = 0; f < cfg.folds; ++f) {
            std::vector<Eigen::Index> tr, va;
            for (int i = 0; i < N; ++i) (labels[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
            const Dataset train = detail::subset(sample.train, tr), valid = detail::subset(sample.train, va);
            for (std::size_t k = 0; k < ng; ++k) {
                const auto spec = detail::spec_of(cfg.alpha, cfg.p, cfg.norm, grid[k]);
                const FitResult fit = fit_regularized(train, spec, c * grid[k], cfg.solver);
                cv_loss[k] += test_loss(valid, fit.beta, fit.s_robust, cfg.alpha) * static_cast<double>(va.size());
            }
        }
        Cell cell;
        cell.valid.assign(ng, 0);
        double best_cv = std::numeric_limits<double>::infinity(), best_test = best_cv;
        for (std::size_t k = 0; k < ng; ++k) {
            const auto spec = detail::spec_of(cfg.alpha, cfg.p, cfg.norm, grid[k]);
            const FitResult fit = fit_regularized(sample.train, spec, c * grid[k], cfg.solver);
            const double j_oos = test_loss(sample.test, fit.beta, fit.s_robust, cfg.alpha);
            cell.valid[k] = j_oos <= fit.objective;
            if (cv_loss[k] < best_cv) {
                best_cv = cv_loss[k];
                cell.cv = grid[k];
            }
            if (j_oos < best_test) {
                best_test = j_oos;
                cell.oracle = grid[k];
            }
        }
        cells[static_cast<std::size_t>(t)] = std::move(cell);
    });

    std::vector<RadiusStudyRow> out;
    for (std::size_t ni = 0; ni < cfg.N_grid.size(); ++ni) {
        RadiusStudyRow row;
        row.N = cfg.N_grid[ni];
        row.validity_frequency.assign(ng, 0.0);
        for (int rep = 0; rep < cfg.replications; ++rep) {
            const auto& cell = cells[ni * static_cast<std::size_t>(cfg.replications) + static_cast<std::size_t>(rep)];
            row.cv_radius += cell.cv / cfg.replications;
            row.cv_radii.push_back(cell.cv);
            row.oracle_radius += cell.oracle / cfg.replications;
            for (std::size_t k = 0; k < ng; ++k) row.validity_frequency[k] += cell.valid[k] / static_cast<double>(cfg.replications);
        }
        row.bound_radius = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < ng; ++k)
            if (row.validity_frequency[k] >= 0.95 - 1e-12) {
                row.bound_radius = grid[k];
                break;
            }
        out.push_back(std::move(row));
    }
    return out;
}

inline void write_radius_csv(std::ostream& out, const std::vector<RadiusStudyRow>& rows) {
    out << "N,cv_radius,oracle_radius,bound_radius\n";
    for (const auto& r : rows)
        out << r.N << ',' << fmt10(r.cv_radius) << ',' << fmt10(r.oracle_radius) << ',' << fmt10(r.bound_radius) << '\n';
}

/// Least-squares slope of log(y) on log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope needs two or more points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

} // namespace drqr
