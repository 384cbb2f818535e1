// Command-line front end.
//
// Exit codes: 0 success, 1 usage or domain error, 2 data error,
// 3 solver non-convergence (partial output is still printed).

#include "drqr/drqr.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace drqr;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kSolver = 3;

std::string num(double v) { return fmt10(v); }

void print(const std::string& key, double v) { std::cout << key << " = " << num(v) << '\n'; }
void print(const std::string& key, const std::string& v) { std::cout << key << " = " << v << '\n'; }

void print_vector(const std::string& key, const Vector& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) print(key + "[" + std::to_string(j + 1) + "]", v(j));
}

ColumnRef column_ref(const std::string& text) {
    if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }))
        return static_cast<std::size_t>(std::stoul(text));
    return text;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& cell : detail::split_csv_line(text)) {
        double v = 0.0;
        if (!detail::parse_double(detail::trim(cell), v)) throw DomainError("invalid number '" + cell + "' in list");
        out.push_back(v);
    }
    return out;
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

/// Options shared by the subcommands that work on a dataset.
struct ProblemOptions {
    std::string data;
    std::string y_col = "y";
    double alpha = 0.5;
    std::string p = "2";
    std::string norm = "l2";
    double epsilon = 0.0;

    void add(CLI::App* app, bool needs_data = true) {
        auto* opt = app->add_option("--data", data, "CSV file with a header row");
        if (needs_data) opt->required();
        app->add_option("--y-col", y_col, "response column: header name or 0-based index")->capture_default_str();
        app->add_option("--alpha", alpha, "quantile level in (0,1)")->capture_default_str();
        app->add_option("--p", p, "Wasserstein order: number >= 1 or inf")->capture_default_str();
        app->add_option("--norm", norm, "transport norm: l1|l2|linf")->capture_default_str();
        app->add_option("--epsilon", epsilon, "Wasserstein radius >= 0")->capture_default_str();
    }

    ProblemSpec spec() const {
        ProblemSpec s;
        s.alpha = alpha;
        s.p = WassersteinOrder::parse(p);
        s.norm = parse_norm(norm);
        s.epsilon = epsilon;
        s.validate();
        return s;
    }

    Dataset dataset() const { return load_dataset(data, column_ref(y_col)); }
};

struct SolverOptions {
    std::string method = "interior_point";
    double tol = 1e-6;
    int max_iters = 50000;
    std::uint64_t seed = 0;

    void add(CLI::App* app) {
        app->add_option("--method", method, "interior_point|subgradient")->capture_default_str();
        app->add_option("--tol", tol, "optimality residual target")->capture_default_str();
        app->add_option("--max-iters", max_iters, "iteration cap")->capture_default_str();
        app->add_option("--seed", seed, "seed for randomized restarts")->capture_default_str();
    }

    SolverConfig config() const {
        SolverConfig c;
        if (method == "interior_point") c.method = SolverMethod::interior_point;
        else if (method == "subgradient") c.method = SolverMethod::subgradient;
        else throw DomainError("unknown solver method '" + method + "'");
        c.tol = tol;
        c.max_iters = max_iters;
        c.seed = seed;
        c.validate();
        return c;
    }
};

int report_fit(const FitResult& fit) {
    print_vector("beta", fit.beta);
    print("s_bar", fit.s_bar);
    print("s_robust", fit.s_robust);
    print("objective", fit.objective);
    print("lambda", fit.lambda);
    print("optimality_residual", fit.optimality_residual);
    print("iterations", static_cast<double>(fit.iterations));
    print("converged", fit.converged ? "true" : "false");
    if (!fit.warning.empty()) print("warning", fit.warning);
    return fit.converged ? 0 : kSolver;
}

/// name,value rows; read back by eval-sup --beta-file.
void write_fit_csv(std::ostream& out, const FitResult& fit) {
    out << "name,value\n";
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) out << "beta_" << (j + 1) << ',' << format_exact(fit.beta(j)) << '\n';
    out << "s_bar," << format_exact(fit.s_bar) << '\n';
    out << "s_robust," << format_exact(fit.s_robust) << '\n';
    out << "objective," << format_exact(fit.objective) << '\n';
    out << "lambda," << format_exact(fit.lambda) << '\n';
}

struct BetaFile {
    Vector beta;
    std::map<std::string, double> scalars;
};

BetaFile read_beta_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "name,value") throw DataError("beta file: expected a name,value header");
    std::map<int, double> betas;
    BetaFile out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 2) throw ParseError("expected name,value", row, cells.size());
        const std::string name = detail::trim(cells[0]);
        double v = 0.0;
        if (!detail::parse_double(detail::trim(cells[1]), v)) throw ParseError("non-numeric value", row, 2);
        if (name.rfind("beta_", 0) == 0) betas[std::stoi(name.substr(5))] = v;
        else out.scalars[name] = v;
    }
    out.beta.resize(static_cast<Eigen::Index>(betas.size()));
    int expected = 1;
    for (const auto& [j, v] : betas) {
        if (j != expected) throw DataError("beta file: coefficients must be numbered 1..d");
        out.beta(j - 1) = v;
        ++expected;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wasserstein distributionally robust quantile regression"};
    app.require_subcommand(1);

    // fit
    ProblemOptions fit_opt;
    SolverOptions fit_solver;
    std::optional<double> fit_lambda;
    std::string fit_out;
    auto* fit_cmd = app.add_subcommand("fit", "fit the robust quantile regression");
    fit_opt.add(fit_cmd);
    fit_solver.add(fit_cmd);
    fit_cmd->add_option("--lambda", fit_lambda, "penalty weight (default c_{alpha,p} * epsilon)");
    fit_cmd->add_option("--out", fit_out, "write beta, intercepts and objective as name,value CSV");

    // eval-sup
    ProblemOptions ev_opt;
    std::string ev_beta_file, ev_beta, ev_intercept = "robust";
    std::optional<double> ev_s;
    bool ev_oracle = false;
    auto* ev_cmd = app.add_subcommand("eval-sup", "worst-case expected check loss at fixed (beta, s)");
    ev_opt.add(ev_cmd);
    ev_cmd->add_option("--beta-file", ev_beta_file, "name,value CSV written by fit --out");
    ev_cmd->add_option("--beta", ev_beta, "comma-separated coefficients");
    ev_cmd->add_option("--s", ev_s, "intercept (overrides the beta file)");
    ev_cmd->add_option("--intercept", ev_intercept, "intercept taken from the beta file: robust|bar")->capture_default_str();
    ev_cmd->add_flag("--oracle", ev_oracle, "also report the atom-splitting oracle lower bound");

    // worst-case
    ProblemOptions wc_opt;
    SolverOptions wc_solver;
    std::string wc_out;
    auto* wc_cmd = app.add_subcommand("worst-case", "fit, then build a worst-case distribution");
    wc_opt.add(wc_cmd);
    wc_solver.add(wc_cmd);
    wc_cmd->add_option("--out", wc_out, "write the point cloud as weight,x_1..x_d,y CSV");

    // radius
    long long rd_n = 0;
    double rd_eta = 0.1, rd_alpha = 0.5, rd_m = 3.0, rd_gamma = 1.0;
    long long rd_d = 1;
    auto* rd_cmd = app.add_subcommand("radius", "finite-sample radius schedule eps_N(eta)");
    rd_cmd->add_option("--n", rd_n, "sample size")->required();
    rd_cmd->add_option("--eta", rd_eta, "confidence parameter in (0,1)")->capture_default_str();
    rd_cmd->add_option("--alpha", rd_alpha, "quantile level")->capture_default_str();
    rd_cmd->add_option("--m", rd_m, "moment order > 2")->capture_default_str();
    rd_cmd->add_option("--gamma", rd_gamma, "moment bound E||(Y,X)||^m")->capture_default_str();
    rd_cmd->add_option("--d", rd_d, "covariate dimension")->capture_default_str();

    // fixed-design
    ProblemOptions fd_opt;
    std::string fd_target, fd_out;
    double fd_eta = 0.1, fd_m = 3.0;
    std::optional<double> fd_gamma0;
    auto* fd_cmd = app.add_subcommand("fixed-design", "OLS slope, robust residual quantile and radius terms");
    fd_opt.add(fd_cmd);
    fd_cmd->add_option("--target", fd_target, "comma-separated query covariate c (default: column means)");
    fd_cmd->add_option("--eta", fd_eta, "confidence parameter in (0,1)")->capture_default_str();
    fd_cmd->add_option("--m", fd_m, "moment order > 2")->capture_default_str();
    fd_cmd->add_option("--gamma0", fd_gamma0, "noise moment bound E|e|^m (default: from OLS residuals)");
    fd_cmd->add_option("--out", fd_out, "write residuals and leverages as CSV");

    // experiment
    std::string ex_config, ex_kind = "comparison", ex_out;
    std::optional<std::uint64_t> ex_seed;
    std::optional<int> ex_threads;
    auto* ex_cmd = app.add_subcommand("experiment", "run a simulation study from a JSON configuration");
    ex_cmd->add_option("--config", ex_config, "JSON configuration file")->required();
    ex_cmd->add_option("--kind", ex_kind, "comparison|intercept|radius")->capture_default_str();
    ex_cmd->add_option("--out", ex_out, "output prefix for CSV files");
    ex_cmd->add_option("--seed", ex_seed, "override the configured seed");
    ex_cmd->add_option("--threads", ex_threads, "override the worker count");

    // identity-audit
    std::string ia_z, ia_weights, ia_loss = "check", ia_p = "2";
    double ia_param = 0.5, ia_eps = 0.1;
    auto* ia_cmd = app.add_subcommand("identity-audit", "check the additive worst-case identity on a 1-d law");
    ia_cmd->add_option("--z", ia_z, "comma-separated atoms")->required();
    ia_cmd->add_option("--weights", ia_weights, "comma-separated probabilities (default uniform)");
    ia_cmd->add_option("--loss", ia_loss, "check|squared|huber")->capture_default_str();
    ia_cmd->add_option("--param", ia_param, "alpha for check, threshold for huber")->capture_default_str();
    ia_cmd->add_option("--p", ia_p, "Wasserstein order in (1,inf)")->capture_default_str();
    ia_cmd->add_option("--epsilon", ia_eps, "radius")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*fit_cmd) {
            const auto spec = fit_opt.spec();
            const auto data = fit_opt.dataset();
            const auto cfg = fit_solver.config();
            const FitResult fit = fit_lambda ? fit_regularized(data, spec, *fit_lambda, cfg) : fit_dro(data, spec, cfg);
            const int code = report_fit(fit);
            if (!fit_out.empty()) {
                auto out = open_out(fit_out);
                write_fit_csv(out, fit);
            }
            return code;
        }
        if (*ev_cmd) {
            const auto spec = ev_opt.spec();
            const auto data = ev_opt.dataset();
            Vector beta;
            double s = 0.0;
            if (!ev_beta_file.empty()) {
                const BetaFile bf = read_beta_file(ev_beta_file);
                beta = bf.beta;
                const std::string key = ev_intercept == "bar" ? "s_bar" : "s_robust";
                if (ev_intercept != "bar" && ev_intercept != "robust")
                    throw DomainError("--intercept must be robust or bar");
                if (auto it = bf.scalars.find(key); it != bf.scalars.end()) s = it->second;
            } else if (!ev_beta.empty()) {
                beta = to_vector(parse_list(ev_beta));
            } else {
                throw DomainError("eval-sup needs --beta-file or --beta");
            }
            if (ev_s) s = *ev_s;
            const auto res = worst_case_value(data, beta, s, spec);
            print("value", res.value);
            if (res.lambda_opt) print("lambda_opt", *res.lambda_opt);
            print("attained", res.attained ? "true" : "false");
            if (ev_oracle) print("oracle_lower_bound", oracle_sup(data, beta, s, spec));
            return 0;
        }
        if (*wc_cmd) {
            const auto spec = wc_opt.spec();
            const auto data = wc_opt.dataset();
            const FitResult fit = fit_dro(data, spec, wc_solver.config());
            const auto rep = worst_case(data, spec, fit);
            print("objective", fit.objective);
            print("transport_cost", rep.transport_cost);
            print("achieved_value", rep.achieved_value);
            print("closed_form_value", rep.closed_form_value);
            print("attained", rep.attained ? "true" : "false");
            print("atoms", static_cast<double>(rep.cloud.size()));
            if (rep.dual_direction_used) print("direction", "dual");
            if (!rep.note.empty()) print("note", rep.note);
            if (!wc_out.empty()) {
                auto out = open_out(wc_out);
                write_cloud_csv(out, rep.cloud);
            }
            return fit.converged ? 0 : kSolver;
        }
        if (*rd_cmd) {
            const auto rep = radius_schedule(rd_n, rd_eta, rd_alpha, rd_m, rd_gamma, rd_d);
            print("epsilon_N", rep.epsilon_N);
            print("c_alpha", rep.c_alpha_const);
            return 0;
        }
        if (*fd_cmd) {
            const auto spec = fd_opt.spec();
            const auto data = fd_opt.dataset();
            const Vector target = fd_target.empty() ? Vector(data.X.colwise().mean().transpose())
                                                    : to_vector(parse_list(fd_target));
            const auto fit = fixed_design_dro(data, spec, target);
            const double gamma0 = fd_gamma0 ? *fd_gamma0 : gamma0_estimate(fit.residuals_z, fd_m);
            const auto radii = fixed_design_radii(data, fd_eta, spec.alpha, fd_m, gamma0, target);
            print_vector("beta_ols", fit.beta_ols);
            print("s_bar", fit.s_bar);
            print("s_robust", fit.s_robust);
            print("objective", fit.objective);
            print("quantile_prediction", target.dot(fit.beta_ols) + fit.s_robust);
            print("hat_trace", fit.hat_diagonals.sum());
            print("gamma0", gamma0);
            print("eps1", radii.eps1);
            print("eps2", radii.eps2);
            print("eps3", radii.eps3);
            print("radius_total", radii.total);
            if (!fd_out.empty()) {
                auto out = open_out(fd_out);
                out << "residual,leverage\n";
                for (Eigen::Index i = 0; i < fit.residuals_z.size(); ++i)
                    out << format_exact(fit.residuals_z(i)) << ',' << format_exact(fit.hat_diagonals(i)) << '\n';
            }
            return 0;
        }
        if (*ex_cmd) {
            ExperimentConfig cfg = load_config(ex_config);
            if (ex_seed) cfg.seed = *ex_seed;
            if (ex_threads) cfg.threads = *ex_threads;
            const std::string prefix = ex_out.empty() ? std::string() : ex_out;
            if (ex_kind == "comparison") {
                const auto trials = run_comparison(cfg);
                const auto summary = summarize(trials);
                write_summary_csv(std::cout, summary);
                if (!prefix.empty()) {
                    auto long_out = open_out(prefix + "_long.csv");
                    write_trials_csv(long_out, trials);
                    auto sum_out = open_out(prefix + "_summary.csv");
                    write_summary_csv(sum_out, summary);
                }
                const bool all_converged =
                    std::all_of(trials.begin(), trials.end(), [](const TrialResult& t) { return t.flags.empty(); });
                return all_converged ? 0 : kSolver;
            }
            if (ex_kind == "intercept") {
                const auto rows = run_intercept_table(cfg);
                write_intercept_csv(std::cout, rows);
                if (!prefix.empty()) {
                    auto out = open_out(prefix + "_intercept.csv");
                    write_intercept_csv(out, rows);
                }
                return 0;
            }
            if (ex_kind == "radius") {
                const auto rows = run_radius_study(cfg);
                write_radius_csv(std::cout, rows);
                if (!prefix.empty()) {
                    auto out = open_out(prefix + "_radius.csv");
                    write_radius_csv(out, rows);
                }
                return 0;
            }
            throw DomainError("unknown experiment kind '" + ex_kind + "' (expected comparison|intercept|radius)");
        }
        if (*ia_cmd) {
            const Vector z = to_vector(parse_list(ia_z));
            const Vector w = ia_weights.empty() ? Vector(Vector::Constant(z.size(), 1.0 / static_cast<double>(z.size())))
                                                : to_vector(parse_list(ia_weights));
            if (w.size() != z.size()) throw DomainError("--weights must have one entry per atom");
            const WeightedPointCloud g0{Matrix(z.size(), 0), z, w};
            const auto rep = identity_audit(AuditLoss::parse(ia_loss, ia_param), g0, ia_eps, WassersteinOrder::parse(ia_p));
            print("lhs", rep.lhs);
            print("nominal", rep.nominal);
            print("rhs", rep.rhs);
            if (rep.reference_c) print("reference_c", *rep.reference_c);
            print("implied_c", rep.implied_c);
            print("abs_diff", rep.abs_diff);
            print("holds", rep.holds ? "true" : "false");
            return 0;
        }
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    }
    return 0;
}
