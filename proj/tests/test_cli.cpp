#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef DRQR_CLI_PATH
#error "DRQR_CLI_PATH must point at the command-line binary"
#endif

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DRQR_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::map<std::string, std::string> parse(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "drqr_cli_" + name; }

std::string write_data() {
    const std::string path = temp_path("data.csv");
    std::ofstream out(path);
    out << "x1,y,x2\n";
    unsigned state = 7;
    auto next = [&] {
        state = state * 1103515245u + 12345u;
        return static_cast<double>((state >> 8) % 10000) / 5000.0 - 1.0;
    };
    for (int i = 0; i < 25; ++i) {
        const double a = next(), b = next();
        out << a << ',' << 1 + 2 * a - b + next() << ',' << b << '\n';
    }
    return path;
}

} // namespace

TEST(Cli, FitPrintsResultsAtTenDigits) {
    const auto data = write_data();
    const auto r = run("fit --data " + data + " --y-col y --alpha 0.7 --p 2 --norm l2 --epsilon 0.1");
    EXPECT_EQ(r.code, 0);
    const auto kv = parse(r.out);
    for (const char* key : {"beta[1]", "beta[2]", "s_bar", "s_robust", "objective"}) EXPECT_TRUE(kv.count(key)) << key;
    const auto& obj = kv.at("objective");
    EXPECT_LE(obj.size(), 16u);
}

TEST(Cli, FitThenEvalSupRoundTrip) {
    const auto data = write_data();
    for (const std::string p : {"1", "1.5", "2", "inf"})
        for (const std::string norm : {"l1", "l2", "linf"}) {
            const auto file = temp_path("fit.csv");
            const std::string common = " --data " + data + " --alpha 0.3 --p " + p + " --norm " + norm + " --epsilon 0.2";
            const auto fit = run("fit" + common + " --out " + file);
            ASSERT_EQ(fit.code, 0);
            std::ifstream in(file);
            std::string line;
            double objective = 0;
            while (std::getline(in, line))
                if (line.rfind("objective,", 0) == 0) objective = std::stod(line.substr(10));
            const auto ev = run("eval-sup" + common + " --beta-file " + file);
            ASSERT_EQ(ev.code, 0);
            EXPECT_NEAR(std::stod(parse(ev.out).at("value")), objective, 1e-9) << p << ' ' << norm;
        }
}

TEST(Cli, RadiusSubcommand) {
    const auto r = run("radius --n 100 --eta 0.1 --alpha 0.7 --m 3 --gamma 1 --d 5");
    EXPECT_EQ(r.code, 0);
    const auto kv = parse(r.out);
    EXPECT_TRUE(kv.count("epsilon_N"));
    EXPECT_TRUE(kv.count("c_alpha"));
}

TEST(Cli, ExitCodes) {
    const auto data = write_data();
    EXPECT_EQ(run("fit --data " + data + " --alpha 1.5").code, 1);
    EXPECT_EQ(run("fit --data " + data + " --bogus 3").code, 1);
    EXPECT_EQ(run("fit --data " + data + " --p 0.5").code, 1);
    EXPECT_EQ(run("fit --data " + data + " --norm l3").code, 1);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("fit --data /nonexistent.csv").code, 2);
    EXPECT_EQ(run("fit --data " + data + " --y-col nope").code, 2);
    EXPECT_EQ(run("fit --data " + data + " --max-iters 1 --method subgradient --tol 1e-12").code, 3);
    EXPECT_EQ(run("radius --n 10 --m 2").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, WorstCaseWritesCloud) {
    const auto data = write_data();
    const auto cloud = temp_path("cloud.csv");
    const auto r = run("worst-case --data " + data + " --alpha 0.7 --p 2 --epsilon 0.1 --out " + cloud);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(parse(r.out).at("attained"), "true");
    std::ifstream in(cloud);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "weight,x_1,x_2,y");
}

TEST(Cli, FixedDesignAndIdentityAudit) {
    const auto data = write_data();
    const auto fd = run("fixed-design --data " + data + " --alpha 0.7 --p 1 --epsilon 0.3 --target 1,0");
    EXPECT_EQ(fd.code, 0);
    const auto kv = parse(fd.out);
    EXPECT_EQ(kv.at("s_bar"), kv.at("s_robust"));
    EXPECT_EQ(kv.at("hat_trace"), "2");
    const auto ia = run("identity-audit --z 0,1,3 --param 0.7 --p 2 --epsilon 0.2");
    EXPECT_EQ(ia.code, 0);
    EXPECT_EQ(parse(ia.out).at("holds"), "true");
}

TEST(Cli, ExperimentSeedReproducible) {
    const auto cfg = temp_path("cfg.json");
    {
        std::ofstream out(cfg);
        out << R"({"generator": "sparse02", "d": 3, "sigma": 1, "alpha": 0.7, "N_grid": [12],
                   "radius_rule": {"kind": "grid", "values": [0.05, 0.2]}, "test_size": 50,
                   "replications": 2})";
    }
    const auto a = run("experiment --config " + cfg + " --seed 4 --out " + temp_path("a"));
    const auto b = run("experiment --config " + cfg + " --seed 4 --out " + temp_path("b"));
    const auto c = run("experiment --config " + cfg + " --seed 5");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    std::ifstream la(temp_path("a_long.csv")), lb(temp_path("b_long.csv"));
    std::stringstream sa, sb;
    sa << la.rdbuf();
    sb << lb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_FALSE(sa.str().empty());
}
