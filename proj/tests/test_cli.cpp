#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "usrt/commands.hpp"

using namespace usrt;

namespace {

std::string write_file(const std::string& name, const std::string& text) {
    const std::string path = testing::TempDir() + name;
    std::ofstream(path) << text;
    return path;
}

std::string pairs_csv(std::size_t n, std::size_t negatives) {
    std::ostringstream os;
    os << "treated,control\n";
    for (std::size_t i = 0; i < n; ++i) {
        const double d = 0.1 * double(i + 1);
        os << (i < negatives ? 0.0 : d) << "," << (i < negatives ? d : 0.0) << "\n";
    }
    return os.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const RunConfig& cfg) {
    std::ostringstream out, err;
    const int code = run_command(cfg, "", out, err);
    return {code, out.str(), err.str()};
}

RunConfig config(const std::string& sub, const std::string& input = "") {
    RunConfig c;
    c.subcommand = sub;
    c.input = input;
    return c;
}

// Runs the built executable and returns its exit status and stdout.
Run exec(const std::string& args) {
    const std::string err_path = testing::TempDir() + "cli_stderr.txt";
    const std::string cmd = std::string(USRT_CLI_PATH) + " " + args + " 2>" + err_path;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t k = fread(buf, 1, sizeof buf, pipe)) out.append(buf, k);
    const int status = pclose(pipe);
    std::ifstream e(err_path);
    std::stringstream es;
    es << e.rdbuf();
    return {WEXITSTATUS(status), out, es.str()};
}

} // namespace

TEST(Cli, TestReportsDecisionAndDigest) {
    auto c = config("test", write_file("pos.csv", pairs_csv(40, 2)));
    c.gamma = 2;
    c.x0 = 0.333;
    const auto r = run(c);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_TRUE(j["result"]["reject"].is_boolean());
    EXPECT_EQ(j["config"]["gamma"], 2.0);
    EXPECT_EQ(j["config"]["score"], "sign");
    EXPECT_EQ(j["config"]["kind"], "uniform");
    EXPECT_EQ(j["input_digest"]["n_pairs"], 40);
    EXPECT_EQ(j["input_digest"]["positives"], 38);
}

TEST(Cli, ExitCodes) {
    auto missing = config("test", write_file("bad.csv", "a,b\n1,2\n"));
    const auto r = run(missing);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("'y'"), std::string::npos);
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
    EXPECT_TRUE(nlohmann::json::accept(r.err));

    EXPECT_EQ(run(config("test", testing::TempDir() + "nope.csv")).code, 2);

    auto low = config("test", write_file("ok.csv", pairs_csv(10, 0)));
    low.gamma = 0.5;
    EXPECT_EQ(run(low).code, 3);

    auto score = config("design");
    score.score = "foo";
    EXPECT_EQ(run(score).code, 3);

    auto reps = config("power");
    reps.reps = 0;
    EXPECT_EQ(run(reps).code, 3);

    auto exact = config("test", write_file("ok.csv", pairs_csv(10, 0)));
    exact.kind = "fixed";
    exact.score = "wilcoxon";
    exact.method = "exact_sign";
    EXPECT_EQ(run(exact).code, 3);
}

TEST(Cli, GammaReplayAndDeterminism) {
    const auto path = write_file("strong.csv", pairs_csv(100, 0));
    auto c = config("gamma", path);
    const auto a = run(c);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(run(c).out, a.out);
    const auto j = nlohmann::json::parse(a.out);
    const double hat = j["result"]["gamma_hat"];
    EXPECT_GT(hat, 1.0);
    EXPECT_TRUE(j["result"]["monotone_ok"].get<bool>());
    EXPECT_EQ(j["result"]["status"], "ok");

    auto replay = config("test", path);
    replay.gamma = j["result"]["bracket_lo"];
    EXPECT_TRUE(nlohmann::json::parse(run(replay).out)["result"]["reject"].get<bool>());
    replay.gamma = j["result"]["bracket_hi"];
    EXPECT_FALSE(nlohmann::json::parse(run(replay).out)["result"]["reject"].get<bool>());
}

TEST(Cli, GammaSentinelForNegativeData) {
    const auto r = run(config("gamma", write_file("neg.csv", pairs_csv(30, 30))));
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["result"]["status"], "no_rejection_at_gamma_1");
    EXPECT_FALSE(j["result"]["rejects_at_one"].get<bool>());
}

TEST(Cli, DesignCurveEndpoint) {
    auto c = config("design");
    c.x_points = 12;
    const auto r = run(c);
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line, last, pi_fixed_line;
    while (std::getline(in, line)) {
        if (line.rfind("# pi_fixed=", 0) == 0) pi_fixed_line = line.substr(11);
        last = line;
    }
    ASSERT_FALSE(pi_fixed_line.empty());
    EXPECT_EQ(last.substr(0, 2), "1,");
    EXPECT_EQ(last.substr(2, pi_fixed_line.size()), pi_fixed_line);
    EXPECT_NEAR(std::stod(pi_fixed_line), 0.6914625, 1e-7);

    auto rare = config("design");
    rare.dist = "rare:normal,1,0.1,5";
    rare.x_points = 4;
    const auto rr = run(rare);
    ASSERT_EQ(rr.code, 0) << rr.err;
    EXPECT_NE(rr.out.find("# dist=rare:normal,1,0.10000000000000001,5"), std::string::npos);
}

TEST(Cli, PowerSingleCellAndSeed) {
    auto c = config("power");
    c.n_values = {50};
    c.reps = 200;
    c.seed = 42;
    const auto a = run(c);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(run(c).out, a.out);
    std::istringstream in(a.out);
    std::string line;
    std::vector<std::string> data;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') data.push_back(line);
    }
    ASSERT_EQ(data.size(), 2u);
    EXPECT_EQ(data[0], "score,dist,test,n,gamma,power,mc_se,seed");
    EXPECT_EQ(data[1].rfind("sign,\"normal:0.5,1\",uniform,50,1,", 0), 0u);
    EXPECT_EQ(data[1].substr(data[1].size() - 3), ",42");
}

TEST(Cli, PowerSummaryJson) {
    auto c = config("power");
    c.n_values = {30};
    c.reps = 50;
    c.summary = testing::TempDir() + "summary.json";
    ASSERT_EQ(run(c).code, 0);
    std::ifstream in(c.summary);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["cells"].size(), 1u);
    EXPECT_TRUE(j.contains("wall_clock_seconds"));
    EXPECT_EQ(j["config"]["reps"], 50);
}

TEST(Cli, TieOrderInvarianceOfReport) {
    const std::string a = "y\n1\n-1\n2\n2\n-2\n3\n0\n4\n-4\n4\n";
    const std::string b = "y\n-1\n1\n-2\n2\n2\n3\n0\n4\n4\n-4\n";
    // same path for both so the echoed input name matches
    const auto c = config("test", write_file("tie.csv", a));
    const auto ra = run(c);
    write_file("tie.csv", b);
    const auto rb = run(c);
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_TRUE(nlohmann::json::parse(ra.out)["result"]["starred"].get<bool>());
}

TEST(Cli, ExecutableEndToEnd) {
    const auto path = write_file("exe.csv", pairs_csv(25, 3));
    const auto ok = exec("test --input " + path + " --score wilcoxon --gamma 1.2 --kind fixed");
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_EQ(nlohmann::json::parse(ok.out)["config"]["method"], "normal_approx");
    EXPECT_EQ(exec("test --input " + path + " --gamma 0.5").code, 3);
    EXPECT_EQ(exec("test --input " + path + " --gamma abc").code, 3);
    EXPECT_EQ(exec("test").code, 3);
    EXPECT_EQ(exec("design --score foo").code, 3);
    EXPECT_EQ(exec("power --reps 0").code, 3);
    const auto bad = exec("test --input " + write_file("exe_bad.csv", "treated\n1\n"));
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("control"), std::string::npos);
    const auto pw = exec("power --n 20,40 --gammas 1,2 --tests uniform,fixed --scores 'sign;normal' --reps 20");
    EXPECT_EQ(pw.code, 0) << pw.err;
    EXPECT_EQ(std::count(pw.out.begin(), pw.out.end(), '\n'), 12 + 1 + 16);
}
