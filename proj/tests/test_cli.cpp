#include <pwlv/cli.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, std::string* output = nullptr) {
    const std::string cmd = std::string(PWLV_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return -1;
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    if (output) *output = out;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> data_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> rows;
    bool past_columns = false;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (!past_columns) {
            past_columns = true;
            continue;
        }
        rows.push_back(line);
    }
    return rows;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pwlv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateCaseOneWritesGrid) {
    ASSERT_EQ(run("simulate --preset case1 --seed 1 --out " + dir_.string()), 0);
    const auto rows = data_rows(dir_ / "timeseries.csv");
    EXPECT_EQ(rows.size(), 1001u);
    EXPECT_EQ(data_rows(dir_ / "phase.csv").size(), 1001u);
    EXPECT_EQ(rows.front(), "0,1,2,0");
    EXPECT_EQ(rows.back().substr(0, 3), "10,");
    EXPECT_EQ(slurp(dir_ / "timeseries.csv").find('\r'), std::string::npos);
}

TEST_F(CliTest, HeaderReproducesRun) {
    ASSERT_EQ(run("simulate --preset case2 --seed 31 --r 1.2 --out " + dir_.string()), 0);
    const auto cfg = pwlv::config_from_csv(dir_ / "timeseries.csv");
    EXPECT_EQ(cfg.seed, 31u);
    EXPECT_DOUBLE_EQ(cfg.params.r, 1.2);
    const auto text = slurp(dir_ / "timeseries.csv");
    EXPECT_NE(text.find("# csv_schema_version: 1"), std::string::npos);
    EXPECT_NE(text.find("# noise: "), std::string::npos);
    EXPECT_NE(text.find("convention"), std::string::npos);

    // Re-running from the recovered config gives the same bytes.
    const auto traj = pwlv::solve_piecewise(cfg.params, cfg.schedule, cfg.initial, cfg.seed);
    EXPECT_EQ(pwlv::timeseries_csv(cfg, traj), text);
}

TEST_F(CliTest, SameSeedIsByteIdentical) {
    ASSERT_EQ(run("simulate --preset case1 --seed 5 --out " + (dir_ / "a").string()), 0);
    ASSERT_EQ(run("simulate --preset case1 --seed 5 --out " + (dir_ / "b").string()), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "timeseries.csv"), slurp(dir_ / "b" / "timeseries.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "phase.csv"), slurp(dir_ / "b" / "phase.csv"));
    ASSERT_EQ(run("simulate --preset case1 --seed 6 --out " + (dir_ / "c").string()), 0);
    EXPECT_NE(data_rows(dir_ / "a" / "timeseries.csv"), data_rows(dir_ / "c" / "timeseries.csv"));
}

TEST_F(CliTest, ClassicalLimitMatchesAb3) {
    ASSERT_EQ(run("simulate --preset case1 --sigma1 0 --sigma2 0 --delta 1 --out " + dir_.string()), 0);
    const auto rows = data_rows(dir_ / "timeseries.csv");
    const pwlv::LotkaVolterraParams p{1.0, 2.0, 1.0, 1.5, 1.0, 0.0, 0.0};
    const auto ref = pwlv::classical_segment([&](const pwlv::State& s) { return pwlv::drift(p, s); }, {1.0, 2.0},
                                             1000, 0.01);
    ASSERT_EQ(rows.size(), ref.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double t, x, y;
        int seg;
        ASSERT_EQ(std::sscanf(rows[i].c_str(), "%lf,%lf,%lf,%d", &t, &x, &y, &seg), 4);
        EXPECT_NEAR(x, ref[i].x, 1e-8);
        EXPECT_NEAR(y, ref[i].y, 1e-8);
    }
}

TEST_F(CliTest, EnsembleWritesOneFilePerSeed) {
    std::string out;
    ASSERT_EQ(run("simulate --preset case3 --seed 10 --ensemble 3 --out " + dir_.string(), &out), 0);
    for (int s : {10, 11, 12}) {
        EXPECT_TRUE(fs::exists(dir_ / ("timeseries_seed" + std::to_string(s) + ".csv")));
        EXPECT_TRUE(fs::exists(dir_ / ("phase_seed" + std::to_string(s) + ".csv")));
    }
    // Member 11 equals a single run with seed 11.
    ASSERT_EQ(run("simulate --preset case3 --seed 11 --out " + (dir_ / "single").string()), 0);
    EXPECT_EQ(slurp(dir_ / "timeseries_seed11.csv"), slurp(dir_ / "single" / "timeseries.csv"));
}

TEST_F(CliTest, DivergenceLeavesNoFiles) {
    std::string out;
    EXPECT_EQ(run("simulate --preset case1 --r 200 --lambda1 0 --lambda2 0 --sigma1 0 --sigma2 0 --out " +
                      dir_.string(),
                  &out),
              3)
        << out;
    EXPECT_FALSE(fs::exists(dir_ / "timeseries.csv"));
    EXPECT_FALSE(fs::exists(dir_ / "phase.csv"));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
    std::string out;
    EXPECT_EQ(run("simulate --lambda1 -1 --out " + dir_.string(), &out), 2);
    EXPECT_NE(out.find("lambda1"), std::string::npos);
    EXPECT_EQ(run("simulate --preset nope", &out), 2);
    EXPECT_EQ(run("simulate --unknown-flag", &out), 2);
    EXPECT_EQ(run("uniqueness --a 1 --b -1", &out), 2);
    EXPECT_EQ(run("", &out), 2);
}

TEST_F(CliTest, ConfigFileAndFlags) {
    fs::create_directories(dir_);
    {
        std::ofstream cfg(dir_ / "run.json");
        cfg << R"({"preset":"case1","seed":4,"schedule":{"P":5}})";
    }
    ASSERT_EQ(run("simulate --config " + (dir_ / "run.json").string() + " --h 0.005 --out " + dir_.string()), 0);
    EXPECT_EQ(data_rows(dir_ / "timeseries.csv").size(), 1001u);
    const auto cfg = pwlv::config_from_csv(dir_ / "phase.csv");
    EXPECT_EQ(cfg.seed, 4u);
    EXPECT_DOUBLE_EQ(cfg.schedule.step(), 0.005);
}

TEST_F(CliTest, EquilibriaReport) {
    std::string out;
    ASSERT_EQ(run("equilibria --preset case1", &out), 0);
    EXPECT_NE(out.find("origin,0,0,1,-1,Saddle,no,yes"), std::string::npos) << out;
    EXPECT_NE(out.find("prey-only,0.5,0"), std::string::npos);
    EXPECT_NE(out.find("coexistence"), std::string::npos);
    EXPECT_NE(out.find(",no\n"), std::string::npos);  // interior infeasible

    ASSERT_EQ(run("equilibria --preset case1 --lambda1 0", &out), 0);
    EXPECT_EQ(out.find("prey-only,"), std::string::npos);
    EXPECT_NE(out.find("# omitted:"), std::string::npos);
}

TEST_F(CliTest, UniquenessReport) {
    std::string out;
    ASSERT_EQ(run("uniqueness --k 0.3", &out), 0);
    EXPECT_NE(out.find("k,0.29999999999999999,0.306"), std::string::npos) << out;
    EXPECT_NE(out.find("holds"), std::string::npos);
    ASSERT_EQ(run("uniqueness --k 0.21", &out), 0);
    EXPECT_NE(out.find(",0.214"), std::string::npos) << out;
    ASSERT_EQ(run("uniqueness --k 2 --delta 0.95 --T 1", &out), 0);
    EXPECT_NE(out.find("fails"), std::string::npos);
    ASSERT_EQ(run("uniqueness --preset lipschitz-predator", &out), 0);
    EXPECT_NE(out.find("k2,0.21"), std::string::npos) << out;
}

TEST_F(CliTest, VerifyPassesAndDetectsPerturbation) {
    std::string out;
    EXPECT_EQ(run("verify", &out), 0);
    EXPECT_EQ(out.find("[FAIL]"), std::string::npos) << out;
    for (const char* d : {"delta=0.50", "delta=0.80", "delta=0.95"}) EXPECT_NE(out.find(d), std::string::npos);
    EXPECT_EQ(run("verify --perturb-weights 1e-4", &out), 4);
    EXPECT_NE(out.find("[FAIL] weights vs quadrature"), std::string::npos);
}

TEST_F(CliTest, ListPresets) {
    std::string out;
    ASSERT_EQ(run("--list-presets", &out), 0);
    EXPECT_NE(out.find("case2-chaotic-0.89"), std::string::npos);
}
