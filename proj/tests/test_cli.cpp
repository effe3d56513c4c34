#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jlab/cli/app.hpp"

namespace fs = std::filesystem;
using namespace jlab;

namespace {

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::path(JLAB_TEST_TMP) / ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write_config(const std::string& body) {
    const auto p = dir_ / "exp.conf";
    std::ofstream(p) << "map_file = " << (fs::path(JLAB_CONFIG_DIR) / "z2.json").string() << '\n' << body;
    return p;
  }

  int run(std::vector<std::string> args) {
    log_.str("");
    err_.str("");
    return cli::run(args, log_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
  }

  fs::path dir_;
  std::ostringstream log_, err_;
};

} // namespace

TEST_F(CliTest, NegativeRadiusIsConfigError) {
  const auto conf = write_config("schedule.r0 = -0.5\n");
  EXPECT_EQ(run({"sample", "--config", conf.string(), "--out", (dir_ / "o").string()}), 2);
  EXPECT_NE(err_.str().find("schedule.r0"), std::string::npos) << err_.str();
}

TEST_F(CliTest, UnknownKeyIsConfigError) {
  const auto conf = write_config("sampler.cuont = 10\n");
  EXPECT_EQ(run({"sample", "--config", conf.string(), "--out", (dir_ / "o").string()}), 2);
  EXPECT_NE(err_.str().find("unknown key 'sampler.cuont'"), std::string::npos) << err_.str();
}

TEST_F(CliTest, OtherConfigErrors) {
  const auto conf = write_config("sampler.count = 1000\n");
  const auto out = (dir_ / "o").string();
  EXPECT_EQ(run({"bogus", "--config", conf.string(), "--out", out}), 2);
  EXPECT_EQ(run({"sample", "--config", (dir_ / "missing.conf").string(), "--out", out}), 2);
  EXPECT_EQ(run({"sample", "--config", conf.string(), "--set", "sampler.count"}), 2);
  EXPECT_EQ(run({"sample", "--config", conf.string(), "--workers", "0", "--out", out}), 2);
  EXPECT_EQ(run({"sample", "--config", write_config("sampler.count = 10\nsampler.count = 20\n").string(), "--out", out}),
            2);
  EXPECT_EQ(run({"sample", "--config", write_config("map = {\"numerator\": [[0,0],[0,0],[1,0]], \"denominator\": "
                                                    "[[1,0]]}\n")
                                           .string(),
                 "--out", out}),
            2);
}

TEST_F(CliTest, OracleNeedsPowerMap) {
  const auto p = dir_ / "c.conf";
  std::ofstream(p) << "map_file = " << (fs::path(JLAB_CONFIG_DIR) / "z2_plus_005.json").string() << '\n';
  EXPECT_EQ(run({"oracle", "--config", p.string(), "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, NumericFailureExitCode) {
  // The pressure of z^2 stays positive on [0, 0.5]: no root to bracket.
  const auto conf = write_config("thermo.period_n = 8\nthermo.s_hi = 0.5\nsampler.count = 1000\n");
  EXPECT_EQ(run({"dimension", "--config", conf.string(), "--out", (dir_ / "o").string()}), 3);
  EXPECT_NE(err_.str().find("does not change sign"), std::string::npos) << err_.str();
}

TEST_F(CliTest, DimensionOfCubeMap) {
  const auto p = dir_ / "z3.conf";
  std::ofstream(p) << "map_file = " << (fs::path(JLAB_CONFIG_DIR) / "z3.json").string() << '\n'
                   << "sampler.count = 20000\nthermo.period_n = 6\ncheck.bowen_min = 0.98\ncheck.bowen_max = 1.02\n";
  const auto out = dir_ / "o";
  ASSERT_EQ(run({"dimension", "--config", p.string(), "--out", out.string()}), 0) << err_.str();
  const auto report = nlohmann::json::parse(slurp(out / "dimension.json"));
  EXPECT_TRUE(report["pass"].get<bool>());
  EXPECT_NEAR(report["results"]["bowen"]["s"].get<double>(), 1.0, 0.02);
  EXPECT_TRUE(fs::exists(out / "pressure.csv"));
  EXPECT_EQ(slurp(out / "pressure.csv").substr(0, 6), "s,P_n\n");
}

TEST_F(CliTest, SeedOverrideAndDeterminism) {
  const auto conf = write_config("sampler.count = 5000\nsampler.seed = 1\n");
  const auto a = dir_ / "a", b = dir_ / "b", c = dir_ / "c";
  ASSERT_EQ(run({"sample", "--config", conf.string(), "--out", a.string(), "--workers", "1"}), 0);
  ASSERT_EQ(run({"sample", "--config", conf.string(), "--out", b.string(), "--workers", "3"}), 0);
  ASSERT_EQ(run({"sample", "--config", conf.string(), "--out", c.string(), "--seed", "2"}), 0);
  EXPECT_EQ(slurp(a / "sample.csv"), slurp(b / "sample.csv"));
  EXPECT_EQ(slurp(a / "sample.json"), slurp(b / "sample.json"));
  EXPECT_NE(slurp(a / "sample.csv"), slurp(c / "sample.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(c / "sample.json"))["seed"], 2);
}

TEST_F(CliTest, CheckFailureExitCode) {
  const auto conf = write_config("sampler.count = 1000\ncheck.lambda_min = 5\n");
  EXPECT_EQ(run({"sample", "--config", conf.string(), "--out", (dir_ / "o").string()}), 1);
}
