// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ouevolve/commands.hpp"
#include "ouevolve/errors.hpp"

using namespace ouevolve;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ouevolve_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_config(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "ou-evolve");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static std::vector<std::vector<double>> csv(const fs::path& p) {
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line)) {
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            rows.push_back(row);
        }
        return rows;
    }

    fs::path dir_;
};

const char* kHeat = R"({
  "coefficients": {"family": "heat", "dim": 1},
  "geometry": {"box": [-16, 16]},
  "grid": {"h": 0.0625},
  "initial": {"kind": "gaussian_bump", "center": [0.0], "width": 1.0},
  "times": {"s": 0.25, "t": 1.0}
})";

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
    const RunConfig cfg = parse_config(nlohmann::json::object());
    EXPECT_EQ(cfg.coefficients.family, "heat");
    EXPECT_EQ(cfg.scheme.k_max, 3);
    const RunConfig again = parse_config(nlohmann::json::parse(to_json(cfg).dump()));
    EXPECT_EQ(to_json(again).dump(), to_json(cfg).dump());
}

TEST(Config, FieldLevelMessages) {
    auto message = [](const char* text) {
        try {
            parse_config(nlohmann::json::parse(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("accepted");
    };
    EXPECT_NE(message(R"({"scheme": {"theta": 0.2}})").find("scheme.theta"), std::string::npos);
    EXPECT_NE(message(R"({"grid": {"hh": 0.1}})").find("grid.hh: unknown field"), std::string::npos);
    EXPECT_NE(message(R"({"coefficients": {"sigma": "x"}})").find("coefficients.sigma"), std::string::npos);
    EXPECT_NE(message(R"({"coefficients": {"family": "rotation"}})").find("coefficients.dim"), std::string::npos);
    EXPECT_NE(message(R"({"coefficients": {"family": "scalar_commuting", "a": "2*"}})").find("coefficients.a"),
              std::string::npos);
    EXPECT_NE(message(R"({"geometry": {"kind": "interval_complement", "R": 0.5}})").find("geometry.R"),
              std::string::npos);
    EXPECT_NE(message(R"({"times": {"s": 2, "t": 1}})").find("times.t"), std::string::npos);
    EXPECT_NE(message(R"({"initial": {"kind": "smoothed_indicator"}})").find("initial.a"), std::string::npos);
    EXPECT_EQ(message(R"({"seed": 5})"), "accepted");
}

TEST(Config, MuAboveTheScannedMinimumRejected) {
    const RunConfig heat = parse_config(nlohmann::json::parse(R"({"coefficients": {"mu": 1.5}})"));
    EXPECT_THROW(build_coefficients(heat), ConfigError);
    const RunConfig custom = parse_config(nlohmann::json::parse(
        R"j({"coefficients": {"family": "custom", "Q": [["1 + 0.5*sin(t)"]], "mu": 0.9}, "times": {"t": 6}})j"));
    EXPECT_THROW(build_coefficients(custom), ConfigError);
}

TEST_F(CliTest, PropagatorHeatCovarianceIsTheGap) {
    ASSERT_EQ(run({"propagator", "--config", write_config("c.json", kHeat), "--out", (dir_ / "o").string()}), 0);
    const auto rows = csv(dir_ / "o" / "Q_ts.csv");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0][2], 0.75, 1e-12);
    EXPECT_TRUE(fs::exists(dir_ / "o" / "propagator.json"));
    EXPECT_TRUE(fs::exists(dir_ / "o" / "metadata.json"));
}

TEST_F(CliTest, PropagatorRotationCovarianceIsGapTimesIdentity) {
    const auto cfg = write_config("c.json", R"({"coefficients": {"family": "rotation", "dim": 2, "omega": "1 + t"},
        "times": {"s": 0.5, "t": 0.75}})");
    ASSERT_EQ(run({"propagator", "--config", cfg, "--out", (dir_ / "o").string()}), 0);
    for (const auto& r : csv(dir_ / "o" / "Q_ts.csv")) EXPECT_NEAR(r[2], r[0] == r[1] ? 0.25 : 0.0, 1e-10);
}

TEST_F(CliTest, BadMuExitsWithConfigCode) {
    const auto cfg = write_config("c.json", R"({"coefficients": {"family": "heat", "mu": 2}})");
    EXPECT_EQ(run({"propagator", "--config", cfg, "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, UsageErrorsExitWithConfigCode) {
    const auto cfg = write_config("c.json", kHeat);
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"evolve"}), 2);
    EXPECT_EQ(run({"evolve", "--config", (dir_ / "missing.json").string()}), 2);
    EXPECT_EQ(run({"verify", "--config", cfg, "--suite", "", "--out", (dir_ / "o").string()}), 2);
    EXPECT_EQ(run({"evolve", "--config", cfg, "--system", "torus", "--out", (dir_ / "o").string()}), 2);
    EXPECT_EQ(run({"evolve", "--config", cfg, "--system", "exterior", "--out", (dir_ / "o").string()}), 2);
    EXPECT_EQ(run({"evolve", "--config", write_config("bad.json", "{ not json"), "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, ReversedTimesExitWithConfigCode) {
    const auto cfg = write_config("c.json", R"({"times": {"s": 1.0, "t": 0.5}})");
    EXPECT_EQ(run({"evolve", "--config", cfg, "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, EvolveZeroDataGivesZeroCsv) {
    const auto cfg = write_config("c.json", R"({"geometry": {"box": [-8, 8]}, "initial": {"kind": "zero"}})");
    for (const std::string system : {"wholespace", "bounded"}) {
        ASSERT_EQ(run({"evolve", "--config", cfg, "--system", system, "--out", (dir_ / system).string()}), 0);
        for (const auto& r : csv(dir_ / system / "solution.csv")) EXPECT_EQ(r[1], 0.0);
    }
}

TEST_F(CliTest, EvolveHeatGaussianProfile) {
    ASSERT_EQ(run({"evolve", "--config", write_config("c.json", kHeat), "--out", (dir_ / "o").string()}), 0);
    const double var = 1.0 + 0.75;
    for (const auto& r : csv(dir_ / "o" / "solution.csv"))
        EXPECT_NEAR(r[1], std::exp(-0.5 * r[0] * r[0] / var) / std::sqrt(2.0 * std::numbers::pi * var), 1e-10);
    EXPECT_TRUE(fs::exists(dir_ / "o" / "initial.csv"));
    const auto diag = nlohmann::json::parse(slurp(dir_ / "o" / "diagnostics.json"));
    EXPECT_EQ(diag["system"], "wholespace");
}

TEST_F(CliTest, ExteriorRunAttachesPicardDiagnostics) {
    const auto cfg = write_config("c.json", R"({
      "geometry": {"kind": "interval_complement", "obstacle_radius": 1, "R": 2, "box": [-12, 12]},
      "grid": {"h": 0.0625},
      "initial": {"kind": "smoothed_indicator", "a": [3.9], "b": [4.5], "ramp": 0.4},
      "times": {"s": 0.0, "t": 0.25},
      "scheme": {"dt": 0.015625}})");
    ASSERT_EQ(run({"evolve", "--config", cfg, "--system", "exterior", "--out", (dir_ / "o").string()}), 0);
    const auto diag = nlohmann::json::parse(slurp(dir_ / "o" / "diagnostics.json"));
    const auto& p = diag["picard"];
    EXPECT_EQ(p["term_norms"].size(), 4u);
    EXPECT_EQ(p["tail_bound"].size(), 3u);
    EXPECT_EQ(p["truncation_k"], 3);
    EXPECT_TRUE(p.contains("est_series_error"));
    EXPECT_FALSE(diag.contains("wall_time_s"));
}

TEST_F(CliTest, VerifyRatesOnHeat) {
    const auto cfg = write_config("c.json", R"({
      "geometry": {"box": [-16, 16]}, "grid": {"h": 0.0078125},
      "verify": {"widths": [0.01, 1.0], "family_size": 16, "rate_tol": 0.05, "gradient_tol": 0.1}})");
    ASSERT_EQ(run({"verify", "--config", cfg, "--suite", "rates", "--out", (dir_ / "o").string()}), 0);
    const auto rep = nlohmann::json::parse(slurp(dir_ / "o" / "verify.json"));
    EXPECT_TRUE(rep["pass"].get<bool>());
    EXPECT_NEAR(rep["checks"][0]["measured"].get<double>(), -0.125, 0.05);
    EXPECT_EQ(csv(dir_ / "o" / "rates_wholespace_lq.csv").size(), 10u);
}

TEST_F(CliTest, VerifyFailureExitsWithOne) {
    // A grid far too coarse for the narrowest bumps spoils the gradient rate.
    const auto cfg = write_config("c.json", R"({
      "geometry": {"box": [-16, 16]}, "grid": {"h": 0.25},
      "verify": {"widths": [0.01, 1.0], "family_size": 8, "rate_tol": 0.01, "gradient_tol": 0.01}})");
    EXPECT_EQ(run({"verify", "--config", cfg, "--suite", "rates", "--out", (dir_ / "o").string()}), 1);
}

TEST_F(CliTest, VerifyReportsAreByteIdentical) {
    const auto cfg = write_config("c.json", R"({"verify": {"mc_paths": 20000}, "seed": 11})");
    ASSERT_EQ(run({"verify", "--config", cfg, "--suite", "lemma32", "--out", (dir_ / "a").string()}), 0);
    ASSERT_EQ(run({"verify", "--config", cfg, "--suite", "lemma32", "--out", (dir_ / "b").string()}), 0);
    ASSERT_EQ(run({"verify", "--config", cfg, "--suite", "montecarlo", "--out", (dir_ / "c").string()}), 0);
    ASSERT_EQ(run({"verify", "--config", cfg, "--suite", "montecarlo", "--out", (dir_ / "d").string()}), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "verify.json"), slurp(dir_ / "b" / "verify.json"));
    EXPECT_EQ(slurp(dir_ / "c" / "verify.json"), slurp(dir_ / "d" / "verify.json"));
}
