#include "pcca/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace pcca;

namespace {

std::string fixture_path(const std::string& name) { return std::string(PCCA_SCENARIO_DIR) + "/" + name; }

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("pcca_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Digest, StableAndSensitive) {
    const auto s = load_scenario_file(fixture_path("example1.ini"));
    const auto d = scenario_digest(s);
    EXPECT_EQ(d.size(), 16u);
    EXPECT_EQ(d, scenario_digest(load_scenario(save_scenario(s))));
    auto t = s;
    t.dt = 0.025;
    EXPECT_NE(d, scenario_digest(t));
}

TEST(TraceCsv, HeaderLayout) {
    const auto cols = trace_csv_header(3, all_pairs(3));
    EXPECT_EQ(cols.front(), "time_s");
    EXPECT_EQ(cols[1], "a1_x");
    EXPECT_EQ(cols[18], "a3_uy");
    EXPECT_EQ(cols[19], "h_1_2");
    EXPECT_EQ(cols[20], "hr0_1_2");
    EXPECT_EQ(cols[24], "hr0_2_3");
    EXPECT_EQ(cols.back(), "brake_3");
}

// Barrier columns recomputed from the written positions agree with the recorded ones.
TEST(TraceCsv, ReplayReproducesBarrier) {
    const auto s = load_scenario_file(fixture_path("centralized_crossing.ini"));
    std::stringstream ss;
    write_trace_csv(ss, run_scenario(s));
    const auto table = read_csv(ss);
    EXPECT_EQ(table.rows.size(), s.steps() + 1);
    EXPECT_LE(replay_barrier_deviation(table, s.barrier.r), 1e-12 * 100.0 * 100.0);
}

TEST(TraceCsv, ByteIdenticalAcrossRuns) {
    const auto s = load_scenario_file(fixture_path("example1_perturbed.ini"));
    std::stringstream a, b;
    write_trace_csv(a, run_scenario(s));
    write_trace_csv(b, run_scenario(s));
    EXPECT_EQ(a.str(), b.str());
}

TEST(TraceCsv, ReadRejectsRaggedRows) {
    std::stringstream ss("a,b\n1,2\n3\n");
    EXPECT_THROW(read_csv(ss), ParseError);
}

TEST(Cli, RunWritesOutputs) {
    const auto dir = scratch_dir("run");
    RunFlags flags;
    flags.out_dir = dir;
    flags.assert_no_collision = true;
    flags.assert_estimate_identity = true;
    flags.svg = true;
    const auto report = cmd_run(fixture_path("example1.ini"), flags);
    EXPECT_TRUE(report.all_passed());
    ASSERT_EQ(report.assertions.size(), 2u);
    for (const char* f : {"trace.csv", "metrics.json", "trajectory.svg", "barrier.svg"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    const auto j = nlohmann::json::parse(slurp(dir / "metrics.json"));
    EXPECT_EQ(j["scenario_digest"], report.scenario_digest);
    EXPECT_TRUE(j.contains("metrics"));
    EXPECT_NE(slurp(dir / "trajectory.svg").find("<svg"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Cli, EstimateIdentityNeedsPccaPair) {
    const auto dir = scratch_dir("pursuit");
    RunFlags flags;
    flags.out_dir = dir;
    flags.assert_estimate_identity = true;
    flags.assert_no_collision = true;
    const auto report = cmd_run(fixture_path("example2_no_margin.ini"), flags);
    EXPECT_FALSE(report.all_passed());
    for (const auto& a : report.assertions) EXPECT_FALSE(a.passed) << a.name;
    std::filesystem::remove_all(dir);
}

TEST(Cli, SweepValidatesArguments) {
    const auto dir = scratch_dir("sweep");
    EXPECT_THROW(cmd_sweep(fixture_path("example2_no_margin.ini"), {}, dir), UsageError);
    EXPECT_THROW(cmd_sweep(fixture_path("example2_no_margin.ini"), {0.05, 0.0}, dir), UsageError);
    EXPECT_THROW(cmd_sweep(fixture_path("missing.ini"), {0.05}, dir), Error);
}

TEST(Cli, SweepWritesCsv) {
    const auto dir = scratch_dir("sweep_ok");
    const auto report = cmd_sweep(fixture_path("example2_no_margin.ini"), {0.05, 0.02}, dir);
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_GT(report.margin_ratio(), 1.0);
    std::ifstream in(dir / "sweep.csv");
    const auto table = read_csv(in);
    EXPECT_EQ(table.header.front(), "dt_s");
    EXPECT_EQ(table.rows.size(), 2u);
    std::filesystem::remove_all(dir);
}
