#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpqc/errors.hpp"
#include "fpqc/output.hpp"
#include "fpqc/scenario.hpp"

using namespace fpqc;
namespace fs = std::filesystem;

namespace {

Trajectory spin_half_run(int horizon) {
    ScenarioConfig sc = *builtin_scenario("spin-half");
    sc.controller.horizon = horizon;
    return run_closed_loop(to_closed_loop(sc));
}

fs::path scratch_dir(const std::string& leaf) {
    const fs::path p = fs::temp_directory_path() / ("fpqc_test_output_" + leaf);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Csv, HeaderLayout) {
    const auto h = csv_header(2);
    ASSERT_EQ(h.size(), 7u + 2u * 4u);
    EXPECT_EQ(h[0], "step");
    EXPECT_EQ(h[2], "o_t");
    EXPECT_EQ(h[6], "herm_defect");
    EXPECT_EQ(h[7], "rho_0_0_re");
    EXPECT_EQ(h[8], "rho_0_0_im");
    EXPECT_EQ(h[11], "rho_0_1_re");
    EXPECT_EQ(h[13], "rho_1_0_re");
    EXPECT_EQ(csv_header(3).size(), 7u + 2u * 9u);
}

TEST(Csv, ThreeStepRunHasHeaderPlusOneLinePerStep) {
    const std::string text = trajectory_csv(spin_half_run(3));
    int lines = 0;
    for (char ch : text) lines += ch == '\n';
    EXPECT_EQ(lines, 4);
    const CsvTable t = parse_csv(text);
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& row : t.rows) EXPECT_EQ(row.size(), 15u);
}

TEST(Csv, RoundTripIsBitExact) {
    const Trajectory traj = spin_half_run(25);
    const fs::path dir = scratch_dir("roundtrip");
    const fs::path file = dir / "nested" / "traj.csv";
    export_csv(traj, file);
    const CsvTable t = import_csv(file);
    const auto o = t.values("o_t");
    const auto u = t.values("u_t");
    const auto r = t.values("R_t");
    ASSERT_EQ(o.size(), traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        EXPECT_TRUE(same_bits(o[k], traj.outputs[k])) << k;
        EXPECT_TRUE(same_bits(u[k], traj.controls[k])) << k;
        EXPECT_TRUE(same_bits(r[k], traj.control_variances[k])) << k;
        EXPECT_TRUE(same_bits(t.values("rho_0_1_im")[k], traj.states[k](2).imag())) << k;
    }
    fs::remove_all(dir);
}

TEST(Csv, MalformedInputIsRejected) {
    EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ValidationError);
    EXPECT_THROW(parse_csv("a,b\n1,x\n"), ValidationError);
    const CsvTable t = parse_csv("a,b\n1,2\n");
    EXPECT_THROW(t.column("c"), ValidationError);
}

TEST(Plots, TwoFilesWithReferenceLine) {
    const Trajectory traj = spin_half_run(30);
    const fs::path dir = scratch_dir("plots");
    const auto files = emit_plots(traj, 1.0, dir / "spin-half", "spin-half");
    ASSERT_EQ(files.size(), 2u);
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        EXPECT_EQ(entry.path().extension(), ".svg");
        ++count;
    }
    EXPECT_EQ(count, 2);
    const std::string out = slurp(dir / "spin-half_output.svg");
    EXPECT_NE(out.find("<svg"), std::string::npos);
    EXPECT_NE(out.find("id=\"reference\""), std::string::npos);
    EXPECT_NE(out.find("reference o_d=1"), std::string::npos);
    EXPECT_NE(slurp(dir / "spin-half_control.svg").find("<svg"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Plots, MorseOutputApproachesBandMonotonicallyThenHolds) {
    const ScenarioRun run = run_scenario(*builtin_scenario("morse-lih"));
    const Trajectory& t = run.trajectory;
    ASSERT_TRUE(run.summary.steps_to_band.has_value());
    const int entry = *run.summary.steps_to_band;
    double prev = std::abs(t.initial_output - 1.0);
    for (int k = 0; k < entry; ++k) {
        const double dev = std::abs(t.outputs[k] - 1.0);
        EXPECT_LE(dev, prev + 1e-12) << "step " << k + 1;
        prev = dev;
    }
    for (std::size_t k = entry - 1; k < t.size(); ++k) EXPECT_LE(std::abs(t.outputs[k] - 1.0), 0.05);
}
