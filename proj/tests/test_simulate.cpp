#include <gtest/gtest.h>

#include <cmath>

#include "fpqc/errors.hpp"
#include "fpqc/models.hpp"
#include "fpqc/scenario.hpp"
#include "fpqc/simulate.hpp"

using namespace fpqc;

namespace {

NoiseSpec process_only(int levels, double sd) {
    NoiseSpec s;
    s.process_std = VectorXd::Constant(levels * levels, sd);
    s.process_enabled = true;
    return s;
}

ClosedLoopConfig short_spin_half(int horizon) {
    ScenarioConfig sc = *builtin_scenario("spin-half");
    sc.controller.horizon = horizon;
    return to_closed_loop(sc);
}

}  // namespace

TEST(ProcessNoise, DisabledIsExactlyZero) {
    NoiseSpec s = process_only(3, 0.2);
    s.process_enabled = false;
    Rng rng(1);
    EXPECT_EQ(sample_process_noise(s, 3, rng).cwiseAbs().maxCoeff(), 0.0);
    s = process_only(3, 0.0);
    EXPECT_EQ(sample_process_noise(s, 3, rng).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ProcessNoise, HermitianTraceFreeStructure) {
    const int l = 3;
    const NoiseSpec s = process_only(l, 0.3);
    Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const CVector z = sample_process_noise(s, l, rng);
        double sum = 0.0;
        for (int i = 0; i < l; ++i) {
            EXPECT_EQ(z(i).imag(), 0.0);
            sum += z(i).real();
        }
        EXPECT_EQ(sum, 0.0);
        for (int i = l; i < l * l; ++i) EXPECT_EQ(z(partner_slot(l, i)), std::conj(z(i)));
    }
}

TEST(ProcessNoise, ZeroMeanOverManyDraws) {
    const int l = 3;
    const double sd = 0.4;
    const int draws = 100000;
    const NoiseSpec s = process_only(l, sd);
    Rng rng(3);
    CVector total = CVector::Zero(l * l);
    for (int k = 0; k < draws; ++k) total += sample_process_noise(s, l, rng);
    const CVector mean = total / static_cast<double>(draws);
    const double bound = 3.0 * sd / std::sqrt(static_cast<double>(draws));
    for (int i = 0; i < l * l; ++i) {
        EXPECT_LE(std::abs(mean(i).real()), bound) << "slot " << i;
        EXPECT_LE(std::abs(mean(i).imag()), bound) << "slot " << i;
    }
}

TEST(ProcessNoise, RejectsWrongLength) {
    NoiseSpec s = process_only(2, 0.1);
    s.process_std = VectorXd::Constant(3, 0.1);
    Rng rng(4);
    EXPECT_THROW(sample_process_noise(s, 2, rng), ValidationError);
}

TEST(Measurement, NoiseHasRequestedSpread) {
    const ClosedLoopConfig c = short_spin_half(1);
    const BilinearGenerators gen = build_generators(c.system, vectorize(c.initial_state));
    const DiscreteModel model = discretize(gen, c.dt, measurement_row(c.observable));
    NoiseSpec s;
    s.measure_std = 0.05;
    s.measure_enabled = true;
    Rng rng(5);
    const CVector x = CVector::Zero(4);
    const int repeats = 10000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < repeats; ++k) {
        const double o = measure(x, model, gen, s, rng);
        sum += o;
        sq += o * o;
    }
    const double mean = sum / repeats;
    const double sd = std::sqrt(sq / repeats - mean * mean);
    EXPECT_NEAR(sd, 0.05, 0.05 * 0.05);
    // Noise-free reading of |-><-| against |+><+| is zero.
    EXPECT_NEAR(mean, 0.0, 3.0 * 0.05 / std::sqrt(static_cast<double>(repeats)));
}

TEST(ClosedLoop, DeterministicForFixedSeed) {
    ClosedLoopConfig c = short_spin_half(30);
    c.noise.process_std = VectorXd::Constant(4, 1e-3);
    c.noise.process_enabled = true;
    c.noise.measure_std = 1e-3;
    c.noise.measure_enabled = true;
    c.control = ControlMode::Sample;
    c.seed = 99;
    const Trajectory a = run_closed_loop(c);
    const Trajectory b = run_closed_loop(c);
    EXPECT_EQ(a.outputs, b.outputs);
    EXPECT_EQ(a.controls, b.controls);
    c.seed = 100;
    EXPECT_NE(run_closed_loop(c).controls, a.controls);
}

TEST(ClosedLoop, ZeroDipoleLeavesOutputConstant) {
    ClosedLoopConfig c = short_spin_half(40);
    c.system.dipole.setZero();
    const Trajectory t = run_closed_loop(c);
    ASSERT_EQ(t.size(), 40u);
    for (double o : t.outputs) EXPECT_NEAR(o, t.initial_output, 1e-14);
}

TEST(ClosedLoop, RejectsInvalidInitialState) {
    ClosedLoopConfig c = short_spin_half(5);
    c.initial_state *= 2.0;
    EXPECT_THROW(run_closed_loop(c), ValidationError);
}

TEST(ClosedLoop, FreeEvolutionAppliesNoControl) {
    ClosedLoopConfig c = short_spin_half(25);
    c.free_evolution = true;
    const Trajectory t = run_closed_loop(c);
    for (std::size_t k = 0; k < t.size(); ++k) {
        EXPECT_EQ(t.controls[k], 0.0);
        EXPECT_EQ(t.control_variances[k], 0.0);
    }
}

TEST(ClosedLoop, SampledControlIsCentredOnMean) {
    // Across seeds, u_t - v_t averages to zero within 3 sqrt(R_t / N).
    const int seeds = 100;
    const int horizon = 20;
    std::vector<double> diff(horizon, 0.0), var(horizon, 0.0);
    for (int s = 0; s < seeds; ++s) {
        ClosedLoopConfig c = short_spin_half(horizon);
        c.control = ControlMode::Sample;
        c.seed = 1000 + s;
        const Trajectory t = run_closed_loop(c);
        for (int k = 0; k < horizon; ++k) {
            diff[k] += t.controls[k] - t.control_means[k];
            var[k] += t.control_variances[k];
        }
    }
    for (int k = 0; k < horizon; ++k) {
        const double mean_r = var[k] / seeds;
        EXPECT_GT(mean_r, 0.0);
        EXPECT_LE(std::abs(diff[k] / seeds), 3.0 * std::sqrt(mean_r / seeds)) << "step " << k + 1;
    }
}

TEST(ClosedLoop, BeatsZeroControlOnEveryBuiltin) {
    for (const std::string& name : builtin_names()) {
        const ScenarioConfig sc = *builtin_scenario(name);
        ClosedLoopConfig c = to_closed_loop(sc);
        const Trajectory fpd = run_closed_loop(c);
        c.free_evolution = true;
        const Trajectory free = run_closed_loop(c);
        const double o_d = sc.controller.o_d;
        EXPECT_LT(std::abs(fpd.outputs.back() - o_d), std::abs(free.outputs.back() - o_d)) << name;
    }
}
