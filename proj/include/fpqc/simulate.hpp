#pragma once

// Closed-loop runs: measure, solve for the control law, apply, propagate.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fpqc/control.hpp"
#include "fpqc/dynamics.hpp"
#include "fpqc/state.hpp"

namespace fpqc {

using Rng = std::mt19937_64;

struct NoiseSpec {
    VectorXd process_std;  // per vectorized slot; a coherence pair uses the upper slot's value
    double measure_std = 0.0;
    std::uint64_t seed = 0;
    bool process_enabled = false;
    bool measure_enabled = false;

    bool process_active() const { return process_enabled && process_std.size() > 0 && process_std.cwiseAbs().maxCoeff() > 0.0; }
    bool measure_active() const { return measure_enabled && measure_std > 0.0; }
    void validate(int levels) const;
};

// Draw with the structure of a Hermitian perturbation: real populations summing
// to exactly zero and exactly conjugate coherence pairs.
CVector sample_process_noise(const NoiseSpec& spec, int levels, Rng& rng);
CVector sample_process_noise(const NoiseSpec& spec, int levels);

// One update of the shifted state x = x~ - x_e.
CVector step(const CVector& x_shifted, double u, const DiscreteModel& model, const BilinearGenerators& gen,
             const NoiseSpec& spec, Rng& rng, PlantMode plant = PlantMode::ZeroOrderHold);

// D (x + x_e) + sigma.
double measure(const CVector& x_shifted, const DiscreteModel& model, const BilinearGenerators& gen,
               const NoiseSpec& spec, Rng& rng);

enum class ControlMode {
    Mean,    // u = v
    Sample,  // u ~ N(v, R)
};

enum class RiccatiMode {
    SteadyState,  // fixed point of the recursion for the current (A, B, D)
    Backward,     // H - t backward steps from a zero terminal index
};

struct ClosedLoopConfig {
    PhysicalSystem system;
    CMatrix observable;
    CMatrix initial_state;
    std::optional<CVector> equilibrium;  // defaults to the vectorized initial state
    ControllerConfig controller;
    double dt = 0.0;
    NoiseSpec noise;
    PlantMode plant = PlantMode::Exact;
    ControlMode control = ControlMode::Mean;
    RiccatiMode riccati = RiccatiMode::SteadyState;
    SteadyOptions steady;
    // Carry M, P from one step to the next as the starting point of the iteration.
    bool warm_start = true;
    // At a state where the law has no authority (v = u_r, R = Omega exactly) draw
    // u once from N(v, R) instead of applying the mean.
    bool explore_without_authority = true;
    bool free_evolution = false;  // u = 0 throughout
    bool renormalize_trace = false;
    // A step is flagged when the trace or Hermiticity defect exceeds this, or
    // the smallest eigenvalue drops below its negative.
    double drift_tolerance = 1e-4;
    std::uint64_t seed = 0;
};

struct Trajectory {
    double dt = 0.0;
    CVector initial_state;
    double initial_output = 0.0;
    // Entry k describes step k+1: control applied over [k dt, (k+1) dt] and the
    // state and output at (k+1) dt.
    std::vector<double> times;
    std::vector<CVector> states;
    std::vector<double> outputs;
    std::vector<double> controls;           // applied u
    std::vector<double> control_means;      // v of the control law (0 under free evolution)
    std::vector<double> control_variances;  // R (0 under free evolution)
    std::vector<StateReport> diagnostics;
    std::vector<int> riccati_iterations;
    std::vector<bool> riccati_converged;
    std::vector<bool> explored;
    std::vector<bool> drift_flagged;

    std::size_t size() const { return outputs.size(); }
};

Trajectory run_closed_loop(const ClosedLoopConfig& cfg);

}  // namespace fpqc
