#include "fpqc/simulate.hpp"

#include <cmath>
#include <string>

#include "fpqc/errors.hpp"

namespace fpqc {

void NoiseSpec::validate(int levels) const {
    if (process_std.size() != 0 && process_std.size() != levels * levels) {
        throw ValidationError("noise: process_std needs " + std::to_string(levels * levels) + " entries");
    }
    if (process_std.size() != 0 && ((process_std.array() < 0.0).any() || !process_std.allFinite())) {
        throw ValidationError("noise: process_std must be finite and nonnegative");
    }
    if (!(measure_std >= 0.0) || !std::isfinite(measure_std)) {
        throw ValidationError("noise: measure_std must be finite and nonnegative");
    }
}

CVector sample_process_noise(const NoiseSpec& spec, int levels, Rng& rng) {
    const int n = levels * levels;
    CVector z = CVector::Zero(n);
    if (!spec.process_active()) return z;
    spec.validate(levels);
    std::normal_distribution<double> normal(0.0, 1.0);

    VectorXd pops(levels);
    for (int i = 0; i < levels; ++i) pops(i) = spec.process_std(i) * normal(rng);
    pops.array() -= pops.mean();
    // Close the sum exactly: the last population cancels the running sum of the others.
    double partial = 0.0;
    for (int i = 0; i + 1 < levels; ++i) partial += pops(i);
    pops(levels - 1) = -partial;
    for (int i = 0; i < levels; ++i) z(i) = pops(i);

    for (int k = 0; k + 1 < levels; ++k) {
        for (int m = k + 1; m < levels; ++m) {
            const int upper = slot_index(levels, k, m);
            const int lower = slot_index(levels, m, k);
            const double sd = spec.process_std(upper) / std::sqrt(2.0);
            const double re = sd * normal(rng);
            const double im = sd * normal(rng);
            z(upper) = cplx(re, im);
            z(lower) = cplx(re, -im);
        }
    }
    return z;
}

CVector sample_process_noise(const NoiseSpec& spec, int levels) {
    Rng rng(spec.seed);
    return sample_process_noise(spec, levels, rng);
}

CVector step(const CVector& x_shifted, double u, const DiscreteModel& model, const BilinearGenerators& gen,
             const NoiseSpec& spec, Rng& rng, PlantMode plant) {
    const CVector next = propagate(gen, model, x_shifted + gen.x_equilibrium, u, plant) - gen.x_equilibrium;
    if (!spec.process_active()) return next;
    return next + sample_process_noise(spec, gen.levels(), rng);
}

double measure(const CVector& x_shifted, const DiscreteModel& model, const BilinearGenerators& gen,
               const NoiseSpec& spec, Rng& rng) {
    if (model.measurement_row.size() != x_shifted.size()) {
        throw ValidationError("measure: model has no measurement row of matching size");
    }
    const cplx o = (model.measurement_row * (x_shifted + gen.x_equilibrium))(0);
    double value = o.real();
    if (spec.measure_active()) {
        std::normal_distribution<double> normal(0.0, spec.measure_std);
        value += normal(rng);
    }
    return value;
}

namespace {

bool without_authority(const ControlLaw& law, const ControllerConfig& cfg) {
    return std::abs(law.v - cfg.u_r) <= 1e-12 * std::max(1.0, std::abs(cfg.u_r)) &&
           std::abs(law.r - cfg.omega) <= 1e-12 * cfg.omega;
}

}  // namespace

Trajectory run_closed_loop(const ClosedLoopConfig& cfg) {
    cfg.controller.validate();
    const int l = cfg.system.levels();
    cfg.noise.validate(l);
    if (cfg.initial_state.rows() != l || cfg.observable.rows() != l) {
        throw ValidationError("closed loop: initial state and observable must match the system size");
    }
    const StateReport initial_report = validate(cfg.initial_state);
    if (!initial_report.passes()) {
        throw ValidationError("closed loop: initial state is not a density matrix (" + initial_report.describe() +
                              ")");
    }

    const CVector x0 = vectorize(cfg.initial_state);
    const BilinearGenerators gen = build_generators(cfg.system, cfg.equilibrium ? cfg.equilibrium : x0);
    const CRowVector d = measurement_row(cfg.observable);
    const DiscreteModel model = discretize(gen, cfg.dt, d);
    const CVector& xe = gen.x_equilibrium;

    // The controller works on x = x~ - x_e, which always has zero trace. On that
    // subspace D x = D Pi x, and the physical target o_d becomes o_d - D x_e.
    const CRowVector ell = trace_row(l);
    const cplx d_xe = (d * xe)(0);
    const CRowVector d0 = d - d_xe * ell;
    ControllerConfig shifted = cfg.controller;
    shifted.o_d = cfg.controller.o_d - d_xe.real();

    SteadyOptions steady = cfg.steady;
    steady.project_trace = true;
    steady.x_equilibrium = xe;

    Rng rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.initial_state = x0;
    traj.initial_output = measure(x0 - xe, model, gen, cfg.noise, rng);

    const int horizon = cfg.controller.horizon;
    std::optional<RiccatiState> warm;
    CVector xt = x0;
    for (int t = 0; t < horizon; ++t) {
        const CVector x = xt - xe;
        double u = 0.0;
        ControlLaw law{0.0, 0.0};
        int iterations = 0;
        bool converged = true;
        bool explored = false;
        if (!cfg.free_evolution) {
            const LinearizedStep lin{model.a, control_matrix(model, gen, x), d0};
            RiccatiState index;
            try {
                if (cfg.riccati == RiccatiMode::SteadyState) {
                    SteadyOptions opt = steady;
                    const RiccatiState* start = nullptr;
                    if (cfg.warm_start && warm) {
                        opt.init = RiccatiInit::Given;
                        start = &*warm;
                    }
                    SteadyIndex si = steady_index(lin, shifted, opt, start);
                    iterations = si.iterations;
                    converged = si.converged;
                    index = std::move(si.state);
                    if (cfg.warm_start) warm = index;
                } else {
                    index = RiccatiState::zero(x.size());
                    for (int k = t; k < horizon; ++k) index = riccati_step(index, lin, shifted);
                    iterations = horizon - t;
                }
            } catch (const NonConvergence& e) {
                throw NonConvergence("step " + std::to_string(t) + ": " + e.what(), e.residuals());
            }
            law = control_law(x, index, lin, shifted);
            u = law.v;
            const bool stuck = cfg.explore_without_authority && without_authority(law, shifted);
            if (cfg.control == ControlMode::Sample || stuck) {
                u = law.v + std::sqrt(law.r) * normal(rng);
                explored = stuck && cfg.control != ControlMode::Sample;
            }
        }

        xt = propagate(gen, model, xt, u, cfg.plant);
        if (cfg.noise.process_active()) xt += sample_process_noise(cfg.noise, l, rng);
        if (cfg.renormalize_trace) xt /= (ell * xt)(0);

        const StateReport report = validate_vectorized(xt);
        traj.times.push_back((t + 1) * cfg.dt);
        traj.states.push_back(xt);
        traj.outputs.push_back(measure(xt - xe, model, gen, cfg.noise, rng));
        traj.controls.push_back(u);
        traj.control_means.push_back(law.v);
        traj.control_variances.push_back(law.r);
        traj.diagnostics.push_back(report);
        traj.riccati_iterations.push_back(iterations);
        traj.riccati_converged.push_back(converged);
        traj.explored.push_back(explored);
        traj.drift_flagged.push_back(report.trace_defect > cfg.drift_tolerance ||
                                     report.hermiticity_defect > cfg.drift_tolerance ||
                                     report.min_eigenvalue < -cfg.drift_tolerance);
    }
    return traj;
}

}  // namespace fpqc
