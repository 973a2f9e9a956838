#pragma once

// Declarative experiment description: which system, which target, controller
// weights, discretisation, noise and outputs. Loaded from YAML or taken from
// the built-in set.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpqc/control.hpp"
#include "fpqc/models.hpp"
#include "fpqc/simulate.hpp"

namespace fpqc {

enum class SystemKind { SpinHalf, SpinOne, Morse };
enum class TargetKind { Projector, Gaussian };

struct ScenarioConfig {
    std::string name;
    std::string description;

    SystemKind system = SystemKind::SpinHalf;
    MorseParameters morse;
    int initial_level = 0;

    TargetKind target = TargetKind::Projector;
    int target_level = 1;
    TargetGaussian gaussian;

    ControllerConfig controller;
    ControlMode control = ControlMode::Mean;
    RiccatiMode riccati = RiccatiMode::SteadyState;
    PlantMode plant = PlantMode::Exact;
    double riccati_tolerance = 1e-9;
    // Riccati iterations allowed per control step; the index is warm-started
    // from the previous step, so an unfinished iterate is carried forward.
    int iterations_per_step = 2000;

    double dt = 0.05;

    double process_std = 0.0;  // same standard deviation on every slot
    double measure_std = 0.0;
    bool process_noise = false;
    bool measure_noise = false;

    std::string output_dir = "results";
    bool write_csv = true;
    bool write_plots = true;

    std::uint64_t seed = 0;

    int levels() const;
    void validate() const;
};

// Parse errors carry line and column; semantic errors carry the key path.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& yaml_text, const std::string& source = "<string>");
std::string scenario_to_yaml(const ScenarioConfig& cfg);

std::vector<std::string> builtin_names();
std::optional<ScenarioConfig> builtin_scenario(const std::string& name);

// A builtin name or a path to a YAML file.
ScenarioConfig resolve_scenario(const std::string& name_or_path);

ClosedLoopConfig to_closed_loop(const ScenarioConfig& cfg);

struct RunSummary {
    double final_output = 0.0;
    double o_d = 0.0;
    // First step t with |o_s - o_d| <= band for every s >= t.
    std::optional<int> steps_to_band;
    double band = 0.05;
    double max_trace_defect = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    double max_abs_control = 0.0;
    int unconverged_steps = 0;
    int drift_flagged_steps = 0;
    double wall_seconds = 0.0;

    std::string describe() const;
};

RunSummary summarize(const Trajectory& traj, double o_d, double band = 0.05, double wall_seconds = 0.0);

struct ScenarioRun {
    ScenarioConfig config;
    Trajectory trajectory;
    RunSummary summary;
};

// Errors from the closed loop are rethrown with the scenario name prefixed.
ScenarioRun run_scenario(const ScenarioConfig& cfg);

}  // namespace fpqc
