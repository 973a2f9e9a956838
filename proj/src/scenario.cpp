#include "fpqc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fpqc/errors.hpp"

namespace fpqc {

namespace {

std::string where(const YAML::Mark& mark) {
    if (mark.line < 0) return "";
    return " (line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ")";
}

// Walks one YAML mapping, remembers which keys were read and rejects the rest.
class MapReader {
public:
    MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.IsMap()) throw ConfigError(label() + ": expected a mapping" + where(node_.Mark()));
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return static_cast<bool>(node_[key]);
    }

    YAML::Node child(const std::string& key) {
        seen_.insert(key);
        return node_[key];
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    void read(const std::string& key, T& out) {
        const YAML::Node n = child(key);
        if (!n) return;
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(key_path(key) + ": cannot read value '" + (n.IsScalar() ? n.Scalar() : "<node>") +
                              "'" + where(n.Mark()));
        }
    }

    void finish() const {
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError(key_path(key) + ": unknown key" + where(kv.first.Mark()));
        }
    }

private:
    std::string label() const { return path_.empty() ? "<root>" : path_; }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Enum>
Enum parse_choice(const std::string& path, const std::string& value,
                  std::initializer_list<std::pair<const char*, Enum>> choices) {
    std::string allowed;
    for (const auto& [name, e] : choices) {
        if (value == name) return e;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(path + ": '" + value + "' is not one of {" + allowed + "}");
}

const char* system_name(SystemKind k) {
    switch (k) {
        case SystemKind::SpinHalf: return "spin-half";
        case SystemKind::SpinOne: return "spin-one";
        case SystemKind::Morse: return "morse";
    }
    return "";
}

// Shortest decimal that reads back to the same double.
std::string yaml_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const char* control_name(ControlMode m) { return m == ControlMode::Mean ? "mean" : "sample"; }
const char* riccati_name(RiccatiMode m) { return m == RiccatiMode::SteadyState ? "steady-state" : "backward"; }
const char* plant_name(PlantMode m) { return m == PlantMode::Exact ? "exact" : "zero-order-hold"; }

void require(bool ok, const std::string& path, const std::string& constraint) {
    if (!ok) throw ConfigError(path + ": " + constraint);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

ScenarioConfig from_node(const YAML::Node& root) {
    ScenarioConfig cfg;
    MapReader top(root, "");
    top.read("name", cfg.name);
    top.read("description", cfg.description);
    top.read("seed", cfg.seed);

    if (top.has("system")) {
        MapReader sys(top.child("system"), "system");
        std::string kind = system_name(cfg.system);
        sys.read("kind", kind);
        cfg.system = parse_choice<SystemKind>(sys.key_path("kind"), kind,
                                              {{"spin-half", SystemKind::SpinHalf},
                                               {"spin-one", SystemKind::SpinOne},
                                               {"morse", SystemKind::Morse}});
        sys.read("initial_level", cfg.initial_level);
        if (sys.has("morse")) {
            MapReader m(sys.child("morse"), "system.morse");
            m.read("d0_ev", cfg.morse.d0);
            m.read("r_eq_angstrom", cfg.morse.r_eq);
            m.read("reduced_mass_kg", cfg.morse.reduced_mass);
            m.read("alpha_per_angstrom", cfg.morse.alpha);
            m.read("nu", cfg.morse.nu);
            m.read("mu0_debye", cfg.morse.mu0);
            m.read("r_star_angstrom", cfg.morse.r_star);
            m.finish();
        }
        sys.finish();
    }

    if (top.has("target")) {
        MapReader t(top.child("target"), "target");
        std::string kind = cfg.target == TargetKind::Projector ? "projector" : "gaussian";
        t.read("kind", kind);
        cfg.target = parse_choice<TargetKind>(t.key_path("kind"), kind,
                                              {{"projector", TargetKind::Projector},
                                               {"gaussian", TargetKind::Gaussian}});
        t.read("level", cfg.target_level);
        t.read("gamma0_per_angstrom", cfg.gaussian.gamma0);
        t.read("r_prime_angstrom", cfg.gaussian.r_prime);
        t.read("o_d", cfg.controller.o_d);
        t.finish();
    }

    bool g_given = false;
    if (top.has("controller")) {
        MapReader c(top.child("controller"), "controller");
        c.read("g_r", cfg.controller.g_r);
        g_given = c.has("g");
        c.read("g", cfg.controller.g);
        c.read("omega", cfg.controller.omega);
        c.read("u_r", cfg.controller.u_r);
        std::string mode = control_name(cfg.control);
        c.read("mode", mode);
        cfg.control = parse_choice<ControlMode>(c.key_path("mode"), mode,
                                                {{"mean", ControlMode::Mean}, {"sample", ControlMode::Sample}});
        std::string riccati = riccati_name(cfg.riccati);
        c.read("riccati", riccati);
        cfg.riccati = parse_choice<RiccatiMode>(c.key_path("riccati"), riccati,
                                                {{"steady-state", RiccatiMode::SteadyState},
                                                 {"backward", RiccatiMode::Backward}});
        c.read("riccati_tolerance", cfg.riccati_tolerance);
        c.read("iterations_per_step", cfg.iterations_per_step);
        c.finish();
    }
    if (!g_given) cfg.controller.g = cfg.controller.g_r;

    if (top.has("discretization")) {
        MapReader d(top.child("discretization"), "discretization");
        d.read("dt", cfg.dt);
        d.read("horizon", cfg.controller.horizon);
        std::string plant = plant_name(cfg.plant);
        d.read("plant", plant);
        cfg.plant = parse_choice<PlantMode>(d.key_path("plant"), plant,
                                            {{"exact", PlantMode::Exact},
                                             {"zero-order-hold", PlantMode::ZeroOrderHold}});
        d.finish();
    }

    if (top.has("noise")) {
        MapReader n(top.child("noise"), "noise");
        n.read("process_std", cfg.process_std);
        n.read("measure_std", cfg.measure_std);
        n.read("process", cfg.process_noise);
        n.read("measure", cfg.measure_noise);
        n.finish();
    }

    if (top.has("output")) {
        MapReader o(top.child("output"), "output");
        o.read("directory", cfg.output_dir);
        o.read("csv", cfg.write_csv);
        o.read("plots", cfg.write_plots);
        o.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

ScenarioConfig spin_half_builtin() {
    ScenarioConfig c;
    c.name = "spin-half";
    c.description = "Spin-1/2 transfer from |-> to |+>";
    c.system = SystemKind::SpinHalf;
    c.initial_level = 0;
    c.target = TargetKind::Projector;
    c.target_level = 1;
    c.controller = {1e-5, 1e-5, 1.0, 0.0, 1.0, 200};
    c.dt = 0.0505;
    return c;
}

ScenarioConfig spin_one_a_builtin() {
    ScenarioConfig c;
    c.name = "spin-one-a";
    c.description = "Spin-1 transfer from |-1> to |0>";
    c.system = SystemKind::SpinOne;
    c.initial_level = 0;
    c.target = TargetKind::Projector;
    c.target_level = 1;
    c.controller = {1e-9, 1e-9, 1.0, 0.0, 1.0, 600};
    c.dt = 0.0067;
    return c;
}

ScenarioConfig spin_one_b_builtin() {
    ScenarioConfig c;
    c.name = "spin-one-b";
    c.description = "Spin-1 transfer from |-1> to |1>";
    c.system = SystemKind::SpinOne;
    c.initial_level = 0;
    c.target = TargetKind::Projector;
    c.target_level = 2;
    c.controller = {1e-9, 1e-9, 0.11, 0.0, 1.0, 300};
    c.dt = 0.0404;
    return c;
}

ScenarioConfig morse_builtin() {
    ScenarioConfig c;
    c.name = "morse-lih";
    c.description = "LiH Morse oscillator driven into a Gaussian window around r' from the ground state";
    c.system = SystemKind::Morse;
    c.morse = MorseParameters::lithium_hydride();
    c.initial_level = 0;
    c.target = TargetKind::Gaussian;
    c.controller = {1e-8, 1e-8, 0.28950, 0.0, 1.0, 600};
    c.dt = 0.0167;
    return c;
}

}  // namespace

int ScenarioConfig::levels() const {
    switch (system) {
        case SystemKind::SpinHalf: return 2;
        case SystemKind::SpinOne: return 3;
        case SystemKind::Morse: return morse_level_count(morse);
    }
    return 0;
}

void ScenarioConfig::validate() const {
    try {
        if (system == SystemKind::Morse) morse.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("system.morse: ") + e.what());
    }
    const int l = levels();
    require(initial_level >= 0 && initial_level < l, "system.initial_level",
            "must be in [0, " + std::to_string(l) + ")");
    if (target == TargetKind::Projector) {
        require(target_level >= 0 && target_level < l, "target.level", "must be in [0, " + std::to_string(l) + ")");
    } else {
        require(system == SystemKind::Morse, "target.kind", "gaussian target needs system.kind = morse");
        require(positive(gaussian.gamma0), "target.gamma0_per_angstrom", "must be positive");
        require(std::isfinite(gaussian.r_prime), "target.r_prime_angstrom", "must be finite");
    }
    require(std::isfinite(controller.o_d), "target.o_d", "must be finite");
    require(positive(controller.g_r), "controller.g_r", "must be positive");
    require(positive(controller.g), "controller.g", "must be positive");
    require(positive(controller.omega), "controller.omega", "must be positive");
    require(std::isfinite(controller.u_r), "controller.u_r", "must be finite");
    require(positive(riccati_tolerance), "controller.riccati_tolerance", "must be positive");
    require(iterations_per_step >= 1, "controller.iterations_per_step", "must be at least 1");
    require(positive(dt), "discretization.dt", "must be positive");
    require(controller.horizon >= 1, "discretization.horizon", "must be at least 1");
    require(process_std >= 0.0 && std::isfinite(process_std), "noise.process_std", "must be finite and >= 0");
    require(measure_std >= 0.0 && std::isfinite(measure_std), "noise.measure_std", "must be finite and >= 0");
}

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ": parse error: " + e.msg + where(e.mark));
    }
    if (!root || root.IsNull()) throw ConfigError(source + ": empty scenario");
    try {
        return from_node(root);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_yaml(const ScenarioConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << cfg.name;
    out << YAML::Key << "description" << YAML::Value << cfg.description;
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;

    out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << system_name(cfg.system);
    out << YAML::Key << "initial_level" << YAML::Value << cfg.initial_level;
    if (cfg.system == SystemKind::Morse) {
        out << YAML::Key << "morse" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "d0_ev" << YAML::Value << yaml_number(cfg.morse.d0);
        out << YAML::Key << "r_eq_angstrom" << YAML::Value << yaml_number(cfg.morse.r_eq);
        out << YAML::Key << "reduced_mass_kg" << YAML::Value << yaml_number(cfg.morse.reduced_mass);
        out << YAML::Key << "alpha_per_angstrom" << YAML::Value << yaml_number(cfg.morse.alpha);
        out << YAML::Key << "nu" << YAML::Value << yaml_number(cfg.morse.nu);
        out << YAML::Key << "mu0_debye" << YAML::Value << yaml_number(cfg.morse.mu0);
        out << YAML::Key << "r_star_angstrom" << YAML::Value << yaml_number(cfg.morse.r_star);
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    out << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
    if (cfg.target == TargetKind::Projector) {
        out << YAML::Key << "kind" << YAML::Value << "projector";
        out << YAML::Key << "level" << YAML::Value << cfg.target_level;
    } else {
        out << YAML::Key << "kind" << YAML::Value << "gaussian";
        out << YAML::Key << "gamma0_per_angstrom" << YAML::Value << yaml_number(cfg.gaussian.gamma0);
        out << YAML::Key << "r_prime_angstrom" << YAML::Value << yaml_number(cfg.gaussian.r_prime);
    }
    out << YAML::Key << "o_d" << YAML::Value << yaml_number(cfg.controller.o_d);
    out << YAML::EndMap;

    out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "g_r" << YAML::Value << yaml_number(cfg.controller.g_r);
    out << YAML::Key << "g" << YAML::Value << yaml_number(cfg.controller.g);
    out << YAML::Key << "omega" << YAML::Value << yaml_number(cfg.controller.omega);
    out << YAML::Key << "u_r" << YAML::Value << yaml_number(cfg.controller.u_r);
    out << YAML::Key << "mode" << YAML::Value << control_name(cfg.control);
    out << YAML::Key << "riccati" << YAML::Value << riccati_name(cfg.riccati);
    out << YAML::Key << "riccati_tolerance" << YAML::Value << yaml_number(cfg.riccati_tolerance);
    out << YAML::Key << "iterations_per_step" << YAML::Value << cfg.iterations_per_step;
    out << YAML::EndMap;

    out << YAML::Key << "discretization" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << yaml_number(cfg.dt);
    out << YAML::Key << "horizon" << YAML::Value << cfg.controller.horizon;
    out << YAML::Key << "plant" << YAML::Value << plant_name(cfg.plant);
    out << YAML::EndMap;

    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "process" << YAML::Value << cfg.process_noise;
    out << YAML::Key << "process_std" << YAML::Value << yaml_number(cfg.process_std);
    out << YAML::Key << "measure" << YAML::Value << cfg.measure_noise;
    out << YAML::Key << "measure_std" << YAML::Value << yaml_number(cfg.measure_std);
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "directory" << YAML::Value << cfg.output_dir;
    out << YAML::Key << "csv" << YAML::Value << cfg.write_csv;
    out << YAML::Key << "plots" << YAML::Value << cfg.write_plots;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<std::string> builtin_names() { return {"spin-half", "spin-one-a", "spin-one-b", "morse-lih"}; }

std::optional<ScenarioConfig> builtin_scenario(const std::string& name) {
    if (name == "spin-half") return spin_half_builtin();
    if (name == "spin-one-a") return spin_one_a_builtin();
    if (name == "spin-one-b") return spin_one_b_builtin();
    if (name == "morse-lih") return morse_builtin();
    return std::nullopt;
}

ScenarioConfig resolve_scenario(const std::string& name_or_path) {
    if (auto b = builtin_scenario(name_or_path)) return *b;
    if (std::filesystem::exists(name_or_path)) return load_scenario(name_or_path);
    throw ConfigError("'" + name_or_path + "' is neither a builtin scenario nor a readable file");
}

ClosedLoopConfig to_closed_loop(const ScenarioConfig& cfg) {
    cfg.validate();
    ClosedLoopConfig c;
    const int l = cfg.levels();
    switch (cfg.system) {
        case SystemKind::SpinHalf: c.system = spin_half_system(); break;
        case SystemKind::SpinOne: c.system = spin_one_system(); break;
        case SystemKind::Morse: c.system = morse_system(cfg.morse); break;
    }
    if (cfg.target == TargetKind::Projector) {
        c.observable = level_projector(l, cfg.target_level);
    } else {
        c.observable = gaussian_target(cfg.morse, cfg.gaussian).cast<cplx>();
    }
    c.initial_state = level_projector(l, cfg.initial_level);
    c.controller = cfg.controller;
    c.dt = cfg.dt;
    c.plant = cfg.plant;
    c.control = cfg.control;
    c.riccati = cfg.riccati;
    c.steady.tolerance = cfg.riccati_tolerance;
    c.steady.max_iterations = cfg.iterations_per_step;
    c.steady.accept_unconverged = true;
    c.noise.process_std = VectorXd::Constant(l * l, cfg.process_std);
    c.noise.measure_std = cfg.measure_std;
    c.noise.process_enabled = cfg.process_noise;
    c.noise.measure_enabled = cfg.measure_noise;
    c.noise.seed = cfg.seed;
    c.seed = cfg.seed;
    return c;
}

RunSummary summarize(const Trajectory& traj, double o_d, double band, double wall_seconds) {
    RunSummary s;
    s.o_d = o_d;
    s.band = band;
    s.wall_seconds = wall_seconds;
    const std::size_t n = traj.size();
    if (n == 0) return s;
    s.final_output = traj.outputs.back();
    s.min_eigenvalue = traj.diagnostics.front().min_eigenvalue;
    std::optional<int> entry;
    for (std::size_t k = n; k-- > 0;) {
        if (std::abs(traj.outputs[k] - o_d) > band) break;
        entry = static_cast<int>(k + 1);
    }
    s.steps_to_band = entry;
    for (std::size_t k = 0; k < n; ++k) {
        s.max_trace_defect = std::max(s.max_trace_defect, traj.diagnostics[k].trace_defect);
        s.max_hermiticity_defect = std::max(s.max_hermiticity_defect, traj.diagnostics[k].hermiticity_defect);
        s.min_eigenvalue = std::min(s.min_eigenvalue, traj.diagnostics[k].min_eigenvalue);
        s.max_abs_control = std::max(s.max_abs_control, std::abs(traj.controls[k]));
        if (k < traj.riccati_converged.size() && !traj.riccati_converged[k]) ++s.unconverged_steps;
        if (traj.drift_flagged[k]) ++s.drift_flagged_steps;
    }
    return s;
}

std::string RunSummary::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << "final output      " << final_output << " (target " << o_d << ")\n";
    os << "steps to band     ";
    if (steps_to_band) {
        os << *steps_to_band;
    } else {
        os << "never";
    }
    os << " (|o - o_d| <= " << band << ")\n";
    os << "max trace defect  " << max_trace_defect << "\n";
    os << "max herm. defect  " << max_hermiticity_defect << "\n";
    os << "min eigenvalue    " << min_eigenvalue << "\n";
    os << "max |u|           " << max_abs_control << "\n";
    os << "unconverged steps " << unconverged_steps << "\n";
    os << "drift flagged     " << drift_flagged_steps << "\n";
    os << "wall time         " << wall_seconds << " s\n";
    return os.str();
}

namespace {

template <typename E>
[[noreturn]] void rethrow_in_context(const E& e, const std::string& prefix) {
    throw E(prefix + e.what());
}

}  // namespace

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
    const std::string prefix = "scenario '" + cfg.name + "': ";
    ScenarioRun out;
    out.config = cfg;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        out.trajectory = run_closed_loop(to_closed_loop(cfg));
    } catch (const NonConvergence& e) {
        throw NonConvergence(prefix + e.what(), e.residuals());
    } catch (const AccuracyError& e) {
        throw AccuracyError(prefix + e.what(), e.estimate());
    } catch (const ConfigError& e) {
        rethrow_in_context(e, prefix);
    } catch (const ValidationError& e) {
        rethrow_in_context(e, prefix);
    } catch (const StructuralError& e) {
        rethrow_in_context(e, prefix);
    } catch (const NumericConsistencyError& e) {
        rethrow_in_context(e, prefix);
    } catch (const ParameterError& e) {
        rethrow_in_context(e, prefix);
    } catch (const EquilibriumNotFound& e) {
        rethrow_in_context(e, prefix);
    } catch (const CurvatureError& e) {
        rethrow_in_context(e, prefix);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.summary = summarize(out.trajectory, cfg.controller.o_d, 0.05, secs);
    return out;
}

}  // namespace fpqc
