// fpqc: run the built-in control experiments or user scenarios.
//
// Exit codes:
//   0  success
//   1  run finished but a validity check failed (state drift flagged, oracle failed)
//   2  usage or scenario configuration error
//   3  numerical failure (no Riccati fixed point, non-positive curvature, quadrature accuracy, ...)
//   4  I/O error while writing results

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "fpqc/errors.hpp"
#include "fpqc/oracles.hpp"
#include "fpqc/output.hpp"
#include "fpqc/scenario.hpp"

namespace fs = std::filesystem;
using namespace fpqc;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

struct RunArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> horizon;
    bool noise_off = false;
    int seeds = 1;
    std::string output;
    bool no_plots = false;
    bool no_csv = false;
    bool quiet = false;
};

fs::path output_dir(const RunArgs& args, const ScenarioConfig& cfg) {
    if (!args.output.empty()) return args.output;
    if (const char* env = std::getenv("FPQC_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_dir;
}

int run_command(const RunArgs& args) {
    ScenarioConfig cfg = resolve_scenario(args.scenario);
    if (args.seed) cfg.seed = *args.seed;
    if (args.horizon) cfg.controller.horizon = *args.horizon;
    if (args.noise_off) {
        cfg.process_noise = false;
        cfg.measure_noise = false;
    }
    if (args.no_plots) cfg.write_plots = false;
    if (args.no_csv) cfg.write_csv = false;
    cfg.validate();
    if (args.seeds < 1) throw ConfigError("--seeds must be at least 1");

    std::vector<ScenarioConfig> configs;
    for (int k = 0; k < args.seeds; ++k) {
        ScenarioConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(k);
        configs.push_back(std::move(c));
    }

    std::vector<std::optional<ScenarioRun>> runs(configs.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::size_t next = 0;
    std::mutex next_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (next >= configs.size()) return;
                i = next++;
            }
            try {
                runs[i] = run_scenario(configs[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned threads =
        std::min<unsigned>(static_cast<unsigned>(configs.size()), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    const fs::path dir = output_dir(args, cfg);
    bool ok = true;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const ScenarioRun& r = *runs[i];
        std::string stem = r.config.name.empty() ? "scenario" : r.config.name;
        if (runs.size() > 1) stem += "_seed" + std::to_string(r.config.seed);
        if (r.config.write_csv) {
            const fs::path csv = dir / (stem + ".csv");
            export_csv(r.trajectory, csv);
            if (!args.quiet) std::cout << "wrote " << csv.string() << "\n";
        }
        if (r.config.write_plots) {
            for (const auto& p : emit_plots(r.trajectory, r.config.controller.o_d, dir / stem, r.config.name)) {
                if (!args.quiet) std::cout << "wrote " << p.string() << "\n";
            }
        }
        if (!args.quiet) {
            std::cout << "== " << r.config.name << " (seed " << r.config.seed << ")\n" << r.summary.describe();
        }
        if (r.summary.drift_flagged_steps > 0) ok = false;
    }
    return ok ? kOk : kCheckFailed;
}

int list_command() {
    for (const auto& name : builtin_names()) {
        const ScenarioConfig c = *builtin_scenario(name);
        std::cout << name << "  " << c.description << "\n";
    }
    return kOk;
}

int show_command(const std::string& name) {
    std::cout << scenario_to_yaml(resolve_scenario(name));
    return kOk;
}

int validate_command(const std::string& path) {
    const ScenarioConfig cfg = load_scenario(path);
    std::cout << path << ": ok (" << cfg.name << ", " << cfg.levels() << " levels, horizon " << cfg.controller.horizon
              << ")\n";
    return kOk;
}

int oracle_command(const std::string& name) {
    std::vector<std::string> names;
    if (name == "all") {
        names = oracle_names();
    } else {
        names.push_back(name);
    }
    bool ok = true;
    for (const auto& n : names) {
        const OracleReport rep = run_oracle(n);
        std::cout << rep.line() << "\n";
        ok = ok && rep.passed;
    }
    return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fully probabilistic control of quantum systems: scenario runner"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a builtin scenario or a YAML scenario file");
    run->add_option("scenario", run_args.scenario, "Builtin name or path")->required();
    run->add_option("--seed", run_args.seed, "Override the scenario seed");
    run->add_option("--horizon", run_args.horizon, "Override the number of control steps");
    run->add_flag("--noise-off", run_args.noise_off, "Disable process and measurement noise");
    run->add_option("--seeds", run_args.seeds, "Run N trajectories with seeds seed..seed+N-1 in parallel")
        ->check(CLI::PositiveNumber);
    run->add_option("-o,--output", run_args.output, "Output directory (else $FPQC_OUTPUT_DIR, else the scenario's)");
    run->add_flag("--no-plots", run_args.no_plots, "Skip SVG plots");
    run->add_flag("--no-csv", run_args.no_csv, "Skip the CSV trajectory");
    run->add_flag("-q,--quiet", run_args.quiet, "Print nothing on success");

    app.add_subcommand("list", "List builtin scenarios");

    std::string show_name;
    auto* show = app.add_subcommand("show-scenario", "Print a scenario as YAML");
    show->add_option("name", show_name, "Builtin name or path")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("path", validate_path, "YAML scenario")->required();

    std::string oracle_name;
    auto* oracle = app.add_subcommand("oracle", "Run a reference check");
    oracle->add_option("check", oracle_name, "One of: all, " + [] {
        std::string s;
        for (const auto& n : oracle_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }())->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return run_command(run_args);
        if (app.got_subcommand("list")) return list_command();
        if (*show) return show_command(show_name);
        if (*validate) return validate_command(validate_path);
        if (*oracle) return oracle_command(oracle_name);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    }
    return kOk;
}
