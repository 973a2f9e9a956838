// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>

#include "fpqc/dynamics.hpp"
#include "fpqc/models.hpp"
#include "fpqc/oracles.hpp"
#include "fpqc/output.hpp"
#include "fpqc/scenario.hpp"

using namespace fpqc;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* format, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

std::map<std::string, ScenarioRun>& runs() {
    static std::map<std::string, ScenarioRun> cache;
    return cache;
}

const ScenarioRun& run_builtin(const std::string& name) {
    auto it = runs().find(name);
    if (it == runs().end()) it = runs().emplace(name, run_scenario(*builtin_scenario(name))).first;
    return it->second;
}

// Band reached and held to the end of the horizon, inside the time budget.
Outcome sustained_band(const std::string& name, double band, double seconds) {
    const ScenarioRun& r = run_builtin(name);
    const RunSummary s = summarize(r.trajectory, r.config.controller.o_d, band, r.summary.wall_seconds);
    Outcome o;
    o.passed = s.steps_to_band.has_value() && s.wall_seconds < seconds;
    o.detail = name + ": final " + fmt("%.5f", s.final_output) + ", band entry " +
               (s.steps_to_band ? std::to_string(*s.steps_to_band) : std::string("never")) + ", " +
               fmt("%.2f s", s.wall_seconds);
    return o;
}

Outcome criterion_1() { return sustained_band("spin-half", 0.02, 5.0); }

Outcome criterion_2() {
    const Outcome a = sustained_band("spin-one-a", 0.05, 10.0);
    const Outcome b = sustained_band("spin-one-b", 0.05, 10.0);
    return {a.passed && b.passed, "rho_11 " + a.detail + "; rho_22 " + b.detail};
}

// |o_t - o_d| never grows before the band is entered, then stays within it.
Outcome criterion_3() {
    const ScenarioRun& r = run_builtin("morse-lih");
    const Trajectory& t = r.trajectory;
    const double o_d = r.config.controller.o_d;
    const RunSummary s = summarize(t, o_d, 0.05, r.summary.wall_seconds);
    Outcome o;
    o.detail = "initial " + fmt("%.5f", t.initial_output) + ", final " + fmt("%.5f", s.final_output) + ", " +
               fmt("%.2f s", s.wall_seconds);
    if (!s.steps_to_band) {
        o.detail += ", band never held";
        return o;
    }
    const int entry = *s.steps_to_band;
    double prev = std::abs(t.initial_output - o_d);
    int violations = 0;
    for (int k = 0; k < entry; ++k) {
        const double dev = std::abs(t.outputs[k] - o_d);
        if (dev > prev + 1e-12) ++violations;
        prev = dev;
    }
    o.passed = violations == 0 && s.wall_seconds < 30.0;
    o.detail += ", band entry " + std::to_string(entry) + ", non-monotone steps " + std::to_string(violations);
    return o;
}

Outcome from_report(const OracleReport& r) { return {r.passed, r.line()}; }

Outcome criterion_4() { return from_report(check_control_law(100, 1, 1e-4)); }
Outcome criterion_5() { return from_report(check_cost_to_go(100, 2, 1e-6)); }
Outcome criterion_6() { return from_report(run_oracle("dynamics-rk4")); }

Outcome criterion_7() {
    Outcome o{true, ""};
    for (const std::string& name : builtin_names()) {
        const RunSummary& s = run_builtin(name).summary;
        const bool ok = s.max_trace_defect <= 1e-6 && s.max_hermiticity_defect <= 1e-8;
        o.passed = o.passed && ok;
        o.detail += name + fmt(" trace %.1e", s.max_trace_defect) + fmt(" herm %.1e; ", s.max_hermiticity_defect);
    }
    ScenarioConfig sc = *builtin_scenario("spin-half");
    ClosedLoopConfig c = to_closed_loop(sc);
    c.free_evolution = true;
    const Trajectory t = run_closed_loop(c);
    double worst = 0.0;
    for (const auto& d : t.diagnostics) worst = std::max(worst, d.trace_defect);
    o.passed = o.passed && worst <= 1e-12;
    o.detail += fmt("free evolution trace %.1e", worst);
    return o;
}

Outcome criterion_8() {
    const OracleReport a = check_morse_orthonormality(1e-7);
    const OracleReport b = check_quadrature_refinement(1e-8);
    const OracleReport c = check_morse_level_count();
    return {a.passed && b.passed && c.passed, a.line() + "; " + b.line() + "; " + c.line()};
}

// Generators of the two spin benchmarks against their tabulated entries.
Outcome criterion_9() {
    const cplx i = kI;
    CMatrix a_half = CMatrix::Zero(4, 4);
    a_half(2, 2) = -i;
    a_half(3, 3) = i;
    CMatrix n_half(4, 4);
    n_half << 0, 0, 1.0 + i, -(1.0 - i),
              0, 0, -(1.0 + i), 1.0 - i,
              1.0 - i, -(1.0 - i), 0, 0,
              -(1.0 + i), 1.0 + i, 0, 0;
    n_half *= 0.5;

    CMatrix a_one = CMatrix::Zero(9, 9);
    const cplx diag[] = {0, 0, 0, -0.5 * i, -1.5 * i, 0.5 * i, 1.5 * i, -i, i};
    for (int k = 0; k < 9; ++k) a_one(k, k) = diag[k];
    MatrixXd n_one(9, 9);
    n_one << 0, 0, 0, 0, 1, 0, -1, 0, 0,
             0, 0, 0, 0, 0, 0, 0, 1, -1,
             0, 0, 0, 0, -1, 0, 1, -1, 1,
             0, 0, 0, 0, 1, 0, 0, 0, -1,
             1, 0, -1, 1, 0, 0, 0, 0, 0,
             0, 0, 0, 0, 0, 0, -1, 1, 0,
             -1, 0, 1, 0, 0, -1, 0, 0, 0,
             0, 1, -1, 0, 0, 1, 0, 0, 0,
             0, -1, 1, -1, 0, 0, 0, 0, 0;

    const PhysicalSystem half = spin_half_system();
    const PhysicalSystem one = spin_one_system();
    const double e1 = (drift_generator(half) - a_half).cwiseAbs().maxCoeff();
    const double e2 = (control_generator(half) - n_half).cwiseAbs().maxCoeff();
    const double e3 = (drift_generator(one) - a_one).cwiseAbs().maxCoeff();
    const double e4 = (control_generator(one) - n_one.cast<cplx>()).cwiseAbs().maxCoeff();
    const double worst = std::max({e1, e2, e3, e4});
    return {worst == 0.0, fmt("spin-1/2 A %.1e", e1) + fmt(" N %.1e", e2) + fmt("; spin-1 A %.1e", e3) +
                              fmt(" N %.1e", e4)};
}

Outcome criterion_10() {
    Outcome o{true, ""};
    for (const std::string& name : builtin_names()) {
        const ScenarioConfig sc = *builtin_scenario(name);
        const std::string first = trajectory_csv(run_builtin(name).trajectory);
        const std::string second = trajectory_csv(run_scenario(sc).trajectory);
        const bool same = first == second;
        o.passed = o.passed && same;
        o.detail += name + (same ? " identical; " : " differs; ");
    }
    return o;
}

}  // namespace

int main() {
    const std::function<Outcome()> criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                 criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
    int failures = 0;
    for (int k = 0; k < 10; ++k) {
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.passed) ++failures;
        std::printf("%s criterion %d: %s\n", o.passed ? "PASS" : "FAIL", k + 1, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
