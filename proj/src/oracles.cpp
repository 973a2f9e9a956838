#include "fpqc/oracles.hpp"

#include <cmath>
#include <sstream>

#include "fpqc/errors.hpp"
#include "fpqc/models.hpp"
#include "fpqc/scenario.hpp"
#include "fpqc/state.hpp"

namespace fpqc {

CMatrix master_equation_rhs(const PhysicalSystem& sys, const CMatrix& rho, double u) {
    const int l = sys.levels();
    CMatrix out(l, l);
    const bool open = sys.rates.size() != 0;
    for (int n = 0; n < l; ++n) {
        for (int m = 0; m < l; ++m) {
            cplx v = 0.0;
            if (n != m) {
                v += (-kI * sys.bohr_frequency(n, m) - (open ? sys.dephasing_rate(n, m) : 0.0)) * rho(n, m);
            } else if (open) {
                for (int k = 0; k < l; ++k) {
                    if (k == n) continue;
                    v += sys.rate(k, n) * rho(k, k) - sys.rate(n, k) * rho(n, n);
                }
            }
            cplx comm = 0.0;
            for (int k = 0; k < l; ++k) comm += sys.dipole(n, k) * rho(k, m) - rho(n, k) * sys.dipole(k, m);
            v += kI * u / sys.hbar * comm;
            out(n, m) = v;
        }
    }
    return out;
}

CMatrix rk4_propagate(const PhysicalSystem& sys, const CMatrix& rho, double u, double duration, int substeps) {
    if (substeps < 1) throw ValidationError("rk4_propagate: substeps must be positive");
    const double h = duration / substeps;
    CMatrix r = rho;
    for (int i = 0; i < substeps; ++i) {
        const CMatrix k1 = master_equation_rhs(sys, r, u);
        const CMatrix k2 = master_equation_rhs(sys, r + 0.5 * h * k1, u);
        const CMatrix k3 = master_equation_rhs(sys, r + 0.5 * h * k2, u);
        const CMatrix k4 = master_equation_rhs(sys, r + h * k3, u);
        r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return r;
}

CMatrix random_density_matrix(int levels, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(levels, levels);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = cplx(normal(rng), normal(rng));
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    // Exact Hermiticity, so that vectorization accepts it without rounding slack.
    rho = 0.5 * (rho + rho.adjoint()).eval();
    for (int i = 0; i < levels; ++i) rho(i, i) = rho(i, i).real();
    return rho;
}

std::string OracleReport::line() const {
    std::ostringstream os;
    os.precision(3);
    os << (passed ? "PASS " : "FAIL ") << name << ": max error " << std::scientific << max_error << " (tolerance "
       << tolerance << ", " << samples << " samples)";
    if (!detail.empty()) os << " " << detail;
    return os.str();
}

OracleReport check_dynamics_rk4(const PhysicalSystem& sys, const CMatrix& rho0, const std::vector<double>& controls,
                                double dt, PlantMode mode, int substeps, double tolerance) {
    const CVector x0 = vectorize(rho0);
    const BilinearGenerators gen = build_generators(sys, x0);
    const DiscreteModel model = discretize(gen, dt);
    OracleReport rep;
    rep.name = mode == PlantMode::Exact ? "dynamics-rk4 (exact plant)" : "dynamics-rk4 (zero-order hold)";
    rep.tolerance = tolerance;
    CVector x = x0;
    CMatrix rho = rho0;
    for (double u : controls) {
        x = propagate(gen, model, x, u, mode);
        rho = rk4_propagate(sys, rho, u, dt, substeps);
        CMatrix discrete(rho.rows(), rho.cols());
        const auto slots = canonical_slots(sys.levels());
        for (std::size_t i = 0; i < slots.size(); ++i) discrete(slots[i].row, slots[i].col) = x(static_cast<Eigen::Index>(i));
        rep.max_error = std::max(rep.max_error, (discrete - rho).cwiseAbs().maxCoeff());
        ++rep.samples;
    }
    rep.passed = rep.max_error <= tolerance;
    rep.detail = "over " + std::to_string(controls.size()) + " steps, RK4 at dt/" + std::to_string(substeps);
    return rep;
}

SpinHalfFixture SpinHalfFixture::make() {
    SpinHalfFixture f;
    f.system = spin_half_system();
    f.generators = build_generators(f.system, vectorize(level_projector(2, 0)));
    const CRowVector d = measurement_row(level_projector(2, 1));
    f.model = discretize(f.generators, 0.0505, d);
    const cplx d_xe = (d * f.generators.x_equilibrium)(0);
    f.d0 = d - d_xe * trace_row(2);
    f.controller = {1e-5, 1e-5, 1.0, 0.0, 1.0 - d_xe.real(), 1};
    return f;
}

LinearizedStep SpinHalfFixture::linearize(const CVector& x_shifted) const {
    return {model.a, control_matrix(model, generators, x_shifted), d0};
}

namespace {

struct FixtureSample {
    CVector x;
    LinearizedStep step;
    RiccatiState next;
};

FixtureSample fixture_sample(const SpinHalfFixture& f, std::mt19937_64& rng, std::uint64_t index_seed) {
    FixtureSample s;
    s.x = vectorize(random_density_matrix(2, rng)) - f.generators.x_equilibrium;
    s.step = f.linearize(s.x);
    s.next = random_riccati_state(2, index_seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    s.next.omega = uni(rng);
    return s;
}

}  // namespace

OracleReport check_control_law(int samples, std::uint64_t seed, double tolerance) {
    const SpinHalfFixture f = SpinHalfFixture::make();
    std::mt19937_64 rng(seed);
    OracleReport rep;
    rep.name = "control-law";
    rep.tolerance = tolerance;
    double worst_v = 0.0;
    double worst_r = 0.0;
    for (int i = 0; i < samples; ++i) {
        const FixtureSample s = fixture_sample(f, rng, seed * 1000003ULL + static_cast<std::uint64_t>(i));
        const ControlLaw law = control_law(s.x, s.next, s.step, f.controller);
        const QuadratureOracle q = gamma_quadrature_oracle(s.x, s.next, s.step, f.controller);
        worst_v = std::max(worst_v, std::abs(law.v - q.argmax_u));
        worst_r = std::max(worst_r, std::abs(law.r - q.variance) / law.r);
        ++rep.samples;
    }
    rep.max_error = std::max(worst_v, worst_r);
    rep.passed = worst_v <= tolerance && worst_r <= tolerance;
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << "(|v - argmax| " << worst_v << ", |R - var|/R " << worst_r << ")";
    rep.detail = os.str();
    return rep;
}

OracleReport check_cost_to_go(int samples, std::uint64_t seed, double tolerance) {
    const SpinHalfFixture f = SpinHalfFixture::make();
    std::mt19937_64 rng(seed);
    OracleReport rep;
    rep.name = "cost-to-go";
    rep.tolerance = tolerance;
    for (int i = 0; i < samples; ++i) {
        const FixtureSample s = fixture_sample(f, rng, seed * 1000003ULL + static_cast<std::uint64_t>(i));
        RiccatiState prev = riccati_step(s.next, s.step, f.controller);
        prev.omega = omega_step(s.next, s.step, f.controller).value;
        const double closed = gamma_closed_form(s.x, prev);
        const QuadratureOracle q = gamma_quadrature_oracle(s.x, s.next, s.step, f.controller);
        rep.max_error = std::max(rep.max_error, std::abs(closed - q.neg_log_gamma) / std::max(1.0, std::abs(q.neg_log_gamma)));
        ++rep.samples;
    }
    rep.passed = rep.max_error <= tolerance;
    rep.detail = "(relative to max(1, |-ln gamma|))";
    return rep;
}

OracleReport check_morse_orthonormality(double tolerance) {
    const MorseParameters p = MorseParameters::lithium_hydride();
    const MatrixXd s = morse_overlap(p);
    OracleReport rep;
    rep.name = "morse-orthonormality";
    rep.tolerance = tolerance;
    rep.max_error = (s - MatrixXd::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
    rep.samples = static_cast<int>(s.size());
    rep.passed = rep.max_error <= tolerance;
    return rep;
}

OracleReport check_quadrature_refinement(double tolerance) {
    const MorseParameters p = MorseParameters::lithium_hydride();
    const TargetGaussian t;
    QuadratureOptions fine;
    fine.panels = 2 * fine.panels;
    fine.tolerance = 1e-14;
    fine.max_subdivisions = 20000;
    const double dipole = (dipole_matrix(p) - dipole_matrix(p, fine)).cwiseAbs().maxCoeff();
    const double target = (gaussian_target(p, t) - gaussian_target(p, t, fine)).cwiseAbs().maxCoeff();
    OracleReport rep;
    rep.name = "quadrature-refinement";
    rep.tolerance = tolerance;
    rep.max_error = std::max(dipole, target);
    rep.samples = 2;
    rep.passed = rep.max_error <= tolerance;
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << "(dipole " << dipole << ", gaussian target " << target << ")";
    rep.detail = os.str();
    return rep;
}

OracleReport check_morse_level_count() {
    const int n = morse_level_count(MorseParameters::lithium_hydride());
    OracleReport rep;
    rep.name = "morse-level-count";
    rep.tolerance = 0.0;
    rep.max_error = std::abs(n - 3);
    rep.samples = 1;
    rep.passed = n == 3;
    rep.detail = "(" + std::to_string(n) + " levels)";
    return rep;
}

std::vector<std::string> oracle_names() {
    return {"dynamics-rk4", "control-law", "cost-to-go", "morse-orthonormality", "quadrature-refinement",
            "morse-level-count"};
}

OracleReport run_oracle(const std::string& name) {
    if (name == "dynamics-rk4") {
        const ScenarioConfig cfg = *builtin_scenario("spin-half");
        const ScenarioRun run = run_scenario(cfg);
        return check_dynamics_rk4(spin_half_system(), level_projector(2, cfg.initial_level), run.trajectory.controls,
                                  cfg.dt, cfg.plant);
    }
    if (name == "control-law") return check_control_law();
    if (name == "cost-to-go") return check_cost_to_go();
    if (name == "morse-orthonormality") return check_morse_orthonormality();
    if (name == "quadrature-refinement") return check_quadrature_refinement();
    if (name == "morse-level-count") return check_morse_level_count();
    throw ValidationError("unknown oracle '" + name + "'");
}

}  // namespace fpqc
