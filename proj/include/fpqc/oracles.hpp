#pragma once

// Independent reference computations used to cross-check the fast paths:
// an RK4 integrator of the element-wise master equation, quadrature of the
// cost-to-go integral, and Morse quadrature self-consistency.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fpqc/control.hpp"
#include "fpqc/dynamics.hpp"

namespace fpqc {

// d rho / dt from the element-wise Lindblad equation with H = diag(E) - mu u:
//   d rho_nm/dt = -i w_nm rho_nm - gamma_nm rho_nm (n != m)
//                 + delta_nm (sum_k Gamma_{k->n} rho_kk - sum_k Gamma_{n->k} rho_nn)
//                 + (i u / hbar) sum_k (mu_nk rho_km - rho_nk mu_km)
CMatrix master_equation_rhs(const PhysicalSystem& sys, const CMatrix& rho, double u);

// Classical RK4 with `substeps` equal steps over `duration` at fixed u.
CMatrix rk4_propagate(const PhysicalSystem& sys, const CMatrix& rho, double u, double duration, int substeps);

// rho = G G^H / Tr(G G^H) with complex Gaussian G: full rank, generic.
CMatrix random_density_matrix(int levels, std::mt19937_64& rng);

struct OracleReport {
    std::string name;
    bool passed = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    int samples = 0;
    std::string detail;

    std::string line() const;
};

// Discrete propagation (given plant mode) against RK4 at dt/substeps along a
// piecewise-constant control sequence. Error is the max over steps of the
// max-abs difference of the density matrices.
OracleReport check_dynamics_rk4(const PhysicalSystem& sys, const CMatrix& rho0, const std::vector<double>& controls,
                                double dt, PlantMode mode, int substeps = 1000, double tolerance = 1e-6);

// Data shared by the cost-to-go and control-law checks: the spin-1/2 system
// with dt = 0.0505, target |+><+|, G_r = G = 1e-5, Omega = 1, u_r = 0, o_d = 1.
struct SpinHalfFixture {
    PhysicalSystem system;
    BilinearGenerators generators;
    DiscreteModel model;
    ControllerConfig controller;  // o_d already shifted to the trace-zero coordinates
    CRowVector d0;

    static SpinHalfFixture make();
    LinearizedStep linearize(const CVector& x_shifted) const;
};

// For random states and random positive semidefinite (M, P, omega): argmax of
// the u-integrand and its inverse curvature against control_law's (v, R).
OracleReport check_control_law(int samples = 100, std::uint64_t seed = 1, double tolerance = 1e-4);

// gamma_closed_form after one backward step against the quadrature value of
// -ln int N(u; u_r, Omega) exp(-beta) du. Error is |a - b| / max(1, |b|).
OracleReport check_cost_to_go(int samples = 100, std::uint64_t seed = 2, double tolerance = 1e-6);

// max |<n|m> - delta_nm| for the LiH Morse eigenfunctions.
OracleReport check_morse_orthonormality(double tolerance = 1e-7);

// Dipole and Gaussian-target matrices at default quadrature against a run
// with twice the panels and a tighter per-panel tolerance.
OracleReport check_quadrature_refinement(double tolerance = 1e-8);

// LiH parameters carry exactly three bound levels.
OracleReport check_morse_level_count();

std::vector<std::string> oracle_names();
// Runs the named check with its default settings; throws ValidationError for
// an unknown name.
OracleReport run_oracle(const std::string& name);

}  // namespace fpqc
