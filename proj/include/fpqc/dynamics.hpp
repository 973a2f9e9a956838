#pragma once

// Continuous-time bilinear generators of the Lindblad / Liouville-von Neumann
// equation in vectorized form, dx/dt = (A~ + i u N~) x, and their discretization.

#include <optional>

#include "fpqc/state.hpp"
#include "fpqc/types.hpp"

namespace fpqc {

struct PhysicalSystem {
    VectorXd energies;  // E_n
    CMatrix dipole;     // mu_{n,m}; the field enters as H_u = -mu u
    MatrixXd rates;     // rates(k, j) = Gamma_{k->j}; empty means a closed system
    double hbar = 1.0;

    int levels() const { return static_cast<int>(energies.size()); }
    double bohr_frequency(int n, int m) const { return (energies(n) - energies(m)) / hbar; }
    double rate(int k, int j) const;
    // gamma_{n,m} = (sum_j Gamma_{n->j} + sum_j Gamma_{m->j}) / 2
    double dephasing_rate(int n, int m) const;
    void validate() const;
};

struct BilinearGenerators {
    CMatrix a_tilde;
    CMatrix n_tilde;
    CVector x_equilibrium;

    int levels() const { return levels_from_length(a_tilde.rows()); }
};

struct DiscreteModel {
    CMatrix a;    // exp(A~ dt)
    CMatrix phi;  // int_0^dt exp(A~ s) ds
    double dt = 0.0;
    CRowVector measurement_row;
};

// Generator matrices alone (no equilibrium search).
CMatrix drift_generator(const PhysicalSystem& sys);
CMatrix control_generator(const PhysicalSystem& sys);

// Builds A~, N~ and picks x_e: `preferred` when A~ x_e = 0 holds to 1e-10,
// otherwise a null vector of A~ normalised to unit trace with a valid
// population distribution.
BilinearGenerators build_generators(const PhysicalSystem& sys,
                                    const std::optional<CVector>& preferred = std::nullopt);

DiscreteModel discretize(const BilinearGenerators& gen, double dt,
                         const CRowVector& measurement_row = CRowVector());

// B(x) = phi * i N~ (x + x_e), x being the shifted state x~ - x_e.
CVector control_matrix(const DiscreteModel& model, const BilinearGenerators& gen,
                       const CVector& x_shifted);

// D = vec(o^T)^T, so that D * vectorize(rho) == Tr(rho o).
CRowVector measurement_row(const CMatrix& observable);

// How a control held constant over one sampling interval moves the state.
enum class PlantMode {
    // x~ <- exp((A~ + i u N~) dt) x~, the exact solution for piecewise-constant u.
    Exact,
    // x <- A x + B(x) u with B frozen at the interval start.
    ZeroOrderHold,
};

// Propagates an unshifted state x~ over one interval.
CVector propagate(const BilinearGenerators& gen, const DiscreteModel& model, const CVector& x_tilde,
                  double u, PlantMode mode);

}  // namespace fpqc
