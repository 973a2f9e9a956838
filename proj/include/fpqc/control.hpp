#pragma once

// Gaussian fully probabilistic controller for a scalar field.
//
// With Q = D^T D / G_r + M_t and S = 1/Omega + B^T Q B the cost-to-go
// -ln gamma(x) = 0.5 x^T M x + 0.5 P x + 0.5 omega obeys
//   M_{t-1} = A^T Q A - A^T Q B B^T Q A / S
//   P_{t-1} = (P_t - 2 o_d D / G_r) A + 2 h B^T Q A,  h = (u_r/Omega - 0.5 B^T(P_t^T - 2 D^T o_d/G_r)) / S
// and the optimal randomised control is N(v, 1/S) with v = h - B^T Q A x / S.
// All products use the plain transpose on conjugate-paired vectors; the
// results are real up to rounding.

#include <cstdint>
#include <optional>
#include <vector>

#include "fpqc/dynamics.hpp"
#include "fpqc/types.hpp"

namespace fpqc {

struct ControllerConfig {
    double g_r = 1e-5;    // ideal measurement variance
    double g = 1e-5;      // actual measurement variance
    double omega = 1.0;   // ideal control variance
    double u_r = 0.0;     // ideal control mean
    double o_d = 1.0;     // desired measurement mean
    int horizon = 1;
    void validate() const;
};

// Linear data the controller sees for one step.
struct LinearizedStep {
    CMatrix a;
    CVector b;
    CRowVector d;
};

struct RiccatiState {
    CMatrix m;
    CRowVector p;
    std::optional<double> omega;

    static RiccatiState zero(Eigen::Index n) {
        return {CMatrix::Zero(n, n), CRowVector::Zero(n), 0.0};
    }
};

struct ControlLaw {
    double v = 0.0;
    double r = 0.0;
};

// Scalars shared by the recursions at one step.
struct StepTerms {
    CMatrix q;           // D^T D / G_r + M_t
    cplx s;              // 1/Omega + B^T Q B
    CRowVector btqa;     // B^T Q A
    cplx h_numerator;    // u_r/Omega - 0.5 B^T (P^T - 2 D^T o_d / G_r)
};

StepTerms step_terms(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg);

// One backward step of the M and P recursions; omega is left unset.
RiccatiState riccati_step(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg);

// Complex normal law of the process noise, described by covariance Gamma' =
// E[z z^H] and pseudo-covariance C' = E[z z^T].
struct ComplexNormalParams {
    CVector mean;
    CMatrix gamma_cov;
    CMatrix c_rel;

    void validate() const;
    // Log-density at z (augmented real form); requires a nonsingular augmented covariance.
    double log_density(const CVector& z) const;
    // C = C' (Gamma'^2 - C' conj(C'))^{-1}-style normalisation used by the constant
    // term; empty when the relevant matrix is singular.
    std::optional<CMatrix> derived_c() const;
};

struct OmegaTerms {
    double value = 0.0;
    bool noise_term_included = false;
};

// Constant term of the cost-to-go. The Tr(conj(C)^{-1} Q) contribution is added
// only when `noise` is given and conj(C) is invertible.
OmegaTerms omega_step(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg,
                      const ComplexNormalParams* noise = nullptr);

enum class RiccatiInit { Zero, Random, Given };

struct SteadyOptions {
    RiccatiInit init = RiccatiInit::Zero;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    int max_iterations = 100000;
    // Restrict M and P to the trace-zero subspace through Pi = I - x_e * trace_row.
    bool project_trace = false;
    CVector x_equilibrium;
    bool record_residuals = false;
    // Return the last iterate at max_iterations instead of throwing. Used as a
    // per-step budget when the index is warm-started from the previous step.
    bool accept_unconverged = false;
};

struct SteadyIndex {
    RiccatiState state;
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
    std::vector<double> residuals;
};

// Iterates riccati_step with fixed (A, B, D) until the control-law gains
// (B^T Q A / S, h, S) stop changing to `tolerance` relative.
SteadyIndex steady_index(const LinearizedStep& step, const ControllerConfig& cfg, const SteadyOptions& opt = {},
                         const RiccatiState* start = nullptr);

// Random quadratic / linear coefficients with the conjugate-pair structure of
// a real quadratic form (M = T^T R T, P = r T).
RiccatiState random_riccati_state(int levels, std::uint64_t seed);

ControlLaw control_law(const CVector& x, const RiccatiState& next, const LinearizedStep& step,
                       const ControllerConfig& cfg);

// 0.5 x^T M x + 0.5 P x + 0.5 omega (omega taken as zero when unset).
double gamma_closed_form(const CVector& x, const RiccatiState& state);

// beta(u, x) of the one-step expectation with mu = A x + B u.
double beta_value(double u, const CVector& x, const RiccatiState& next, const LinearizedStep& step,
                  const ControllerConfig& cfg, const ComplexNormalParams* noise = nullptr);

struct QuadratureOracle {
    double neg_log_gamma = 0.0;  // -ln int N(u; u_r, Omega) exp(-beta(u, x)) du
    double argmax_u = 0.0;       // maximiser of the integrand
    double variance = 0.0;       // inverse curvature of -ln(integrand) at the maximiser
    int grid_points = 0;
};

struct OracleOptions {
    double relative_tolerance = 1e-13;
    int initial_points = 257;
    int max_points = 1 << 20;
    double half_width_sigmas = 12.0;
};

// Evaluates the u-integral numerically from beta alone, independently of the
// closed-form recursions.
QuadratureOracle gamma_quadrature_oracle(const CVector& x, const RiccatiState& next, const LinearizedStep& step,
                                         const ControllerConfig& cfg, const ComplexNormalParams* noise = nullptr,
                                         const OracleOptions& opt = {});

}  // namespace fpqc
