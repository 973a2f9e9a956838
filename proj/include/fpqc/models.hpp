#pragma once

// Benchmark systems: a Morse oscillator (LiH) and two spin systems.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "fpqc/dynamics.hpp"
#include "fpqc/types.hpp"

namespace fpqc {

namespace units {
inline constexpr double kHartreePerEv = 1.0 / 27.211386245988;
inline constexpr double kBohrPerAngstrom = 1.0 / 0.529177210903;
inline constexpr double kElectronMassKg = 9.1093837015e-31;
// 1 D = 3.335640952e-30 C m, e a0 = 8.4783536255e-30 C m
inline constexpr double kEBohrPerDebye = 3.335640952e-30 / 8.4783536255e-30;
}  // namespace units

// Spectroscopic inputs: eV, angstrom, kg, 1/angstrom, Debye.
struct MorseParameters {
    double d0 = 2.45090;
    double r_eq = 2.379;
    double reduced_mass = 2.5986e-27;
    double alpha = 13.956;
    double nu = 6.1346;
    double mu0 = 5.8677;
    double r_star = 1.595;

    static MorseParameters lithium_hydride() { return {}; }
    void validate() const;
};

// Same quantities in atomic units: hartree, bohr, electron masses, 1/bohr, e*bohr.
struct MorseAtomic {
    double d0;
    double r_eq;
    double reduced_mass;
    double alpha;
    double nu;
    double mu0;
    double r_star;
};

MorseAtomic atomic_units(const MorseParameters& p);

// Gaussian window (gamma0/sqrt(pi)) exp(-gamma0^2 (r - r')^2); 1/angstrom and angstrom.
struct TargetGaussian {
    double gamma0 = 47.2590;
    double r_prime = 2.4871;
    void validate() const;
};

// Number of levels carried by the model, floor((nu - 1)/2) + 1.
int morse_level_count(const MorseParameters& p);

// E_n = -alpha^2 / (2 m) ((nu - 1)/2 - n)^2 in hartree (n may be fractional).
double morse_energy(const MorseParameters& p, double n);
VectorXd morse_energies(const MorseParameters& p);

// Generalized Laguerre L_n^a(y) by the three-term recurrence. The result is
// value * exp(log_scale); the pair is renormalised whenever |value| > 1e100.
template <typename Real>
struct ScaledValue {
    Real value;
    Real log_scale;
    Real get() const { return value * std::exp(log_scale); }
};

template <typename Real>
ScaledValue<Real> generalized_laguerre_scaled(int n, Real a, Real y) {
    Real prev = 1;
    if (n == 0) return {prev, 0};
    Real cur = 1 + a - y;
    Real log_scale = 0;
    for (int k = 1; k < n; ++k) {
        const Real next = ((2 * k + 1 + a - y) * cur - (k + a) * prev) / (k + 1);
        prev = cur;
        cur = next;
        if (std::abs(cur) > Real(1e100)) {
            cur *= Real(1e-100);
            prev *= Real(1e-100);
            log_scale += std::log(Real(1e100));
        }
    }
    return {cur, log_scale};
}

template <typename Real>
Real generalized_laguerre(int n, Real a, Real y) {
    return generalized_laguerre_scaled(n, a, y).get();
}

// Normalised eigenfunction psi_n(r), r in bohr, result in bohr^-1/2.
double morse_wavefunction(const MorseParameters& p, int n, double r_bohr);
std::vector<double> morse_wavefunction(const MorseParameters& p, int n,
                                       const std::vector<double>& r_bohr);

struct QuadratureOptions {
    double tolerance = 1e-12;  // summed error estimate relative to int |integrand|
    int panels = 64;           // initial equal panels over the support
    int max_subdivisions = 4000;
};

// Interval in bohr outside which every bound eigenfunction is below 1e-13 of its peak.
std::pair<double, double> morse_support(const MorseParameters& p);

// Globally adaptive Gauss-Kronrod (61-point) integral of f(r) psi_n(r) psi_m(r) over the support,
// split into equal panels plus any extra breakpoints (bohr).
double morse_matrix_element(const MorseParameters& p, int n, int m,
                            const std::function<double(double)>& f,
                            const QuadratureOptions& opt = {},
                            const std::vector<double>& breakpoints = {});

// int psi_n psi_m dr for all pairs (n, m).
MatrixXd morse_overlap(const MorseParameters& p, const QuadratureOptions& opt = {});

// mu(r) = mu0 (r / a0) exp(-r / r*), in e*bohr.
double morse_dipole_function(const MorseAtomic& a, double r_bohr);
MatrixXd dipole_matrix(const MorseParameters& p, const QuadratureOptions& opt = {});

// Target observable in bohr^-1 (the window integrates to one over r).
double gaussian_window(const TargetGaussian& t, double r_bohr);
MatrixXd gaussian_target(const MorseParameters& p, const TargetGaussian& t,
                         const QuadratureOptions& opt = {});

PhysicalSystem morse_system(const MorseParameters& p, const QuadratureOptions& opt = {});

// H = sigma3/2 + (sigma1 + sigma2) u / 2 on the basis (|->, |+>).
PhysicalSystem spin_half_system();
// H0 = diag(3/2, 1, 0) on (|-1>, |0>, |1>) with the field coupling every level to |1>.
PhysicalSystem spin_one_system();

CMatrix level_projector(int levels, int level);

}  // namespace fpqc
