#include "fpqc/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fpqc/errors.hpp"

namespace fpqc {

void MorseParameters::validate() const {
    const double fields[] = {d0, r_eq, reduced_mass, alpha, nu, mu0, r_star};
    for (double f : fields) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ParameterError("Morse parameters must be positive and finite");
        }
    }
    if (nu <= 1.0) throw ParameterError("Morse parameter nu <= 1: no bound states");
}

void TargetGaussian::validate() const {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
        throw ParameterError("Gaussian target width gamma0 must be positive");
    }
    if (!std::isfinite(r_prime)) throw ParameterError("Gaussian target centre must be finite");
}

MorseAtomic atomic_units(const MorseParameters& p) {
    MorseAtomic a;
    a.d0 = p.d0 * units::kHartreePerEv;
    a.r_eq = p.r_eq * units::kBohrPerAngstrom;
    a.reduced_mass = p.reduced_mass / units::kElectronMassKg;
    a.alpha = p.alpha / units::kBohrPerAngstrom;
    a.nu = p.nu;
    a.mu0 = p.mu0 * units::kEBohrPerDebye;
    a.r_star = p.r_star * units::kBohrPerAngstrom;
    return a;
}

int morse_level_count(const MorseParameters& p) {
    if (p.nu <= 1.0) throw ParameterError("Morse parameter nu <= 1: no bound states");
    return static_cast<int>(std::floor((p.nu - 1.0) / 2.0)) + 1;
}

double morse_energy(const MorseParameters& p, double n) {
    const MorseAtomic a = atomic_units(p);
    const double q = (a.nu - 1.0) / 2.0 - n;
    return -a.alpha * a.alpha / (2.0 * a.reduced_mass) * q * q;
}

VectorXd morse_energies(const MorseParameters& p) {
    p.validate();
    const int l = morse_level_count(p);
    VectorXd e(l);
    for (int n = 0; n < l; ++n) e(n) = morse_energy(p, n);
    return e;
}

namespace {

void check_level(const MorseParameters& p, int n) {
    const int l = morse_level_count(p);
    if (n < 0 || n >= l) {
        throw ParameterError("Morse level " + std::to_string(n) + " outside 0.." + std::to_string(l - 1));
    }
}

struct WavefunctionEvaluator {
    MorseAtomic a;
    int n;
    double s;
    double log_norm;

    WavefunctionEvaluator(const MorseParameters& p, int level) : a(atomic_units(p)), n(level) {
        check_level(p, level);
        s = (a.nu - 1.0) / 2.0 - n;
        log_norm = 0.5 * (std::log(a.alpha) + std::log(a.nu - 2.0 * n - 1.0) +
                          std::lgamma(n + 1.0) - std::lgamma(a.nu - n));
    }

    double operator()(double r) const {
        const double y = a.nu * std::exp(-a.alpha * (r - a.r_eq));
        if (!(y > 0.0) || !std::isfinite(y)) return 0.0;
        const auto lag = generalized_laguerre_scaled(n, 2.0 * s, y);
        if (lag.value == 0.0) return 0.0;
        const double log_mag =
            log_norm - 0.5 * y + s * std::log(y) + std::log(std::abs(lag.value)) + lag.log_scale;
        return std::copysign(std::exp(log_mag), lag.value);
    }
};

}  // namespace

double morse_wavefunction(const MorseParameters& p, int n, double r_bohr) {
    return WavefunctionEvaluator(p, n)(r_bohr);
}

std::vector<double> morse_wavefunction(const MorseParameters& p, int n, const std::vector<double>& r_bohr) {
    const WavefunctionEvaluator psi(p, n);
    std::vector<double> out;
    out.reserve(r_bohr.size());
    for (double r : r_bohr) out.push_back(psi(r));
    return out;
}

std::pair<double, double> morse_support(const MorseParameters& p) {
    p.validate();
    const MorseAtomic a = atomic_units(p);
    const int l = morse_level_count(p);
    std::vector<WavefunctionEvaluator> psi;
    for (int n = 0; n < l; ++n) psi.emplace_back(p, n);
    const double h = 0.01 / a.alpha;
    auto envelope = [&](double r) {
        double m = 0.0;
        for (const auto& f : psi) m = std::max(m, std::abs(f(r)));
        return m;
    };
    double peak = 0.0;
    for (double r = a.r_eq - 3.0 / a.alpha; r <= a.r_eq + 10.0 / a.alpha; r += h) {
        peak = std::max(peak, envelope(r));
    }
    const double floor = 1e-13 * peak;
    // Walk outward until the envelope has stayed below the floor for a full width 1/alpha.
    auto walk = [&](double dir) {
        double r = a.r_eq;
        double quiet = 0.0;
        while (quiet < 1.0 / a.alpha) {
            r += dir * h;
            quiet = envelope(r) < floor ? quiet + h : 0.0;
            if (std::abs(r - a.r_eq) > 1e4 / a.alpha) {
                throw AccuracyError("Morse support search did not terminate", std::abs(r - a.r_eq));
            }
        }
        return r;
    };
    return {walk(-1.0), walk(1.0)};
}

double morse_matrix_element(const MorseParameters& p, int n, int m, const std::function<double(double)>& f,
                            const QuadratureOptions& opt, const std::vector<double>& breakpoints) {
    const WavefunctionEvaluator psi_n(p, n);
    const WavefunctionEvaluator psi_m(p, m);
    const auto [lo, hi] = morse_support(p);
    std::vector<double> cuts;
    const int panels = std::max(1, opt.panels);
    for (int i = 0; i <= panels; ++i) cuts.push_back(lo + (hi - lo) * i / panels);
    for (double b : breakpoints) {
        if (b > lo && b < hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    // Slivers between a breakpoint and a neighbouring panel edge give unreliable
    // Kronrod error estimates; fold them into the neighbour.
    const double min_width = 1e-2 * (hi - lo) / panels;
    std::vector<double> merged{cuts.front()};
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i) {
        if (cuts[i] - merged.back() >= min_width && cuts.back() - cuts[i] >= min_width) merged.push_back(cuts[i]);
    }
    merged.push_back(cuts.back());
    cuts = std::move(merged);

    auto integrand = [&](double r) { return f(r) * psi_n(r) * psi_m(r); };
    struct Panel {
        double a, b, value, error, l1;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto rule = [&](double a, double b) {
        Panel pn{a, b, 0.0, 0.0, 0.0};
        pn.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 0, 0.0, &pn.error,
                                                                                 &pn.l1);
        return pn;
    };
    // Globally adaptive: bisect the panel with the largest error estimate until
    // the summed estimate is below tolerance * int |integrand|.
    std::priority_queue<Panel> queue;
    double error = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Panel pn = rule(cuts[i], cuts[i + 1]);
        error += pn.error;
        l1 += pn.l1;
        queue.push(pn);
    }
    for (int split = 0; split < opt.max_subdivisions && error > opt.tolerance * l1 && !queue.empty(); ++split) {
        const Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Panel left = rule(worst.a, mid);
        const Panel right = rule(mid, worst.b);
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        queue.push(left);
        queue.push(right);
    }
    // Sum small contributions first.
    std::vector<double> values;
    error = 0.0;
    while (!queue.empty()) {
        values.push_back(queue.top().value);
        error += queue.top().error;
        queue.pop();
    }
    std::sort(values.begin(), values.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    double total = 0.0;
    for (double v : values) total += v;
    if (!(error <= 1e-10 * std::max(1.0, l1)) || !std::isfinite(total)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", error);
        throw AccuracyError("Morse matrix element <" + std::to_string(n) + "|f|" + std::to_string(m) +
                                "> did not reach 1e-10 (error estimate " + buf + ")",
                            error);
    }
    return total;
}

namespace {

MatrixXd symmetric_matrix_elements(const MorseParameters& p, const std::function<double(double)>& f,
                                   const QuadratureOptions& opt, const std::vector<double>& breakpoints) {
    const int l = morse_level_count(p);
    MatrixXd out(l, l);
    for (int n = 0; n < l; ++n) {
        for (int m = n; m < l; ++m) {
            out(n, m) = morse_matrix_element(p, n, m, f, opt, breakpoints);
            out(m, n) = out(n, m);
        }
    }
    return out;
}

}  // namespace

MatrixXd morse_overlap(const MorseParameters& p, const QuadratureOptions& opt) {
    return symmetric_matrix_elements(p, [](double) { return 1.0; }, opt, {});
}

double morse_dipole_function(const MorseAtomic& a, double r_bohr) {
    return a.mu0 * r_bohr * std::exp(-r_bohr / a.r_star);
}

MatrixXd dipole_matrix(const MorseParameters& p, const QuadratureOptions& opt) {
    const MorseAtomic a = atomic_units(p);
    return symmetric_matrix_elements(p, [a](double r) { return morse_dipole_function(a, r); }, opt, {});
}

double gaussian_window(const TargetGaussian& t, double r_bohr) {
    const double g = t.gamma0 / units::kBohrPerAngstrom;
    const double c = t.r_prime * units::kBohrPerAngstrom;
    const double d = g * (r_bohr - c);
    return g / std::sqrt(M_PI) * std::exp(-d * d);
}

MatrixXd gaussian_target(const MorseParameters& p, const TargetGaussian& t, const QuadratureOptions& opt) {
    t.validate();
    const double g = t.gamma0 / units::kBohrPerAngstrom;
    const double c = t.r_prime * units::kBohrPerAngstrom;
    std::vector<double> cuts;
    for (double k : {0.0, 0.5, 1.0, 2.0, 3.5, 6.0}) {
        cuts.push_back(c - k / g);
        cuts.push_back(c + k / g);
    }
    return symmetric_matrix_elements(p, [t](double r) { return gaussian_window(t, r); }, opt, cuts);
}

PhysicalSystem morse_system(const MorseParameters& p, const QuadratureOptions& opt) {
    PhysicalSystem sys;
    sys.energies = morse_energies(p);
    sys.dipole = dipole_matrix(p, opt).cast<cplx>();
    sys.hbar = 1.0;
    return sys;
}

PhysicalSystem spin_half_system() {
    PhysicalSystem sys;
    sys.energies = VectorXd(2);
    sys.energies << 0.5, -0.5;
    // mu = -(sigma1 + sigma2)/2 so that -mu u = (sigma1 + sigma2) u / 2
    sys.dipole = CMatrix(2, 2);
    sys.dipole << 0.0, -0.5 * (1.0 - kI), -0.5 * (1.0 + kI), 0.0;
    return sys;
}

PhysicalSystem spin_one_system() {
    PhysicalSystem sys;
    sys.energies = VectorXd(3);
    sys.energies << 1.5, 1.0, 0.0;
    sys.dipole = CMatrix::Zero(3, 3);
    sys.dipole(0, 2) = sys.dipole(2, 0) = -1.0;
    sys.dipole(1, 2) = sys.dipole(2, 1) = -1.0;
    return sys;
}

CMatrix level_projector(int levels, int level) {
    if (level < 0 || level >= levels) {
        throw ParameterError("projector level " + std::to_string(level) + " outside 0.." +
                             std::to_string(levels - 1));
    }
    CMatrix p = CMatrix::Zero(levels, levels);
    p(level, level) = 1.0;
    return p;
}

}  // namespace fpqc
