#include "fpqc/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <tuple>

#include "fpqc/errors.hpp"
#include "fpqc/state.hpp"

namespace fpqc {

void ControllerConfig::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(g_r)) throw ParameterError("controller: g_r must be positive");
    if (!positive(g)) throw ParameterError("controller: g must be positive");
    if (!positive(omega)) throw ParameterError("controller: omega must be positive");
    if (!std::isfinite(u_r)) throw ParameterError("controller: u_r must be finite");
    if (!std::isfinite(o_d)) throw ParameterError("controller: o_d must be finite");
    if (horizon < 1) throw ParameterError("controller: horizon must be at least 1");
}

namespace {

void check_dims(const RiccatiState& next, const LinearizedStep& step) {
    const Eigen::Index n = step.a.rows();
    if (step.a.cols() != n || step.b.size() != n || step.d.size() != n || next.m.rows() != n ||
        next.m.cols() != n || next.p.size() != n) {
        throw ValidationError("controller: dimension mismatch between Riccati state and step data");
    }
}

// `scale` is the magnitude of the terms that were summed to get `value`; the
// rounding residue is judged against it rather than against the result.
double real_checked(cplx value, const char* what, double scale = 0.0) {
    if (std::abs(value.imag()) > 1e-9 * std::max({1.0, std::abs(value.real()), scale})) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " has imaginary residue %.3e (real part %.6e)", value.imag(), value.real());
        throw StructuralError(std::string(what) + buf);
    }
    return value.real();
}

RiccatiState step_from_terms(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg,
                             const StepTerms& t) {
    if (!(t.s.real() > 0.0) || !std::isfinite(t.s.real())) {
        throw CurvatureError("controller: curvature S = " + std::to_string(t.s.real()) + " is not positive");
    }
    RiccatiState out;
    const CMatrix qa = t.q * step.a;
    out.m.noalias() = step.a.transpose() * qa;
    out.m.noalias() -= t.btqa.transpose() * (t.btqa / t.s);
    out.m = 0.5 * (out.m + out.m.transpose()).eval();
    out.p.noalias() = (next.p - (2.0 * cfg.o_d / cfg.g_r) * step.d) * step.a;
    out.p += (2.0 * t.h_numerator / t.s) * t.btqa;
    return out;
}

}  // namespace

StepTerms step_terms(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg) {
    check_dims(next, step);
    StepTerms t;
    t.q = next.m;
    t.q.noalias() += step.d.transpose() * (step.d / cfg.g_r);
    const CRowVector btq = step.b.transpose() * t.q;
    t.s = 1.0 / cfg.omega + (btq * step.b)(0);
    t.btqa.noalias() = btq * step.a;
    const cplx pb = (next.p * step.b)(0);
    const cplx db = (step.d * step.b)(0);
    t.h_numerator = cfg.u_r / cfg.omega - 0.5 * pb + db * (cfg.o_d / cfg.g_r);
    return t;
}

RiccatiState riccati_step(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg) {
    return step_from_terms(next, step, cfg, step_terms(next, step, cfg));
}

void ComplexNormalParams::validate() const {
    const Eigen::Index n = mean.size();
    if (gamma_cov.rows() != n || gamma_cov.cols() != n || c_rel.rows() != n || c_rel.cols() != n) {
        throw ValidationError("complex normal: dimension mismatch");
    }
    if (hermiticity_defect(gamma_cov) > 1e-12) throw ValidationError("complex normal: covariance not Hermitian");
    if ((c_rel - c_rel.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ValidationError("complex normal: pseudo-covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (gamma_cov + gamma_cov.adjoint()), Eigen::EigenvaluesOnly);
    if (n > 0 && eig.eigenvalues().minCoeff() < -1e-12) {
        throw ValidationError("complex normal: covariance not positive semidefinite");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double bound = std::sqrt(std::max(0.0, gamma_cov(i, i).real() * gamma_cov(j, j).real()));
            if (std::abs(c_rel(i, j)) > bound * (1.0 + 1e-12) + 1e-15) {
                throw ValidationError("complex normal: pseudo-covariance violates Cauchy-Schwarz");
            }
        }
    }
}

double ComplexNormalParams::log_density(const CVector& z) const {
    const Eigen::Index n = mean.size();
    if (z.size() != n) throw ValidationError("complex normal: dimension mismatch");
    CMatrix aug(2 * n, 2 * n);
    aug << gamma_cov, c_rel, c_rel.conjugate(), gamma_cov.conjugate();
    CVector d(2 * n);
    d << z - mean, (z - mean).conjugate();
    Eigen::FullPivLU<CMatrix> lu(aug);
    if (!lu.isInvertible()) throw ValidationError("complex normal: augmented covariance is singular");
    const cplx quad = (d.adjoint() * lu.solve(d))(0);
    const double log_det = std::log(std::abs(lu.determinant()));
    return -static_cast<double>(n) * std::log(M_PI) - 0.5 * log_det - 0.5 * quad.real();
}

std::optional<CMatrix> ComplexNormalParams::derived_c() const {
    const double det_gamma = std::abs(gamma_cov.determinant());
    const double det_c = std::abs(c_rel.determinant());
    const double denom = det_gamma * det_gamma - det_c * det_c;
    if (!(std::abs(denom) > 1e-300) || !std::isfinite(denom)) return std::nullopt;
    return CMatrix(c_rel / denom);
}

OmegaTerms omega_step(const RiccatiState& next, const LinearizedStep& step, const ControllerConfig& cfg,
                      const ComplexNormalParams* noise) {
    const StepTerms t = step_terms(next, step, cfg);
    if (!(t.s.real() > 0.0)) throw CurvatureError("controller: curvature S is not positive");
    OmegaTerms out;
    double w = next.omega.value_or(0.0);
    w += cfg.o_d * cfg.o_d / cfg.g_r;
    w += std::log(cfg.g_r / cfg.g);
    w -= 1.0 - cfg.g / cfg.g_r;
    if (noise != nullptr) {
        if (auto c = noise->derived_c()) {
            Eigen::FullPivLU<CMatrix> lu(c->conjugate());
            if (lu.isInvertible()) {
                w -= real_checked((lu.inverse() * t.q).trace(), "noise trace term");
                out.noise_term_included = true;
            }
        }
    }
    w += cfg.u_r * cfg.u_r / cfg.omega;
    w -= real_checked(t.h_numerator * t.h_numerator / t.s, "omega quadratic term");
    w += std::log(cfg.omega) + std::log(real_checked(t.s, "curvature S"));
    out.value = w;
    return out;
}

RiccatiState random_riccati_state(int levels, std::uint64_t seed) {
    const int n = levels * levels;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = uni(rng);
    const MatrixXd r = g.transpose() * g / n;
    Eigen::RowVectorXd pr(n);
    for (Eigen::Index i = 0; i < n; ++i) pr(i) = uni(rng);
    return {quadratic_from_real(r), linear_from_real(pr), 0.0};
}

namespace {

void project_onto_trace_zero(RiccatiState& st, const CVector& xe, int levels) {
    // M <- Pi^T M Pi, P <- P Pi with Pi = I - x_e l, l the trace row.
    const CVector mx = st.m * xe;
    const CRowVector xm = xe.transpose() * st.m;
    const cplx c = (xe.transpose() * mx)(0);
    for (Eigen::Index j = 0; j < levels; ++j) st.m.col(j) -= mx;
    for (Eigen::Index i = 0; i < levels; ++i) st.m.row(i) -= xm;
    st.m.topLeftCorner(levels, levels).array() += c;
    const cplx px = (st.p * xe)(0);
    st.p.head(levels).array() -= px;
}

double gain_residual(const StepTerms& a, const StepTerms& b) {
    const double kb = (b.btqa / b.s).cwiseAbs().maxCoeff();
    const double dk = (a.btqa / a.s - b.btqa / b.s).cwiseAbs().maxCoeff();
    const double hb = std::abs(b.h_numerator / b.s);
    const double dh = std::abs(a.h_numerator / a.s - b.h_numerator / b.s);
    const double ds = std::abs(a.s - b.s);
    return std::max({dk / std::max(1.0, kb), dh / std::max(1.0, hb), ds / std::max(1.0, std::abs(b.s))});
}

}  // namespace

namespace {

// Rounding slowly breaks the conjugate-pair structure over long iterations;
// map M, P to their real forms and back.
void restore_real_structure(RiccatiState& state) {
    state.m = quadratic_from_real(realify_quadratic(state.m));
    state.p = linear_from_real(realify_linear(state.p));
}

constexpr int kStructureRestoreInterval = 256;

}  // namespace

SteadyIndex steady_index(const LinearizedStep& step, const ControllerConfig& cfg, const SteadyOptions& opt,
                         const RiccatiState* start) {
    const Eigen::Index n = step.a.rows();
    const int levels = levels_from_length(n);
    if (opt.project_trace && opt.x_equilibrium.size() != n) {
        throw ValidationError("steady_index: trace projection needs the equilibrium vector");
    }
    SteadyIndex out;
    switch (opt.init) {
        case RiccatiInit::Zero: out.state = RiccatiState::zero(n); break;
        case RiccatiInit::Random: out.state = random_riccati_state(levels, opt.seed); break;
        case RiccatiInit::Given:
            if (start == nullptr) throw ValidationError("steady_index: given init needs a start state");
            out.state = *start;
            break;
    }
    if (opt.init != RiccatiInit::Given && start != nullptr) out.state = *start;
    restore_real_structure(out.state);
    if (opt.project_trace) project_onto_trace_zero(out.state, opt.x_equilibrium, levels);

    StepTerms prev = step_terms(out.state, step, cfg);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        out.state = step_from_terms(out.state, step, cfg, prev);
        if (it % kStructureRestoreInterval == 0) restore_real_structure(out.state);
        if (opt.project_trace) project_onto_trace_zero(out.state, opt.x_equilibrium, levels);
        StepTerms cur = step_terms(out.state, step, cfg);
        const double res = gain_residual(cur, prev);
        out.residuals.push_back(res);
        prev = std::move(cur);
        if (!std::isfinite(res)) break;
        if (res <= opt.tolerance || (opt.accept_unconverged && it == opt.max_iterations)) {
            out.iterations = it;
            out.residual = res;
            out.converged = res <= opt.tolerance;
            restore_real_structure(out.state);
            if (opt.project_trace) project_onto_trace_zero(out.state, opt.x_equilibrium, levels);
            if (!opt.record_residuals) out.residuals.clear();
            return out;
        }
    }
    std::vector<double> tail(out.residuals.end() - std::min<std::ptrdiff_t>(64, out.residuals.size()),
                             out.residuals.end());
    throw NonConvergence("steady_index: no fixed point after " + std::to_string(out.residuals.size()) +
                             " iterations (last residual " +
                             std::to_string(out.residuals.empty() ? 0.0 : out.residuals.back()) + ")",
                         std::move(tail));
}

ControlLaw control_law(const CVector& x, const RiccatiState& next, const LinearizedStep& step,
                       const ControllerConfig& cfg) {
    if (x.size() != step.a.cols()) throw ValidationError("control_law: state dimension mismatch");
    const StepTerms t = step_terms(next, step, cfg);
    const double s = real_checked(t.s, "curvature S");
    if (!(s > 0.0)) throw CurvatureError("control_law: curvature S is not positive");
    const cplx feedback = (t.btqa * x)(0);
    const cplx v = (t.h_numerator - feedback) / t.s;
    const double scale = (std::abs(t.h_numerator) + t.btqa.cwiseAbs().dot(x.cwiseAbs())) / s;
    ControlLaw law;
    law.v = real_checked(v, "control mean v", scale);
    law.r = 1.0 / s;
    return law;
}

double gamma_closed_form(const CVector& x, const RiccatiState& state) {
    const cplx q = 0.5 * (x.transpose() * state.m * x)(0) + 0.5 * (state.p * x)(0);
    return real_checked(q, "cost-to-go") + 0.5 * state.omega.value_or(0.0);
}

double beta_value(double u, const CVector& x, const RiccatiState& next, const LinearizedStep& step,
                  const ControllerConfig& cfg, const ComplexNormalParams* noise) {
    check_dims(next, step);
    const CVector mu = step.a * x + step.b * u;
    const CMatrix q = step.d.transpose() * step.d / cfg.g_r + next.m;
    cplx value = 0.5 * (mu.transpose() * q * mu)(0);
    value += 0.5 * ((next.p - (2.0 * cfg.o_d / cfg.g_r) * step.d) * mu)(0);
    double constant = 0.5 * next.omega.value_or(0.0) + 0.5 * cfg.o_d * cfg.o_d / cfg.g_r +
                      0.5 * std::log(cfg.g_r / cfg.g) - 0.5 * (1.0 - cfg.g / cfg.g_r);
    if (noise != nullptr) {
        if (auto c = noise->derived_c()) {
            Eigen::FullPivLU<CMatrix> lu(c->conjugate());
            if (lu.isInvertible()) constant -= 0.5 * real_checked((lu.inverse() * q).trace(), "noise trace term");
        }
    }
    return real_checked(value, "beta") + constant;
}

QuadratureOracle gamma_quadrature_oracle(const CVector& x, const RiccatiState& next, const LinearizedStep& step,
                                         const ControllerConfig& cfg, const ComplexNormalParams* noise,
                                         const OracleOptions& opt) {
    // log of N(u; u_r, Omega) exp(-beta(u, x))
    auto log_integrand = [&](double u) {
        const double du = u - cfg.u_r;
        return -0.5 * du * du / cfg.omega - 0.5 * std::log(2.0 * M_PI * cfg.omega) -
               beta_value(u, x, next, step, cfg, noise);
    };

    const int grid = std::max(opt.initial_points, 17);
    double lo = cfg.u_r - 10.0 * std::sqrt(cfg.omega);
    double hi = cfg.u_r + 10.0 * std::sqrt(cfg.omega);
    auto grid_best = [&](double a, double b) {
        double best_u = a;
        double best_f = -std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < grid; ++i) {
            const double u = a + (b - a) * i / (grid - 1);
            const double f = log_integrand(u);
            if (f > best_f) {
                best_f = f;
                best_u = u;
                best_i = i;
            }
        }
        return std::tuple<double, double, int>(best_u, best_f, best_i);
    };

    // Widen the window until the maximiser is interior.
    auto [u_best, f_best, i_best] = grid_best(lo, hi);
    for (int widen = 0; (i_best == 0 || i_best == grid - 1) && widen < 60; ++widen) {
        const double w = hi - lo;
        lo = u_best - 2.0 * w;
        hi = u_best + 2.0 * w;
        std::tie(u_best, f_best, i_best) = grid_best(lo, hi);
    }
    if (i_best == 0 || i_best == grid - 1) {
        throw AccuracyError("gamma oracle: integrand maximum not bracketed", hi - lo);
    }

    // Zoom the grid around the best node.
    double spacing = (hi - lo) / (grid - 1);
    for (int zoom = 0; zoom < 80 && spacing > 1e-14 * std::max(1.0, std::abs(u_best)); ++zoom) {
        const double a = u_best - 4.0 * spacing;
        const double b = u_best + 4.0 * spacing;
        double nu;
        double nf;
        int ni;
        std::tie(nu, nf, ni) = grid_best(a, b);
        if (nf < f_best) break;
        u_best = nu;
        f_best = nf;
        spacing = (b - a) / (grid - 1);
    }

    // Curvature from a centred second difference, step set by a first estimate.
    auto second_difference = [&](double h) {
        return (2.0 * log_integrand(u_best) - log_integrand(u_best + h) - log_integrand(u_best - h)) / (h * h);
    };
    double curvature = second_difference(std::max(1e-3 * std::max(1.0, std::abs(u_best)), 1e-6));
    if (!(curvature > 0.0)) throw CurvatureError("gamma oracle: integrand exponent is not concave");
    curvature = second_difference(1.0 / std::sqrt(curvature));
    if (!(curvature > 0.0)) throw CurvatureError("gamma oracle: integrand exponent is not concave");

    QuadratureOracle out;
    out.argmax_u = u_best;
    out.variance = 1.0 / curvature;

    // Trapezoid rule on +-K sigma, doubled until the log-integral settles.
    const double sigma = std::sqrt(out.variance);
    const double a = u_best - opt.half_width_sigmas * sigma;
    const double b = u_best + opt.half_width_sigmas * sigma;
    auto log_trapezoid = [&](int points) {
        std::vector<double> f(static_cast<std::size_t>(points));
        double fmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < points; ++i) {
            f[static_cast<std::size_t>(i)] = log_integrand(a + (b - a) * i / (points - 1));
            fmax = std::max(fmax, f[static_cast<std::size_t>(i)]);
        }
        double sum = 0.0;
        for (int i = 0; i < points; ++i) {
            const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
            sum += w * std::exp(f[static_cast<std::size_t>(i)] - fmax);
        }
        return fmax + std::log(sum * (b - a) / (points - 1));
    };
    int points = opt.initial_points;
    double prev = log_trapezoid(points);
    for (;;) {
        const int next_points = 2 * points - 1;
        const double cur = log_trapezoid(next_points);
        points = next_points;
        if (std::abs(cur - prev) <= opt.relative_tolerance * std::max(1.0, std::abs(cur))) {
            prev = cur;
            break;
        }
        prev = cur;
        if (points > opt.max_points) throw AccuracyError("gamma oracle: trapezoid rule did not settle", 0.0);
    }
    out.neg_log_gamma = -prev;
    out.grid_points = points;
    return out;
}

}  // namespace fpqc
