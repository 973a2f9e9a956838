#include "fpqc/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace fpqc {

double PhysicalSystem::rate(int k, int j) const {
    if (rates.size() == 0) return 0.0;
    return rates(k, j);
}

double PhysicalSystem::dephasing_rate(int n, int m) const {
    double out = 0.0;
    for (int j = 0; j < levels(); ++j) {
        if (j != n) out += rate(n, j);
        if (j != m) out += rate(m, j);
    }
    return 0.5 * out;
}

void PhysicalSystem::validate() const {
    const int l = levels();
    if (l < 1) throw ValidationError("physical system: no energy levels");
    if (!energies.allFinite()) throw ValidationError("physical system: energies must be finite");
    if (!(hbar > 0.0)) throw ValidationError("physical system: hbar must be positive");
    if (dipole.rows() != l || dipole.cols() != l) {
        throw ValidationError("physical system: dipole must be " + std::to_string(l) + "x" +
                              std::to_string(l));
    }
    if (hermiticity_defect(dipole) > 1e-12) {
        throw ValidationError("physical system: dipole is not Hermitian");
    }
    if (rates.size() != 0) {
        if (rates.rows() != l || rates.cols() != l) {
            throw ValidationError("physical system: rates must be " + std::to_string(l) + "x" +
                                  std::to_string(l));
        }
        if ((rates.array() < 0.0).any() || !rates.allFinite()) {
            throw ValidationError("physical system: rates must be finite and nonnegative");
        }
        if (rates.diagonal().cwiseAbs().maxCoeff() != 0.0) {
            throw ValidationError("physical system: self-transition rates must be zero");
        }
    }
}

CMatrix drift_generator(const PhysicalSystem& sys) {
    sys.validate();
    const int l = sys.levels();
    CMatrix a = CMatrix::Zero(l * l, l * l);
    int r = 0;
    for (const Slot& s : canonical_slots(l)) {
        a(r, r) = cplx(-sys.dephasing_rate(s.row, s.col), -sys.bohr_frequency(s.row, s.col));
        if (s.row == s.col) {
            for (int k = 0; k < l; ++k) {
                if (k != s.row) a(r, slot_index(l, k, k)) += sys.rate(k, s.row);
            }
        }
        ++r;
    }
    return a;
}

CMatrix control_generator(const PhysicalSystem& sys) {
    sys.validate();
    const int l = sys.levels();
    CMatrix n = CMatrix::Zero(l * l, l * l);
    int r = 0;
    // d rho/dt = (i/hbar)(mu rho - rho mu) u, so N~ carries (mu rho - rho mu)/hbar.
    for (const Slot& s : canonical_slots(l)) {
        for (int k = 0; k < l; ++k) {
            n(r, slot_index(l, k, s.col)) += sys.dipole(s.row, k) / sys.hbar;
            n(r, slot_index(l, s.row, k)) -= sys.dipole(k, s.col) / sys.hbar;
        }
        ++r;
    }
    return n;
}

namespace {

bool is_equilibrium(const CMatrix& a, const CVector& x) {
    return x.size() == a.cols() && (a * x).norm() <= 1e-10;
}

std::optional<CVector> equilibrium_from_null_space(const CMatrix& a, int levels) {
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv(0));
    const Eigen::Index n = a.cols();
    // Singular values are sorted descending; scan the null space from the end.
    for (Eigen::Index i = n - 1; i >= 0 && sv(i) <= 1e-10 * scale; --i) {
        CVector v = svd.matrixV().col(i);
        const cplx tr = v.head(levels).sum();
        if (std::abs(tr) < 1e-8) continue;
        v /= tr;
        if (!is_equilibrium(a, v)) continue;
        const VectorXd pops = v.head(levels).real();
        if ((pops.array() >= -1e-9).all() && v.head(levels).imag().cwiseAbs().maxCoeff() <= 1e-9) {
            return v;
        }
    }
    return std::nullopt;
}

}  // namespace

BilinearGenerators build_generators(const PhysicalSystem& sys, const std::optional<CVector>& preferred) {
    BilinearGenerators gen;
    gen.a_tilde = drift_generator(sys);
    gen.n_tilde = control_generator(sys);
    if (preferred && is_equilibrium(gen.a_tilde, *preferred)) {
        gen.x_equilibrium = *preferred;
        return gen;
    }
    auto found = equilibrium_from_null_space(gen.a_tilde, sys.levels());
    if (!found) {
        throw EquilibriumNotFound(
            "no null vector of the drift generator has a valid population distribution");
    }
    gen.x_equilibrium = *found;
    return gen;
}

DiscreteModel discretize(const BilinearGenerators& gen, double dt, const CRowVector& measurement_row) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ParameterError("discretize: sampling period must be positive, got " + std::to_string(dt));
    }
    const Eigen::Index n = gen.a_tilde.rows();
    CMatrix aug = CMatrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = gen.a_tilde * dt;
    aug.topRightCorner(n, n) = CMatrix::Identity(n, n) * dt;
    const CMatrix e = aug.exp();
    DiscreteModel model;
    model.a = e.topLeftCorner(n, n);
    model.phi = e.topRightCorner(n, n);
    model.dt = dt;
    model.measurement_row = measurement_row;
    return model;
}

CVector control_matrix(const DiscreteModel& model, const BilinearGenerators& gen, const CVector& x_shifted) {
    if (x_shifted.size() != gen.n_tilde.cols() || model.phi.cols() != gen.n_tilde.rows()) {
        throw ValidationError("control_matrix: dimension mismatch");
    }
    return model.phi * (kI * (gen.n_tilde * (x_shifted + gen.x_equilibrium)));
}

CRowVector measurement_row(const CMatrix& observable) {
    if (observable.rows() != observable.cols()) {
        throw ValidationError("measurement_row: observable is not square");
    }
    if (hermiticity_defect(observable) > 1e-12) {
        throw ValidationError("measurement_row: observable is not Hermitian");
    }
    // D x = sum_{n,m} o(m,n) rho(n,m), i.e. the slot (n,m) carries o(m,n).
    const int l = static_cast<int>(observable.rows());
    CRowVector d(l * l);
    int i = 0;
    for (const Slot& s : canonical_slots(l)) d(i++) = observable(s.col, s.row);
    return d;
}

CVector propagate(const BilinearGenerators& gen, const DiscreteModel& model, const CVector& x_tilde,
                  double u, PlantMode mode) {
    if (mode == PlantMode::ZeroOrderHold) {
        const CVector x = x_tilde - gen.x_equilibrium;
        const CVector b = control_matrix(model, gen, x);
        return model.a * x + b * u + gen.x_equilibrium;
    }
    if (u == 0.0) return model.a * x_tilde;
    const CMatrix g = (gen.a_tilde + kI * u * gen.n_tilde) * model.dt;
    return g.exp() * x_tilde;
}

}  // namespace fpqc
