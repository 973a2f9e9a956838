#pragma once

// Density matrices and their canonical vectorized form.
//
// Slot order for an l-level system: the l populations first, then for each
// row k = 0..l-2 the upper entries rho(k, k+1..l-1) immediately followed by
// their conjugates rho(k+1..l-1, k). For l = 3 that is
//   00 11 22 01 02 10 20 12 21

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fpqc/errors.hpp"
#include "fpqc/types.hpp"

namespace fpqc {

struct Slot {
    int row;
    int col;
    bool operator==(const Slot&) const = default;
};

std::vector<Slot> canonical_slots(int levels);

// Position of rho(row, col) in the vectorized state.
constexpr int slot_index(int levels, int row, int col) {
    if (row == col) return row;
    const int k = row < col ? row : col;
    const int m = row < col ? col : row;
    const int block = levels + k * (2 * levels - k - 1);
    return row < col ? block + (m - k - 1) : block + (levels - 1 - k) + (m - k - 1);
}

// Slot holding the conjugate partner of `index` (itself for populations).
int partner_slot(int levels, int index);

// l such that l*l == length; throws ValidationError otherwise.
int levels_from_length(Eigen::Index length);

// Row vector with ones on the population slots: trace_row(l) * x == Tr(rho).
CRowVector trace_row(int levels);

struct StateTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-10;
    double eigenvalue_floor = -1e-9;
};

struct StateReport {
    double hermiticity_defect = 0.0;
    double trace_defect = 0.0;
    double min_eigenvalue = 0.0;

    bool hermitian(const StateTolerances& tol = {}) const {
        return hermiticity_defect <= tol.hermiticity;
    }
    bool unit_trace(const StateTolerances& tol = {}) const { return trace_defect <= tol.trace; }
    bool positive(const StateTolerances& tol = {}) const {
        return min_eigenvalue >= tol.eigenvalue_floor;
    }
    bool passes(const StateTolerances& tol = {}) const {
        return hermitian(tol) && unit_trace(tol) && positive(tol);
    }
    std::string describe() const;
};

template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() == 0) return 0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
auto vectorize(const Eigen::MatrixBase<Derived>& rho, typename Derived::RealScalar tol = 1e-12) {
    using Real = typename Derived::RealScalar;
    if (rho.rows() != rho.cols()) {
        throw ValidationError("vectorize: matrix is not square (" + std::to_string(rho.rows()) +
                              "x" + std::to_string(rho.cols()) + ")");
    }
    const auto defect = hermiticity_defect(rho);
    if (!(defect <= tol)) {
        throw ValidationError("vectorize: matrix is not Hermitian (defect " +
                              std::to_string(static_cast<double>(defect)) + ")");
    }
    const int l = static_cast<int>(rho.rows());
    CVectorT<Real> x(l * l);
    int i = 0;
    for (const Slot& s : canonical_slots(l)) x(i++) = rho(s.row, s.col);
    return x;
}

template <typename Derived>
auto devectorize(const Eigen::MatrixBase<Derived>& x, typename Derived::RealScalar tol = 1e-9) {
    using Real = typename Derived::RealScalar;
    const int l = levels_from_length(x.size());
    CMatrixT<Real> rho(l, l);
    int i = 0;
    for (const Slot& s : canonical_slots(l)) rho(s.row, s.col) = x(i++);
    for (int n = 0; n < l; ++n) {
        for (int m = n + 1; m < l; ++m) {
            if (std::abs(rho(n, m) - std::conj(rho(m, n))) > tol) {
                throw StructuralError("devectorize: slots (" + std::to_string(n) + "," +
                                      std::to_string(m) + ") and (" + std::to_string(m) + "," +
                                      std::to_string(n) + ") are not conjugate");
            }
        }
    }
    return rho;
}

// Tr(rho * obs); the imaginary residue must stay below `tol`.
template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar expectation(const Eigen::MatrixBase<DerivedA>& rho,
                                          const Eigen::MatrixBase<DerivedB>& obs,
                                          typename DerivedA::RealScalar tol = 1e-10) {
    if (rho.rows() != obs.rows() || rho.cols() != obs.cols() || rho.rows() != rho.cols()) {
        throw ValidationError("expectation: dimension mismatch");
    }
    const auto value = (rho * obs).trace();
    if (std::abs(value.imag()) > tol) {
        throw NumericConsistencyError("expectation: imaginary part " +
                                      std::to_string(static_cast<double>(value.imag())));
    }
    return value.real();
}

StateReport validate(const CMatrix& rho);

// Report on a vectorized state; a conjugate-pair mismatch counts as Hermiticity defect.
StateReport validate_vectorized(const CVector& x);

// Maps a conjugate-paired vector onto real coordinates: populations pass
// through, each pair (a, conj a) becomes (Re a, Im a).
CMatrix realification_matrix(int levels);

// Real symmetric matrix R with x^T M x == y^T R y for y = T x.
MatrixXd realify_quadratic(const CMatrix& m);

// Real row r with p x == r y for y = T x.
Eigen::RowVectorXd realify_linear(const CRowVector& p);

// Inverse maps: M = T^T R T and p = r T.
CMatrix quadratic_from_real(const MatrixXd& r);
CRowVector linear_from_real(const Eigen::RowVectorXd& r);

}  // namespace fpqc
