#include "fpqc/state.hpp"

#include <cstdio>

#include <Eigen/Eigenvalues>

namespace fpqc {

std::vector<Slot> canonical_slots(int levels) {
    if (levels < 1) throw ValidationError("canonical_slots: levels must be positive");
    std::vector<Slot> slots;
    slots.reserve(static_cast<std::size_t>(levels) * levels);
    for (int n = 0; n < levels; ++n) slots.push_back({n, n});
    for (int k = 0; k + 1 < levels; ++k) {
        for (int m = k + 1; m < levels; ++m) slots.push_back({k, m});
        for (int m = k + 1; m < levels; ++m) slots.push_back({m, k});
    }
    return slots;
}

int partner_slot(int levels, int index) {
    const Slot s = canonical_slots(levels).at(static_cast<std::size_t>(index));
    return slot_index(levels, s.col, s.row);
}

int levels_from_length(Eigen::Index length) {
    const auto l = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(length))));
    if (length <= 0 || l * l != length) {
        throw ValidationError("vectorized state length " + std::to_string(length) +
                              " is not a perfect square");
    }
    return static_cast<int>(l);
}

CRowVector trace_row(int levels) {
    CRowVector row = CRowVector::Zero(levels * levels);
    row.head(levels).setOnes();
    return row;
}

std::string StateReport::describe() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "hermiticity defect %.3e, trace defect %.3e, min eigenvalue %.3e",
                  hermiticity_defect, trace_defect, min_eigenvalue);
    return buf;
}

StateReport validate(const CMatrix& rho) {
    StateReport report;
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        report.hermiticity_defect = std::numeric_limits<double>::infinity();
        report.trace_defect = std::numeric_limits<double>::infinity();
        report.min_eigenvalue = -std::numeric_limits<double>::infinity();
        return report;
    }
    report.hermiticity_defect = hermiticity_defect(rho);
    report.trace_defect = std::abs(rho.trace() - 1.0);
    const CMatrix sym = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = eig.eigenvalues().minCoeff();
    return report;
}

StateReport validate_vectorized(const CVector& x) {
    const int l = levels_from_length(x.size());
    CMatrix rho(l, l);
    int i = 0;
    for (const Slot& s : canonical_slots(l)) rho(s.row, s.col) = x(i++);
    return validate(rho);
}

CMatrix realification_matrix(int levels) {
    const int n = levels * levels;
    CMatrix t = CMatrix::Zero(n, n);
    const auto slots = canonical_slots(levels);
    for (int r = 0; r < n; ++r) {
        const Slot s = slots[static_cast<std::size_t>(r)];
        const int partner = slot_index(levels, s.col, s.row);
        if (s.row == s.col) {
            t(r, r) = 1.0;
        } else if (s.row < s.col) {
            t(r, r) = 0.5;
            t(r, partner) = 0.5;
        } else {
            // Im of the upper partner a: (a - conj a) / 2i
            t(r, partner) = -0.5 * kI;
            t(r, r) = 0.5 * kI;
        }
    }
    return t;
}

namespace {

CMatrix realification_inverse(int levels) {
    const int n = levels * levels;
    CMatrix inv = CMatrix::Zero(n, n);
    const auto slots = canonical_slots(levels);
    for (int r = 0; r < n; ++r) {
        const Slot s = slots[static_cast<std::size_t>(r)];
        if (s.row == s.col) {
            inv(r, r) = 1.0;
            continue;
        }
        const int upper = slot_index(levels, std::min(s.row, s.col), std::max(s.row, s.col));
        const int lower = slot_index(levels, std::max(s.row, s.col), std::min(s.row, s.col));
        // x_upper = Re + i Im, x_lower = Re - i Im; Re lives at `upper`, Im at `lower`.
        inv(r, upper) = 1.0;
        inv(r, lower) = s.row < s.col ? kI : -kI;
    }
    return inv;
}

}  // namespace

MatrixXd realify_quadratic(const CMatrix& m) {
    const int l = levels_from_length(m.rows());
    const CMatrix inv = realification_inverse(l);
    const CMatrix r = inv.transpose() * m * inv;
    const MatrixXd re = r.real();
    return 0.5 * (re + re.transpose());
}

Eigen::RowVectorXd realify_linear(const CRowVector& p) {
    const int l = levels_from_length(p.size());
    return (p * realification_inverse(l)).real();
}

CMatrix quadratic_from_real(const MatrixXd& r) {
    const int l = levels_from_length(r.rows());
    const CMatrix t = realification_matrix(l);
    return t.transpose() * r.cast<cplx>() * t;
}

CRowVector linear_from_real(const Eigen::RowVectorXd& r) {
    const int l = levels_from_length(r.size());
    return r.cast<cplx>() * realification_matrix(l);
}

}  // namespace fpqc
