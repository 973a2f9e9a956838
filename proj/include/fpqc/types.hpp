#pragma once

#include <complex>

#include <Eigen/Dense>

namespace fpqc {

template <typename Real>
using ComplexT = std::complex<Real>;
template <typename Real>
using CMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CRowVectorT = Eigen::Matrix<std::complex<Real>, 1, Eigen::Dynamic>;

using cplx = std::complex<double>;
using CMatrix = CMatrixT<double>;
using CVector = CVectorT<double>;
using CRowVector = CRowVectorT<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

}  // namespace fpqc
