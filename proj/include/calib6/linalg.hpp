#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "calib6/forms.hpp"

namespace calib6 {

using Matrix3cd = Eigen::Matrix3cd;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using complexd = std::complex<double>;

// Realification of a complex 3x3 matrix acting on column vectors of
// C^3 = R^6 in coordinates (x1,x2,x3,y1,y2,y3): [[Re,-Im],[Im,Re]].
inline Matrix6d realify6(const Matrix3cd& a) {
  Matrix6d r;
  r.block<3, 3>(0, 0) = a.real();
  r.block<3, 3>(0, 3) = -a.imag();
  r.block<3, 3>(3, 0) = a.imag();
  r.block<3, 3>(3, 3) = a.real();
  return r;
}

inline LinearMap6D to_linear_map(const Matrix6d& m) {
  LinearMap6D h;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) h(i, j) = m(i, j);
  return h;
}

inline LinearMap6D realify(const Matrix3cd& a) { return to_linear_map(realify6(a)); }

inline Matrix6d from_linear_map(const LinearMap6D& h) {
  Matrix6d m;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = h(i, j);
  return m;
}

// complex row vector -> real 6-vector (Re | Im)
inline Vector6d realify_row(const Eigen::RowVector3cd& r) {
  Vector6d v;
  v << r(0).real(), r(1).real(), r(2).real(), r(0).imag(), r(1).imag(), r(2).imag();
  return v;
}

inline Eigen::RowVector3cd complexify_row(const Vector6d& v) {
  Eigen::RowVector3cd r;
  r << complexd(v(0), v(3)), complexd(v(1), v(4)), complexd(v(2), v(5));
  return r;
}

inline Matrix3cd diag_unitary(double a, double b, double c) {
  Matrix3cd m = Matrix3cd::Zero();
  m(0, 0) = std::polar(1.0, a);
  m(1, 1) = std::polar(1.0, b);
  m(2, 2) = std::polar(1.0, c);
  return m;
}

// exp of an anti-hermitian matrix through the hermitian eigendecomposition
inline Matrix3cd expm_antihermitian(const Matrix3cd& a) {
  Eigen::SelfAdjointEigenSolver<Matrix3cd> es(complexd(0, 1) * a);
  Matrix3cd d = Matrix3cd::Zero();
  for (int i = 0; i < 3; ++i) d(i, i) = std::polar(1.0, -es.eigenvalues()(i));
  return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

// Haar-ish random SU(3): exponential of a random su(3) element
inline Matrix3cd random_su3(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix3cd a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = complexd(u(rng), u(rng));
  Matrix3cd anti = 0.5 * (a - a.adjoint());
  complexd tr = anti.trace() / 3.0;
  for (int i = 0; i < 3; ++i) anti(i, i) -= tr;
  return expm_antihermitian(anti);
}

inline double unitary_defect(const Matrix3cd& m) {
  return (m.adjoint() * m - Matrix3cd::Identity()).cwiseAbs().maxCoeff();
}

inline double su3_defect(const Matrix3cd& m) {
  return std::max(unitary_defect(m), std::abs(m.determinant() - complexd(1, 0)));
}

}  // namespace calib6
