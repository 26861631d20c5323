#pragma once

#include <optional>

#include "calib6/linalg.hpp"

namespace calib6 {

// Oriented real 3-plane in R^6, spanned by its rows; orientation is
// row1 ^ row2 ^ row3.  Planes coming from a complex matrix keep it around.
struct OrientedPlane3 {
  Eigen::Matrix<double, 3, 6> rows;
  std::optional<Matrix3cd> origin;

  OrientedPlane3() { rows.setZero(); }
  explicit OrientedPlane3(const Eigen::Matrix<double, 3, 6>& r);

  // orientation-preserving orthonormalization of the rows
  Eigen::Matrix<double, 3, 6> orthonormal_rows() const;
  KVector<double> orientation_vector() const;  // 3-vector of the ON frame
};

OrientedPlane3 plane_from_complex(const Matrix3cd& m);

// Orthonormal tangent frame of the Harvey-Lawson link orbit point
// (1,1,1)/sqrt(3); a special-unitary matrix.
Matrix3cd pi0();

// Block rotation multiplying pi0 on the left; diagonal torus element
// multiplying planes on the right.
Matrix3cd rho(double tau, double theta);
Matrix3cd r_diag(double a, double b);

inline OrientedPlane3 plane_p(double tau, double theta) {
  return plane_from_complex(rho(tau, theta) * pi0());
}

bool is_lagrangian(const OrientedPlane3& p, double tol = 1e-10);
bool is_special_lagrangian(const OrientedPlane3& p, double tol = 1e-10);

// evaluate(phi, oriented ON frame): +1 for positively oriented special
// Lagrangian planes, -1 for reversed ones
double calibration_value(const OrientedPlane3& p);

// dim over R of span(P) and span(Q) intersection, via the rank of the
// stacked 6x6 system with relative singular-value cutoff.
int intersection_dimension(const OrientedPlane3& p, const OrientedPlane3& q,
                           double rel_tol = 1e-9);

// Output of align_pair: S realifies to the coordinate change taking the
// plane pair into standard position
//   P            -> y1 y2 x3 - plane
//   ray          -> nonnegative x3-axis
//   C_tangent    -> {(x1,x2,x3, rho x1, -rho x2, 0)}
struct AlignResult {
  Matrix3cd s;            // the SU(3) coordinate change
  double rho = 0;         // slope of the aligned tangent plane
  int orientation_sign = 1;  // +1 if P's given orientation already calibrates
  double w_line_defect = 0;  // residual of the complex-line certificate
};

AlignResult align_pair(const OrientedPlane3& c_tangent, const OrientedPlane3& p,
                       const Vector6d& ray);

// The further SU(3) rotation diag(e^{-i mu}, e^{i mu}, 1), mu = atan(rho),
// mapping the aligned tangent graph to the x1x2x3-plane (and the partner
// to the transposed-slope graph).  Used to set up graph coordinates with
// the cone tangent flat.
Matrix3cd slope_flattening_rotation(double rho);

// apply a complex matrix as a point transformation to a plane
OrientedPlane3 transform_plane(const Matrix3cd& a, const OrientedPlane3& p);

// standard symplectic form value on two real 6-vectors
double symplectic(const Vector6d& u, const Vector6d& v);

}  // namespace calib6
