#pragma once

#include <vector>

#include "calib6/planes.hpp"

namespace calib6 {

// The Harvey-Lawson special Lagrangian cone over the torus
//   {|z1| = |z2| = |z3|, z1 z2 z3 = 1/(3 sqrt 3)} in S^5.
namespace hl {

// link parametrization and its partial derivatives, orders 0..3
Eigen::Vector3cd link_point(double alpha, double beta);

// residual of the link equations at a complex 3-vector
Eigen::Vector4d link_residual(const Eigen::Vector3cd& v);

// oriented tangent plane to the cone at a nonzero cone point given by
// link angles; rows are (radial, d/dalpha, d/dbeta), orthonormalized
OrientedPlane3 cone_tangent_plane(double alpha, double beta);

// recover link angles from a point satisfying the link equations
std::pair<double, double> link_angles(const Eigen::Vector3cd& v);

}  // namespace hl

enum class KernelChoice { automatic, scalar, avx2 };

struct RayCountOptions {
  int seeds = 50000;
  double accept_tol = 1e-10;
  double dedupe_angle = 1e-5;
  int threads = 2;
  KernelChoice kernel = KernelChoice::automatic;
};

struct RayCountReport {
  int count = 0;
  std::vector<Vector6d> rays;                 // unit directions in R^6
  std::vector<Eigen::Vector3d> sphere_points; // (a,b,c) per ray
  std::vector<double> residuals;              // max-abs residual per ray
  std::vector<double> pairwise_angle_cos;     // upper-triangular order
  int seeds = 0;
  int accepted_raw = 0;
  int converged = 0;
  bool special_lagrangian_input = true;
  std::string kernel;
};

RayCountReport count_rays(const OrientedPlane3& p, const RayCountOptions& opts = {});

// determinant of the 6x6 real coefficient matrix of the system
// c.P = c'.P.R(t,t); rows ordered (Re z1, Im z1, Re z2, Im z2, Re z3, Im z3),
// columns (c1..c3, c4..c6) with the right block negated.
double det_A(const OrientedPlane3& p, double t);

// same determinant from stacked realified row matrices, sign-matched;
// used as an independent assembly cross-check
double det_A_stacked(const OrientedPlane3& p, double t);

struct RootScanOptions {
  double scan_step = 1e-3;
  double bisect_tol = 1e-12;
  double exclusion = 1e-6;  // ignore the forced root at t = 0
};

// smallest |t| with det_A(P, t) = 0 over [-pi, pi), excluding t = 0
double min_nonzero_root(const OrientedPlane3& p, const RootScanOptions& opts = {});

struct RealizingCollection {
  int degree = 0;
  OrientedPlane3 base;
  double m0 = 0;
  double rotation_step = 0;
  std::vector<OrientedPlane3> planes;
  std::vector<int> ray_counts;                   // per plane, certified
  std::vector<std::array<int, 3>> pair_checks;   // (j, k, intersection dim)
};

// planes P(0,pi/4).R((j-1) m0/(2n), ...) certified to meet the cone in one
// ray each and to intersect each other only at the origin
RealizingCollection realizing_collection(int n, const RayCountOptions& ray_opts = {});

}  // namespace calib6
