#include "calib6/planes.hpp"

#include <stdexcept>

namespace calib6 {

OrientedPlane3::OrientedPlane3(const Eigen::Matrix<double, 3, 6>& r) : rows(r) {
  Eigen::Matrix3d gram = rows * rows.transpose();
  Eigen::Matrix<double, 3, 6> unit = rows;
  for (int i = 0; i < 3; ++i) {
    double n = rows.row(i).norm();
    if (n == 0) throw std::invalid_argument("plane rows dependent");
    unit.row(i) /= n;
  }
  double det = (unit * unit.transpose()).determinant();
  (void)gram;
  if (std::abs(det) <= 1e-12)
    throw std::invalid_argument("plane rows dependent");
}

Eigen::Matrix<double, 3, 6> OrientedPlane3::orthonormal_rows() const {
  // Gram-Schmidt in row order keeps the orientation of row1^row2^row3.
  Eigen::Matrix<double, 3, 6> q = rows;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) q.row(i) -= q.row(i).dot(q.row(j)) * q.row(j);
    q.row(i).normalize();
  }
  return q;
}

KVector<double> OrientedPlane3::orientation_vector() const {
  auto q = orthonormal_rows();
  auto row_vec = [&](int i) {
    Vec6 v;
    for (int j = 0; j < 6; ++j) v[j] = q(i, j);
    return kvector_from(v);
  };
  return wedge(wedge(row_vec(0), row_vec(1)), row_vec(2));
}

OrientedPlane3 plane_from_complex(const Matrix3cd& m) {
  Eigen::Matrix<double, 3, 6> rows;
  for (int i = 0; i < 3; ++i) rows.row(i) = realify_row(m.row(i)).transpose();
  OrientedPlane3 p(rows);
  p.origin = m;
  return p;
}

Matrix3cd pi0() {
  const double s3 = std::sqrt(3.0), s2 = std::sqrt(2.0), s6 = std::sqrt(6.0);
  const complexd i(0, 1);
  Matrix3cd m;
  m << 1.0 / s3, 1.0 / s3, 1.0 / s3,
       i / s2, 0.0, -i / s2,
       i / s6, -i * std::sqrt(2.0 / 3.0), i / s6;
  return m;
}

Matrix3cd rho(double tau, double theta) {
  const complexd eip = std::polar(1.0, theta), eim = std::polar(1.0, -theta);
  Matrix3cd m = Matrix3cd::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = eip * std::cos(tau);
  m(1, 2) = eip * std::sin(tau);
  m(2, 1) = -eim * std::sin(tau);
  m(2, 2) = eim * std::cos(tau);
  return m;
}

Matrix3cd r_diag(double a, double b) { return diag_unitary(a, b, -(a + b)); }

double symplectic(const Vector6d& u, const Vector6d& v) {
  double s = 0;
  for (int j = 0; j < 3; ++j) s += u(j) * v(3 + j) - u(3 + j) * v(j);
  return s;
}

bool is_lagrangian(const OrientedPlane3& p, double tol) {
  auto q = p.orthonormal_rows();
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(symplectic(q.row(i).transpose(), q.row(j).transpose())) > tol)
        return false;
  return true;
}

double calibration_value(const OrientedPlane3& p) {
  static const KFormD phi = special_lagrangian_form<double>();
  return evaluate(phi, p.orientation_vector());
}

bool is_special_lagrangian(const OrientedPlane3& p, double tol) {
  return is_lagrangian(p, tol) && std::abs(calibration_value(p) - 1.0) <= tol;
}

int intersection_dimension(const OrientedPlane3& p, const OrientedPlane3& q,
                           double rel_tol) {
  Matrix6d stacked;
  stacked.block<3, 6>(0, 0) = p.orthonormal_rows();
  stacked.block<3, 6>(3, 0) = q.orthonormal_rows();
  Eigen::JacobiSVD<Matrix6d> svd(stacked);
  const auto& sv = svd.singularValues();
  double cutoff = rel_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < 6; ++i)
    if (sv(i) > cutoff) ++rank;
  return 6 - rank;
}

OrientedPlane3 transform_plane(const Matrix3cd& a, const OrientedPlane3& p) {
  Matrix6d ra = realify6(a);
  Eigen::Matrix<double, 3, 6> rows = p.rows * ra.transpose();
  OrientedPlane3 out(rows);
  if (p.origin) out.origin = *p.origin * a.transpose();
  return out;
}

namespace {

// complex unitary with real row span equal to the plane; requires the
// plane to be Lagrangian so that M M^H is real
Matrix3cd unitary_row_matrix(const OrientedPlane3& p) {
  auto q = p.orthonormal_rows();
  Matrix3cd m;
  for (int i = 0; i < 3; ++i) m.row(i) = complexify_row(q.row(i).transpose());
  return m;
}

Eigen::Matrix3d min_rotation_to(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  // rotation in span{from,to} by the angle between them; identity branch and
  // the antipodal branch handled explicitly
  Eigen::Vector3d f = from.normalized(), t = to.normalized();
  double c = f.dot(t);
  if (c > 1 - 1e-14) return Eigen::Matrix3d::Identity();
  if (c < -1 + 1e-12) {
    // 180 degrees: rotate about a fixed axis orthogonal to f
    Eigen::Vector3d axis = std::abs(f(0)) < 0.9
                               ? f.cross(Eigen::Vector3d::UnitX()).normalized()
                               : f.cross(Eigen::Vector3d::UnitY()).normalized();
    return Eigen::AngleAxisd(M_PI, axis).toRotationMatrix();
  }
  Eigen::Vector3d axis = f.cross(t).normalized();
  return Eigen::AngleAxisd(std::acos(std::clamp(c, -1.0, 1.0)), axis).toRotationMatrix();
}

}  // namespace

Matrix3cd slope_flattening_rotation(double rho_val) {
  // the real rotation by atan(rho) in (w1,w2) = (x1+ix2, y1-iy2); as a map
  // of C^3 it is the diagonal phase pair below
  double mu = std::atan(rho_val);
  return diag_unitary(-mu, mu, 0.0);
}

AlignResult align_pair(const OrientedPlane3& c_tangent, const OrientedPlane3& p,
                       const Vector6d& ray) {
  if (intersection_dimension(c_tangent, p) >= 2)
    throw std::invalid_argument("align_pair: tangential intersection");
  if (!is_lagrangian(p, 1e-8) || !is_lagrangian(c_tangent, 1e-8))
    throw std::invalid_argument("align_pair: inputs must be Lagrangian");

  AlignResult out;

  // Orientation-normalized SU(3) row matrix of P.
  Matrix3cd mp = unitary_row_matrix(p);
  out.orientation_sign = 1;
  if (calibration_value(p) < 0) {
    mp.row(0) = -mp.row(0);
    out.orientation_sign = -1;
  }
  // Residual phase: fold det^(1/3)-free correction into one row so that
  // det mp = 1 to full precision.
  complexd det = mp.determinant();
  mp.row(0) /= det;  // |det| = 1, so this only rotates the phase

  // Target representative of the y1y2x3-plane with calibration value +1.
  Matrix3cd target = Matrix3cd::Zero();
  target(0, 0) = complexd(0, 1);
  target(1, 1) = complexd(0, 1);
  target(2, 2) = -1.0;

  // Step 1: point map A1 with mp . A1^T = target.
  Matrix3cd a1 = (mp.inverse() * target).transpose();

  // Step 2: rotate the ray image onto the nonnegative x3-axis inside the
  // stabilizer of the target plane (conjugated SO(3)).
  Matrix6d ra1 = realify6(a1);
  Vector6d r1 = ra1 * ray.normalized();
  // pull back through target: G^-1 maps the plane to x1x2x3
  Matrix3cd ginv = target.transpose().inverse();
  Vector6d v6 = realify6(ginv) * r1;
  Eigen::Vector3d v(v6(0), v6(1), v6(2));
  if (v6.tail<3>().cwiseAbs().maxCoeff() > 1e-8)
    throw std::runtime_error("align_pair: ray does not lie in P");
  // G maps e3 to -e3, so send v to -e3 to land on the +x3 ray.
  Eigen::Matrix3d r = min_rotation_to(v, -Eigen::Vector3d::UnitZ());
  Matrix3cd a2 = target.transpose() * r.cast<complexd>() * ginv;

  Matrix3cd s21 = a2 * a1;

  // Step 3: the tangent image now contains the x3-axis; its complement in
  // the x1 y1 x2 y2 block is a complex line in (w1,w2) = (x1+ix2, y1-iy2).
  OrientedPlane3 ct = transform_plane(s21, c_tangent);
  auto q = ct.orthonormal_rows();
  // project out the x3 direction, collect the 2-plane basis
  Eigen::Matrix<double, 3, 6> red = q;
  for (int i = 0; i < 3; ++i) red(i, 2) = 0.0;
  // two dominant rows after removing x3: use SVD of the 3x6 block
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(
      red, Eigen::ComputeFullV | Eigen::ComputeThinU);
  Eigen::Matrix<double, 2, 6> pi_basis;
  pi_basis.row(0) = svd.matrixV().col(0).transpose();
  pi_basis.row(1) = svd.matrixV().col(1).transpose();

  double y3_defect = std::max(std::abs(pi_basis(0, 5)), std::abs(pi_basis(1, 5)));

  auto to_w = [](const Eigen::Matrix<double, 1, 6>& row) {
    return Eigen::Vector2cd(complexd(row(0), row(1)), complexd(row(3), -row(4)));
  };
  Eigen::Vector2cd w_a = to_w(pi_basis.row(0)), w_b = to_w(pi_basis.row(1));
  // complex-line certificate: w_b must be a complex multiple of w_a (or the
  // pair spans a complex line; check via the 2x2 complex determinant)
  double line_defect = std::abs(w_a(0) * w_b(1) - w_a(1) * w_b(0));
  out.w_line_defect = std::max(line_defect, y3_defect);

  // slope of the line w2 = mu_c w1
  Eigen::Vector2cd w = std::abs(w_a(0)) >= std::abs(w_b(0)) ? w_a : w_b;
  complexd mu_c;
  if (std::abs(w(0)) < 1e-12) {
    // tangent equals the partner plane: excluded by the transversality check
    throw std::runtime_error("align_pair: degenerate tangent configuration");
  }
  mu_c = w(1) / w(0);

  double lambda = 0.5 * std::arg(mu_c);
  out.rho = std::abs(mu_c);
  if (out.rho < 1e-13) lambda = 0.0;

  // Step 4: SO(2) rotation in (z1,z2) removing the phase of the line.
  Matrix3cd a3 = Matrix3cd::Identity();
  a3(0, 0) = std::cos(lambda);
  a3(0, 1) = -std::sin(lambda);
  a3(1, 0) = std::sin(lambda);
  a3(1, 1) = std::cos(lambda);

  out.s = a3 * s21;
  return out;
}

}  // namespace calib6
