#include "calib6/form_orbit.hpp"

#include <stdexcept>

namespace calib6 {

template <class T>
std::vector<std::vector<T>> orbit_differential_matrix(const KForm<T>& phi) {
  if (phi.degree != 3)
    throw std::invalid_argument("orbit_differential: degree must be 3");
  const auto& basis3 = multiindex::basis(3);
  std::vector<std::vector<T>> out(basis3.size(), std::vector<T>(36, T{}));
  for (size_t row = 0; row < basis3.size(); ++row) {
    auto ax = multiindex::axes(basis3[row]);  // i < j < k
    for (int slot = 0; slot < 3; ++slot) {
      int c = ax[slot];
      // phi with slot replaced by e_r, other two arguments fixed
      for (int r = 0; r < 6; ++r) {
        std::array<int, 3> args = {ax[0], ax[1], ax[2]};
        args[slot] = r;
        if (args[0] == args[1] || args[0] == args[2] || args[1] == args[2])
          continue;
        int sign = 1;
        std::array<int, 3> sorted = args;
        for (int a = 0; a < 3; ++a)
          for (int b = a + 1; b < 3; ++b)
            if (sorted[a] > sorted[b]) {
              std::swap(sorted[a], sorted[b]);
              sign = -sign;
            }
        unsigned mask = (1u << sorted[0]) | (1u << sorted[1]) | (1u << sorted[2]);
        T val = phi[mask];
        if (val == T{}) continue;
        out[row][6 * r + c] += (sign > 0 ? val : -val);
      }
    }
  }
  return out;
}

template std::vector<std::vector<double>> orbit_differential_matrix(const KForm<double>&);
template std::vector<std::vector<Rational>> orbit_differential_matrix(const KForm<Rational>&);

OrbitDifferential orbit_differential(const KForm<Rational>& phi) {
  return OrbitDifferential{orbit_differential_matrix(phi)};
}

template <class T>
KForm<T> differential_action(const KForm<T>& phi, const LinearMap6<T>& h) {
  if (phi.degree != 3)
    throw std::invalid_argument("differential_action: degree must be 3");
  KForm<T> out(3);
  auto m = orbit_differential_matrix(phi);
  for (size_t row = 0; row < m.size(); ++row) {
    T acc{};
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) acc += m[row][6 * r + c] * h(r, c);
    out.coeffs[row] = acc;
  }
  return out;
}

template KForm<double> differential_action(const KForm<double>&, const LinearMap6<double>&);
template KForm<Rational> differential_action(const KForm<Rational>&, const LinearMap6<Rational>&);

int integer_matrix_rank(std::vector<std::vector<long long>> m) {
  // Bareiss fraction-free elimination; intermediates are minors, bounded
  // well inside __int128 for our matrix sizes
  using i128 = __int128;
  const int rows = (int)m.size();
  if (rows == 0) return 0;
  const int cols = (int)m[0].size();
  std::vector<std::vector<i128>> a(rows, std::vector<i128>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a[i][j] = m[i][j];

  int rank = 0;
  i128 prev = 1;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r)
      if (a[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(a[rank], a[pivot]);
    for (int r = rank + 1; r < rows; ++r) {
      for (int c = col + 1; c < cols; ++c)
        a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
      a[r][col] = 0;
    }
    prev = a[rank][col];
    ++rank;
  }
  return rank;
}

namespace {

std::vector<std::vector<long long>> clear_denominators(
    const std::vector<std::vector<Rational>>& m) {
  std::vector<std::vector<long long>> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    long long l = 1;
    for (const auto& x : m[i]) l = std::lcm(l, x.den());
    out[i].resize(m[i].size());
    for (size_t j = 0; j < m[i].size(); ++j)
      out[i][j] = m[i][j].num() * (l / m[i][j].den());
  }
  return out;
}

}  // namespace

StabilizerResult stabilizer_dimension(const KForm<Rational>& phi) {
  auto m = orbit_differential_matrix(phi);
  int rank = integer_matrix_rank(clear_denominators(m));
  return {rank, 36 - rank};
}

std::vector<LinearMap6<Rational>> sl3c_realified_basis() {
  std::vector<LinearMap6<Rational>> basis;
  auto realify_q = [](const Eigen::Matrix3i& re, const Eigen::Matrix3i& im) {
    LinearMap6<Rational> h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        h(i, j) = Rational(re(i, j));
        h(i, 3 + j) = Rational(-im(i, j));
        h(3 + i, j) = Rational(im(i, j));
        h(3 + i, 3 + j) = Rational(re(i, j));
      }
    return h;
  };
  Eigen::Matrix3i zero = Eigen::Matrix3i::Zero();
  // off-diagonal E_jk and iE_jk
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (r == c) continue;
      Eigen::Matrix3i e = zero;
      e(r, c) = 1;
      basis.push_back(realify_q(e, zero));
      basis.push_back(realify_q(zero, e));
    }
  // traceless diagonals diag(1,-1,0), diag(0,1,-1) and their i-multiples
  for (int d = 0; d < 2; ++d) {
    Eigen::Matrix3i e = zero;
    e(d, d) = 1;
    e(d + 1, d + 1) = -1;
    basis.push_back(realify_q(e, zero));
    basis.push_back(realify_q(zero, e));
  }
  return basis;
}

bool kernel_contains_sl3c(const KForm<Rational>& phi) {
  for (const auto& h : sl3c_realified_basis()) {
    auto img = differential_action(phi, h);
    for (const auto& c : img.coeffs)
      if (!c.is_zero()) return false;
  }
  return true;
}

std::vector<KappaEntry> kappa_table(int n_max) {
  if (n_max < 1) throw std::invalid_argument("kappa_table: n_max >= 1");
  std::vector<KappaEntry> out;
  for (int n = 1; n <= n_max; ++n)
    for (int k = 0; k <= n; ++k) {
      KappaEntry e;
      e.n = n;
      e.k = k;
      // exact binomial via long double-free ladder
      long long binom = 1;
      for (int i = 0; i < k; ++i) binom = binom * (n - i) / (i + 1);
      e.kappa = (long long)n * n - binom;
      e.positive = e.kappa > 0;
      bool predicted = (n <= 7) ||
                       (k <= 2 || k >= n - 2) ||
                       (n == 8 && k != 4);
      e.matches_trichotomy = (e.positive == predicted);
      out.push_back(e);
    }
  return out;
}

FactorizeResult factorize_near_phi(const KFormD& tau, const FactorizeOptions& opts) {
  if (tau.degree != 3)
    throw std::invalid_argument("factorize_near_phi: degree must be 3");
  const KFormD phi = special_lagrangian_form<double>();
  FactorizeResult res;
  {
    KFormD diff = tau - phi;
    res.outside_basin = (double)max_abs_coeff(diff) > opts.basin;
  }

  Matrix6d h = Matrix6d::Identity();
  const int ncoef = (int)tau.coeffs.size();
  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    KFormD cur = pullback(to_linear_map(h), phi);
    Eigen::VectorXd r(ncoef);
    for (int i = 0; i < ncoef; ++i) r(i) = tau.coeffs[i] - cur.coeffs[i];
    double rmax = r.cwiseAbs().maxCoeff();
    if (rmax <= opts.tol) {
      res.h = h;
      res.residual = rmax;
      res.iterations = iter;
      return res;
    }
    if (iter == opts.max_iters) break;

    auto dm = orbit_differential_matrix(cur);
    Eigen::MatrixXd d(ncoef, 36);
    for (int i = 0; i < ncoef; ++i)
      for (int j = 0; j < 36; ++j) d(i, j) = dm[i][j];
    // minimum-norm correction: E = D^T (D D^T)^{-1} r
    Eigen::MatrixXd gram = d * d.transpose();
    Eigen::VectorXd e = d.transpose() * gram.ldlt().solve(r);
    Matrix6d corr;
    for (int rr = 0; rr < 6; ++rr)
      for (int cc = 0; cc < 6; ++cc) corr(rr, cc) = e(6 * rr + cc);
    h = h * (Matrix6d::Identity() + corr);
  }
  KFormD cur = pullback(to_linear_map(h), phi);
  double rmax = (double)max_abs_coeff(tau - cur);
  throw std::runtime_error("factorize_near_phi: no convergence in " +
                           std::to_string(opts.max_iters) +
                           " iterations, residual " + std::to_string(rmax));
}

double submersion_smallest_singular_value() {
  auto dm = orbit_differential_matrix(special_lagrangian_form<double>());
  Eigen::MatrixXd d(20, 36);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 36; ++j) d(i, j) = dm[i][j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
  return svd.singularValues().minCoeff();
}

}  // namespace calib6
