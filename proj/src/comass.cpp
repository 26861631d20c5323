#include "calib6/gluing.hpp"

namespace calib6 {

namespace {

// value of a 3-form on the frame columns v1 ^ v2 ^ v3
double frame_value(const KFormD& w, const Eigen::Matrix<double, 6, 3>& v) {
  double acc = 0;
  const auto& basis = multiindex::basis(3);
  for (size_t idx = 0; idx < basis.size(); ++idx) {
    double c = w.coeffs[idx];
    if (c == 0) continue;
    auto ax = multiindex::axes(basis[idx]);
    double det = v(ax[0], 0) * (v(ax[1], 1) * v(ax[2], 2) - v(ax[1], 2) * v(ax[2], 1)) -
                 v(ax[0], 1) * (v(ax[1], 0) * v(ax[2], 2) - v(ax[1], 2) * v(ax[2], 0)) +
                 v(ax[0], 2) * (v(ax[1], 0) * v(ax[2], 1) - v(ax[1], 1) * v(ax[2], 0));
    acc += c * det;
  }
  return acc;
}

Eigen::Matrix<double, 6, 3> frame_gradient(const KFormD& w,
                                           const Eigen::Matrix<double, 6, 3>& v) {
  Eigen::Matrix<double, 6, 3> g = Eigen::Matrix<double, 6, 3>::Zero();
  const auto& basis = multiindex::basis(3);
  for (size_t idx = 0; idx < basis.size(); ++idx) {
    double c = w.coeffs[idx];
    if (c == 0) continue;
    auto ax = multiindex::axes(basis[idx]);
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) m(r, col) = v(ax[r], col);
    // cofactor matrix: d det / d m(r,c)
    Eigen::Matrix3d cof;
    cof(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    cof(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    cof(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    cof(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    cof(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    cof(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    cof(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    cof(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    cof(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) g(ax[r], col) += c * cof(r, col);
  }
  return g;
}

// thin QR with positive-diagonal sign convention
Eigen::Matrix<double, 6, 3> orthonormalize(const Eigen::Matrix<double, 6, 3>& v) {
  Eigen::Matrix<double, 6, 3> q = v;
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < c; ++b) q.col(c) -= q.col(c).dot(q.col(b)) * q.col(b);
    double n = q.col(c).norm();
    if (n < 1e-300) {
      q.col(c).setZero();
      q(c, c) = 1;  // degenerate start; re-seed a coordinate direction
      for (int b = 0; b < c; ++b) q.col(c) -= q.col(c).dot(q.col(b)) * q.col(b);
      n = q.col(c).norm();
    }
    q.col(c) /= n;
  }
  return q;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

Eigen::Matrix<double, 6, 3> halton_frame(int index) {
  static const int primes[18] = {2,  3,  5,  7,  11, 13, 17, 19, 23,
                                 29, 31, 37, 41, 43, 47, 53, 59, 61};
  Eigen::Matrix<double, 6, 3> v;
  for (int i = 0; i < 18; ++i)
    v(i % 6, i / 6) = 2.0 * halton(index + 1, primes[i]) - 1.0;
  return orthonormalize(v);
}

double ascend(const KFormD& w, Eigen::Matrix<double, 6, 3>& v, int max_iters) {
  double f = frame_value(w, v);
  double eta = 0.5;
  for (int iter = 0; iter < max_iters; ++iter) {
    Eigen::Matrix<double, 6, 3> g = frame_gradient(w, v);
    Eigen::Matrix3d sym = 0.5 * (v.transpose() * g + g.transpose() * v);
    Eigen::Matrix<double, 6, 3> z = g - v * sym;  // Stiefel tangent
    double zn = z.norm();
    if (zn < 1e-13) break;
    bool moved = false;
    for (int halving = 0; halving < 30; ++halving) {
      Eigen::Matrix<double, 6, 3> trial = orthonormalize(v + eta * z);
      double ft = frame_value(w, trial);
      if (ft > f) {
        v = trial;
        f = ft;
        eta *= 1.4;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return f;
}

}  // namespace

ComassResult comass(const KFormD& form, const Matrix6d& metric_gram,
                    const ComassOptions& opts) {
  if (form.degree != 3) throw std::invalid_argument("comass: degree must be 3");
  Eigen::LLT<Matrix6d> llt(metric_gram);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("comass: metric not positive definite");
  Matrix6d l = llt.matrixL();
  Matrix6d linv_t = l.transpose().inverse();
  // metric-orthonormal frames are L^{-T} (euclidean-orthonormal frames)
  KFormD reduced = pullback(to_linear_map(linv_t), form);

  ComassResult out;
  Eigen::Matrix<double, 6, 3> best_frame = halton_frame(0);

  // deterministic lower-bound sweep
  for (int i = 0; i < opts.sweep; ++i) {
    auto v = halton_frame(i);
    double f = frame_value(reduced, v);
    if (f > out.sweep_best) {
      out.sweep_best = f;
      best_frame = v;
    }
  }
  out.value = out.sweep_best;

  // multistart projected ascent, seeded by the sweep winner and the lattice
  {
    auto v = best_frame;
    double f = ascend(reduced, v, opts.max_iters);
    if (f > out.value) {
      out.value = f;
      best_frame = v;
    }
  }
  for (int s = 0; s < opts.starts; ++s) {
    auto v = halton_frame(7919 + s * 37);
    double f = ascend(reduced, v, opts.max_iters);
    if (f > out.value) {
      out.value = f;
      best_frame = v;
    }
  }
  out.frame = linv_t * best_frame;
  return out;
}

}  // namespace calib6
