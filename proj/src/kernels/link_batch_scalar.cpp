#include <cmath>

#include "calib6/kernels/link_batch.hpp"

namespace calib6::kern {
namespace {

constexpr double kThird = 1.0 / 3.0;
const double kProdRe = 1.0 / (3.0 * std::sqrt(3.0));

struct State {
  double a, b, c;
};

// residuals and squared norm at a point
inline void residuals(const PlaneRows& p, double a, double b, double c,
                      double f[4]) {
  double vr[3], vi[3];
  for (int j = 0; j < 3; ++j) {
    vr[j] = a * p.re[0][j] + b * p.re[1][j] + c * p.re[2][j];
    vi[j] = a * p.im[0][j] + b * p.im[1][j] + c * p.im[2][j];
  }
  double pr01 = vr[0] * vr[1] - vi[0] * vi[1];
  double pi01 = vr[0] * vi[1] + vi[0] * vr[1];
  double prodr = pr01 * vr[2] - pi01 * vi[2];
  double prodi = pr01 * vi[2] + pi01 * vr[2];
  f[0] = vr[0] * vr[0] + vi[0] * vi[0] - kThird;
  f[1] = vr[1] * vr[1] + vi[1] * vi[1] - kThird;
  f[2] = prodr - kProdRe;
  f[3] = prodi;
}

inline double max_abs4(const double f[4]) {
  double m = std::fabs(f[0]);
  m = std::fmax(m, std::fabs(f[1]));
  m = std::fmax(m, std::fabs(f[2]));
  return std::fmax(m, std::fabs(f[3]));
}

inline double sq_norm4(const double f[4]) {
  return f[0] * f[0] + f[1] * f[1] + f[2] * f[2] + f[3] * f[3];
}

void solve_one(const PlaneRows& p, double a, double b, double c,
               const LinkBatchParams& prm, SeedResult& out) {
  double n0 = std::sqrt(a * a + b * b + c * c);
  a /= n0; b /= n0; c /= n0;

  double f[4];
  residuals(p, a, b, c, f);
  double fsq = sq_norm4(f);
  bool converged = false;

  for (int iter = 0; iter < prm.max_iters; ++iter) {
    // complex coordinates of v and the per-parameter derivatives (rows of p)
    double vr[3], vi[3];
    for (int j = 0; j < 3; ++j) {
      vr[j] = a * p.re[0][j] + b * p.re[1][j] + c * p.re[2][j];
      vi[j] = a * p.im[0][j] + b * p.im[1][j] + c * p.im[2][j];
    }
    double pr01 = vr[0] * vr[1] - vi[0] * vi[1];
    double pi01 = vr[0] * vi[1] + vi[0] * vr[1];
    double pr02 = vr[0] * vr[2] - vi[0] * vi[2];
    double pi02 = vr[0] * vi[2] + vi[0] * vr[2];
    double pr12 = vr[1] * vr[2] - vi[1] * vi[2];
    double pi12 = vr[1] * vi[2] + vi[1] * vr[2];

    // Jacobian J[4][3]: parameter k varies v along row k of the plane
    double J[4][3];
    for (int k = 0; k < 3; ++k) {
      J[0][k] = 2.0 * (vr[0] * p.re[k][0] + vi[0] * p.im[k][0]);
      J[1][k] = 2.0 * (vr[1] * p.re[k][1] + vi[1] * p.im[k][1]);
      // d(v1 v2 v3) = dv1 (v2v3) + dv2 (v1v3) + dv3 (v1v2)
      double dr = p.re[k][0] * pr12 - p.im[k][0] * pi12 +
                  p.re[k][1] * pr02 - p.im[k][1] * pi02 +
                  p.re[k][2] * pr01 - p.im[k][2] * pi01;
      double di = p.re[k][0] * pi12 + p.im[k][0] * pr12 +
                  p.re[k][1] * pi02 + p.im[k][1] * pr02 +
                  p.re[k][2] * pi01 + p.im[k][2] * pr01;
      J[2][k] = dr;
      J[3][k] = di;
    }

    // normal equations with a radial penalty pinning the step to the
    // tangent plane of the sphere
    double M[3][3], rhs[3];
    double trJJ = 0;
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) {
        double acc = 0;
        for (int q = 0; q < 4; ++q) acc += J[q][r] * J[q][s];
        M[r][s] = acc;
        if (r == s) trJJ += acc;
      }
    double w = trJJ + 1.0;
    double pvec[3] = {a, b, c};
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) M[r][s] += w * pvec[r] * pvec[s];
    double eps = 1e-14 * w;
    for (int r = 0; r < 3; ++r) M[r][r] += eps;
    for (int r = 0; r < 3; ++r) {
      double acc = 0;
      for (int q = 0; q < 4; ++q) acc += J[q][r] * f[q];
      rhs[r] = -acc;
    }

    // 3x3 solve by adjugate (branch free)
    double c00 = M[1][1] * M[2][2] - M[1][2] * M[2][1];
    double c01 = M[1][2] * M[2][0] - M[1][0] * M[2][2];
    double c02 = M[1][0] * M[2][1] - M[1][1] * M[2][0];
    double det = M[0][0] * c00 + M[0][1] * c01 + M[0][2] * c02;
    double c10 = M[0][2] * M[2][1] - M[0][1] * M[2][2];
    double c11 = M[0][0] * M[2][2] - M[0][2] * M[2][0];
    double c12 = M[0][1] * M[2][0] - M[0][0] * M[2][1];
    double c20 = M[0][1] * M[1][2] - M[0][2] * M[1][1];
    double c21 = M[0][2] * M[1][0] - M[0][0] * M[1][2];
    double c22 = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    double inv_det = 1.0 / det;
    double d0 = (c00 * rhs[0] + c10 * rhs[1] + c20 * rhs[2]) * inv_det;
    double d1 = (c01 * rhs[0] + c11 * rhs[1] + c21 * rhs[2]) * inv_det;
    double d2 = (c02 * rhs[0] + c12 * rhs[1] + c22 * rhs[2]) * inv_det;

    // project onto the tangent plane
    double rad = d0 * a + d1 * b + d2 * c;
    d0 -= rad * a;
    d1 -= rad * b;
    d2 -= rad * c;

    // step halving on the squared residual norm
    double h = 1.0;
    bool improved = false;
    double na = a, nb = b, nc = c, nfsq = fsq, nf[4];
    for (int halving = 0; halving < prm.max_halvings; ++halving) {
      double ta = a + h * d0, tb = b + h * d1, tc = c + h * d2;
      double tn = std::sqrt(ta * ta + tb * tb + tc * tc);
      ta /= tn; tb /= tn; tc /= tn;
      residuals(p, ta, tb, tc, nf);
      double tfsq = sq_norm4(nf);
      if (tfsq < fsq) {
        na = ta; nb = tb; nc = tc; nfsq = tfsq;
        improved = true;
        break;
      }
      h *= 0.5;
    }
    if (!improved) {
      converged = true;  // stationary to line-search resolution
      break;
    }
    a = na; b = nb; c = nc;
    residuals(p, a, b, c, f);
    fsq = nfsq;
    if (fsq < 1e-30) {
      converged = true;
      break;
    }
  }

  residuals(p, a, b, c, f);
  out.a = a; out.b = b; out.c = c;
  out.resid = max_abs4(f);
  out.converged = converged;
  out.accepted = converged && out.resid <= prm.accept_tol;
}

void run_scalar(const PlaneRows& p, const double* a, const double* b,
                const double* c, int n, const LinkBatchParams& prm,
                SeedResult* out) {
  for (int i = 0; i < n; ++i) solve_one(p, a[i], b[i], c[i], prm, out[i]);
}

}  // namespace

LinkBatchFn scalar_impl() { return &run_scalar; }

}  // namespace calib6::kern
