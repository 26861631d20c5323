#include "calib6/kernels/link_batch.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

// Lane-parallel variant of the scalar reference kernel: four seeds per
// register, masked line search, early exit once every lane is done.
// Same iteration shape as the scalar code, so results agree to rounding.

namespace calib6::kern {
namespace {

constexpr double kThird = 1.0 / 3.0;

struct Vec {
  __m256d v;
  Vec() : v(_mm256_setzero_pd()) {}
  Vec(__m256d x) : v(x) {}
  Vec(double x) : v(_mm256_set1_pd(x)) {}
  friend Vec operator+(Vec a, Vec b) { return _mm256_add_pd(a.v, b.v); }
  friend Vec operator-(Vec a, Vec b) { return _mm256_sub_pd(a.v, b.v); }
  friend Vec operator*(Vec a, Vec b) { return _mm256_mul_pd(a.v, b.v); }
  friend Vec operator/(Vec a, Vec b) { return _mm256_div_pd(a.v, b.v); }
};

inline Vec fma(Vec a, Vec b, Vec c) { return _mm256_fmadd_pd(a.v, b.v, c.v); }
inline Vec fms(Vec a, Vec b, Vec c) { return _mm256_fmsub_pd(a.v, b.v, c.v); }
inline Vec sqrt(Vec a) { return _mm256_sqrt_pd(a.v); }
inline Vec abs(Vec a) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a.v); }
inline Vec max(Vec a, Vec b) { return _mm256_max_pd(a.v, b.v); }
inline Vec blend(Vec mask, Vec yes, Vec no) {
  return _mm256_blendv_pd(no.v, yes.v, mask.v);
}
inline Vec lt(Vec a, Vec b) { return _mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ); }
inline Vec andv(Vec a, Vec b) { return _mm256_and_pd(a.v, b.v); }
inline Vec orv(Vec a, Vec b) { return _mm256_or_pd(a.v, b.v); }
inline Vec notv(Vec a) {
  return _mm256_xor_pd(a.v, _mm256_castsi256_pd(_mm256_set1_epi64x(-1)));
}
inline int mask_bits(Vec a) { return _mm256_movemask_pd(a.v); }
inline Vec all_false() { return _mm256_setzero_pd(); }

struct Lanes {
  Vec a, b, c;
};

inline void residuals(const PlaneRows& p, const Lanes& s, Vec f[4],
                      const double prod_re) {
  Vec vr[3], vi[3];
  for (int j = 0; j < 3; ++j) {
    vr[j] = fma(s.a, Vec(p.re[0][j]), fma(s.b, Vec(p.re[1][j]), s.c * Vec(p.re[2][j])));
    vi[j] = fma(s.a, Vec(p.im[0][j]), fma(s.b, Vec(p.im[1][j]), s.c * Vec(p.im[2][j])));
  }
  Vec pr01 = fms(vr[0], vr[1], vi[0] * vi[1]);
  Vec pi01 = fma(vr[0], vi[1], vi[0] * vr[1]);
  Vec prodr = fms(pr01, vr[2], pi01 * vi[2]);
  Vec prodi = fma(pr01, vi[2], pi01 * vr[2]);
  f[0] = fma(vr[0], vr[0], vi[0] * vi[0]) - Vec(kThird);
  f[1] = fma(vr[1], vr[1], vi[1] * vi[1]) - Vec(kThird);
  f[2] = prodr - Vec(prod_re);
  f[3] = prodi;
}

inline Vec sq_norm4(const Vec f[4]) {
  return fma(f[0], f[0], fma(f[1], f[1], fma(f[2], f[2], f[3] * f[3])));
}

inline Vec max_abs4(const Vec f[4]) {
  return max(max(abs(f[0]), abs(f[1])), max(abs(f[2]), abs(f[3])));
}

void run_avx2(const PlaneRows& p, const double* pa, const double* pb,
              const double* pc, int n, const LinkBatchParams& prm,
              SeedResult* out) {
  const double prod_re = 1.0 / (3.0 * std::sqrt(3.0));
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    Lanes s{Vec(_mm256_loadu_pd(pa + i)), Vec(_mm256_loadu_pd(pb + i)),
            Vec(_mm256_loadu_pd(pc + i))};
    Vec norm = sqrt(fma(s.a, s.a, fma(s.b, s.b, s.c * s.c)));
    s.a = s.a / norm;
    s.b = s.b / norm;
    s.c = s.c / norm;

    Vec f[4];
    residuals(p, s, f, prod_re);
    Vec fsq = sq_norm4(f);
    Vec done = all_false(), converged = all_false();

    for (int iter = 0; iter < prm.max_iters; ++iter) {
      Vec vr[3], vi[3];
      for (int j = 0; j < 3; ++j) {
        vr[j] = fma(s.a, Vec(p.re[0][j]),
                    fma(s.b, Vec(p.re[1][j]), s.c * Vec(p.re[2][j])));
        vi[j] = fma(s.a, Vec(p.im[0][j]),
                    fma(s.b, Vec(p.im[1][j]), s.c * Vec(p.im[2][j])));
      }
      Vec pr01 = fms(vr[0], vr[1], vi[0] * vi[1]);
      Vec pi01 = fma(vr[0], vi[1], vi[0] * vr[1]);
      Vec pr02 = fms(vr[0], vr[2], vi[0] * vi[2]);
      Vec pi02 = fma(vr[0], vi[2], vi[0] * vr[2]);
      Vec pr12 = fms(vr[1], vr[2], vi[1] * vi[2]);
      Vec pi12 = fma(vr[1], vi[2], vi[1] * vr[2]);

      Vec J[4][3];
      for (int k = 0; k < 3; ++k) {
        J[0][k] = Vec(2.0) * fma(vr[0], Vec(p.re[k][0]), vi[0] * Vec(p.im[k][0]));
        J[1][k] = Vec(2.0) * fma(vr[1], Vec(p.re[k][1]), vi[1] * Vec(p.im[k][1]));
        Vec dr = fms(Vec(p.re[k][0]), pr12, Vec(p.im[k][0]) * pi12) +
                 fms(Vec(p.re[k][1]), pr02, Vec(p.im[k][1]) * pi02) +
                 fms(Vec(p.re[k][2]), pr01, Vec(p.im[k][2]) * pi01);
        Vec di = fma(Vec(p.re[k][0]), pi12, Vec(p.im[k][0]) * pr12) +
                 fma(Vec(p.re[k][1]), pi02, Vec(p.im[k][1]) * pr02) +
                 fma(Vec(p.re[k][2]), pi01, Vec(p.im[k][2]) * pr01);
        J[2][k] = dr;
        J[3][k] = di;
      }

      Vec M[3][3], rhs[3], trJJ(0.0);
      for (int r = 0; r < 3; ++r)
        for (int sc = 0; sc < 3; ++sc) {
          Vec acc(0.0);
          for (int q = 0; q < 4; ++q) acc = fma(J[q][r], J[q][sc], acc);
          M[r][sc] = acc;
          if (r == sc) trJJ = trJJ + acc;
        }
      Vec w = trJJ + Vec(1.0);
      Vec pv[3] = {s.a, s.b, s.c};
      for (int r = 0; r < 3; ++r)
        for (int sc = 0; sc < 3; ++sc) M[r][sc] = fma(w * pv[r], pv[sc], M[r][sc]);
      Vec eps = Vec(1e-14) * w;
      for (int r = 0; r < 3; ++r) M[r][r] = M[r][r] + eps;
      for (int r = 0; r < 3; ++r) {
        Vec acc(0.0);
        for (int q = 0; q < 4; ++q) acc = fma(J[q][r], f[q], acc);
        rhs[r] = Vec(0.0) - acc;
      }

      Vec c00 = fms(M[1][1], M[2][2], M[1][2] * M[2][1]);
      Vec c01 = fms(M[1][2], M[2][0], M[1][0] * M[2][2]);
      Vec c02 = fms(M[1][0], M[2][1], M[1][1] * M[2][0]);
      Vec det = fma(M[0][0], c00, fma(M[0][1], c01, M[0][2] * c02));
      Vec c10 = fms(M[0][2], M[2][1], M[0][1] * M[2][2]);
      Vec c11 = fms(M[0][0], M[2][2], M[0][2] * M[2][0]);
      Vec c12 = fms(M[0][1], M[2][0], M[0][0] * M[2][1]);
      Vec c20 = fms(M[0][1], M[1][2], M[0][2] * M[1][1]);
      Vec c21 = fms(M[0][2], M[1][0], M[0][0] * M[1][2]);
      Vec c22 = fms(M[0][0], M[1][1], M[0][1] * M[1][0]);
      Vec inv_det = Vec(1.0) / det;
      Vec d0 = fma(c00, rhs[0], fma(c10, rhs[1], c20 * rhs[2])) * inv_det;
      Vec d1 = fma(c01, rhs[0], fma(c11, rhs[1], c21 * rhs[2])) * inv_det;
      Vec d2 = fma(c02, rhs[0], fma(c12, rhs[1], c22 * rhs[2])) * inv_det;

      Vec rad = fma(d0, s.a, fma(d1, s.b, d2 * s.c));
      d0 = d0 - rad * s.a;
      d1 = d1 - rad * s.b;
      d2 = d2 - rad * s.c;

      // masked step-halving line search: each lane keeps the first
      // improving candidate, matching the scalar control flow
      Vec h(1.0);
      Vec improved = all_false();
      Vec na = s.a, nb = s.b, nc = s.c, nfsq = fsq;
      for (int halving = 0; halving < prm.max_halvings; ++halving) {
        Vec ta = fma(h, d0, s.a), tb = fma(h, d1, s.b), tc = fma(h, d2, s.c);
        Vec tn = sqrt(fma(ta, ta, fma(tb, tb, tc * tc)));
        ta = ta / tn;
        tb = tb / tn;
        tc = tc / tn;
        Lanes trial{ta, tb, tc};
        Vec tf[4];
        residuals(p, trial, tf, prod_re);
        Vec tfsq = sq_norm4(tf);
        Vec take = andv(notv(improved), lt(tfsq, fsq));
        na = blend(take, ta, na);
        nb = blend(take, tb, nb);
        nc = blend(take, tc, nc);
        nfsq = blend(take, tfsq, nfsq);
        improved = orv(improved, take);
        if (mask_bits(improved) == 0xf) break;
        h = h * Vec(0.5);
      }

      Vec active = notv(done);
      Vec stalled = andv(active, notv(improved));
      converged = orv(converged, stalled);
      done = orv(done, stalled);

      Vec advance = andv(active, improved);
      s.a = blend(advance, na, s.a);
      s.b = blend(advance, nb, s.b);
      s.c = blend(advance, nc, s.c);
      residuals(p, s, f, prod_re);
      fsq = sq_norm4(f);

      Vec tiny = andv(advance, lt(fsq, Vec(1e-30)));
      converged = orv(converged, tiny);
      done = orv(done, tiny);

      if (mask_bits(done) == 0xf) break;
    }

    residuals(p, s, f, prod_re);
    Vec resid = max_abs4(f);
    alignas(32) double oa[4], ob[4], oc[4], orr[4];
    _mm256_store_pd(oa, s.a.v);
    _mm256_store_pd(ob, s.b.v);
    _mm256_store_pd(oc, s.c.v);
    _mm256_store_pd(orr, resid.v);
    int conv_bits = mask_bits(converged);
    for (int l = 0; l < 4; ++l) {
      SeedResult& r = out[i + l];
      r.a = oa[l];
      r.b = ob[l];
      r.c = oc[l];
      r.resid = orr[l];
      r.converged = (conv_bits >> l) & 1;
      r.accepted = r.converged && r.resid <= prm.accept_tol;
    }
  }
  if (i < n) scalar_impl()(p, pa + i, pb + i, pc + i, n - i, prm, out + i);
}

}  // namespace

LinkBatchFn avx2_impl() { return &run_avx2; }

}  // namespace calib6::kern

#else

namespace calib6::kern {
LinkBatchFn avx2_impl() { return nullptr; }
}  // namespace calib6::kern

#endif
