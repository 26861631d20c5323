#pragma once

// Batched damped Gauss-Newton solver for intersections of the Harvey-Lawson
// link with a 3-plane spanned by complex rows R1,R2,R3:
//
//   v(a,b,c) = a R1 + b R2 + c R3,  (a,b,c) on the unit 2-sphere,
//   residuals  |v1|^2-1/3, |v2|^2-1/3, Re(v1v2v3)-1/(3sqrt3), Im(v1v2v3).
//
// Every seed runs the identical fixed-shape iteration (tangent-projected
// normal equations, step halving), which is what makes the lane-parallel
// AVX2 variant equivalent to the scalar reference.  Dispatch is at runtime;
// CALIB6_KERNEL=scalar|avx2 overrides.

namespace calib6::kern {

struct PlaneRows {
  double re[3][3];  // [row][coordinate]
  double im[3][3];
};

struct LinkBatchParams {
  int max_iters = 120;
  int max_halvings = 24;
  double accept_tol = 1e-10;  // max-abs residual acceptance
};

struct SeedResult {
  double a, b, c;
  double resid;    // final max-abs residual
  bool accepted;   // resid <= accept_tol
  bool converged;  // iteration reached a stationary point
};

using LinkBatchFn = void (*)(const PlaneRows&, const double* a, const double* b,
                             const double* c, int n, const LinkBatchParams&,
                             SeedResult* out);

LinkBatchFn scalar_impl();
LinkBatchFn avx2_impl();    // nullptr when unavailable
LinkBatchFn active_impl();  // runtime-dispatched choice
const char* active_name();

}  // namespace calib6::kern
