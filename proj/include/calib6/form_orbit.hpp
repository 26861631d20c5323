#pragma once

#include <vector>

#include "calib6/linalg.hpp"

namespace calib6 {

// Differential of the orbit map h -> h^* phi at a 3-form: the 20x36 matrix
// of dl(h)(v1,v2,v3) = phi(h v1,v2,v3) + phi(v1,h v2,v3) + phi(v1,v2,h v3),
// rows over the degree-3 basis, column 6*r + c for the elementary matrix
// with h e_c = e_r.
template <class T>
std::vector<std::vector<T>> orbit_differential_matrix(const KForm<T>& phi);

struct OrbitDifferential {
  std::vector<std::vector<Rational>> matrix;  // 20 x 36
  long long entry_num(int row, int col) const { return matrix[row][col].num(); }
};

OrbitDifferential orbit_differential(const KForm<Rational>& phi);

// the same action as a form, for kernel membership checks
template <class T>
KForm<T> differential_action(const KForm<T>& phi, const LinearMap6<T>& h);

struct StabilizerResult {
  int rank = 0;
  int kernel_dim = 0;
};

// exact integer rank by fraction-free elimination
StabilizerResult stabilizer_dimension(const KForm<Rational>& phi);

// exact rank of an arbitrary integer matrix (Bareiss)
int integer_matrix_rank(std::vector<std::vector<long long>> m);

// the 16 realified basis elements of sl(3,C), integer 6x6 matrices
std::vector<LinearMap6<Rational>> sl3c_realified_basis();

bool kernel_contains_sl3c(const KForm<Rational>& phi);

struct KappaEntry {
  int n = 0, k = 0;
  long long kappa = 0;
  bool positive = false;
  bool matches_trichotomy = false;
};

// kappa(k,n) = n^2 - C(n,k) for all 0 <= k <= n <= n_max, compared against
// the positivity trichotomy (n <= 7; k in {0,1,2,n-2,n-1,n}; n = 8, k != 4)
std::vector<KappaEntry> kappa_table(int n_max);

struct FactorizeOptions {
  double tol = 1e-12;
  int max_iters = 50;
  double basin = 0.05;  // documented sup-norm basin around phi
};

struct FactorizeResult {
  Matrix6d h = Matrix6d::Identity();
  double residual = 0;
  int iterations = 0;
  bool outside_basin = false;
};

// h with pullback(h, phi) = tau via Newton steps through the minimum-norm
// right inverse of the orbit differential at the current iterate
FactorizeResult factorize_near_phi(const KFormD& tau, const FactorizeOptions& opts = {});

// smallest singular value of the 20x36 float differential at phi
double submersion_smallest_singular_value();

}  // namespace calib6
