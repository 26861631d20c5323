#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "calib6/multiindex.hpp"
#include "calib6/rational.hpp"

namespace calib6 {

// 6x6 matrix over an arbitrary scalar, acting on column vectors of R^6 in
// coordinates (x1,x2,x3,y1,y2,y3).
template <class T>
struct LinearMap6 {
  std::array<std::array<T, 6>, 6> m{};

  static LinearMap6 identity() {
    LinearMap6 h;
    for (int i = 0; i < 6; ++i) h.m[i][i] = T(1);
    return h;
  }
  T& operator()(int r, int c) { return m[r][c]; }
  const T& operator()(int r, int c) const { return m[r][c]; }

  friend LinearMap6 operator*(const LinearMap6& a, const LinearMap6& b) {
    LinearMap6 c;
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) {
        T s{};
        for (int j = 0; j < 6; ++j) s += a.m[i][j] * b.m[j][k];
        c.m[i][k] = s;
      }
    return c;
  }
};

namespace detail {

// Shared coefficient storage for alternating tensors: dense over the
// C(6,k) canonical basis, signs folded into strictly increasing indices.
template <class T>
struct Alternating {
  int degree = 0;
  std::vector<T> coeffs;  // indexed per multiindex::basis(degree)

  Alternating() : coeffs(1, T{}) {}
  explicit Alternating(int k) : degree(k), coeffs(multiindex::binom(6, k), T{}) {
    if (k < 0 || k > 6) throw std::invalid_argument("degree out of range");
  }

  T& operator[](unsigned mask) { return coeffs[multiindex::index_of(mask)]; }
  const T& operator[](unsigned mask) const {
    return coeffs[multiindex::index_of(mask)];
  }

  // coefficient on an arbitrary (possibly unsorted) axis tuple
  void add_term(std::initializer_list<int> axes_list, T value) {
    unsigned mask = 0;
    std::vector<int> a(axes_list);
    int sign = 1;
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = i + 1; j < a.size(); ++j) {
        if (a[i] == a[j]) return;  // repeated axis: zero
        if (a[i] > a[j]) sign = -sign;
      }
    for (int ax : a) mask |= 1u << ax;
    coeffs[multiindex::index_of(mask)] += (sign > 0 ? value : -value);
  }

  friend Alternating operator+(const Alternating& a, const Alternating& b) {
    check_same(a, b);
    Alternating c = a;
    for (size_t i = 0; i < c.coeffs.size(); ++i) c.coeffs[i] += b.coeffs[i];
    return c;
  }
  friend Alternating operator-(const Alternating& a, const Alternating& b) {
    check_same(a, b);
    Alternating c = a;
    for (size_t i = 0; i < c.coeffs.size(); ++i) c.coeffs[i] -= b.coeffs[i];
    return c;
  }
  friend Alternating operator*(const T& s, const Alternating& a) {
    Alternating c = a;
    for (auto& x : c.coeffs) x = s * x;
    return c;
  }
  static void check_same(const Alternating& a, const Alternating& b) {
    if (a.degree != b.degree)
      throw std::invalid_argument("degree mismatch");
  }
};

template <class T>
Alternating<T> wedge_impl(const Alternating<T>& a, const Alternating<T>& b) {
  if (a.degree + b.degree > 6)
    throw std::invalid_argument("wedge: degree overflow");
  Alternating<T> c(a.degree + b.degree);
  const auto& ba = multiindex::basis(a.degree);
  const auto& bb = multiindex::basis(b.degree);
  for (size_t i = 0; i < ba.size(); ++i) {
    if (a.coeffs[i] == T{}) continue;
    for (size_t j = 0; j < bb.size(); ++j) {
      if (b.coeffs[j] == T{}) continue;
      unsigned ma = ba[i], mb = bb[j];
      if (ma & mb) continue;
      int s = multiindex::merge_sign(ma, mb);
      T term = a.coeffs[i] * b.coeffs[j];
      c[ma | mb] += (s > 0 ? term : -term);
    }
  }
  return c;
}

template <class T>
Alternating<T> interior_impl(const std::array<T, 6>& v, const Alternating<T>& a) {
  if (a.degree < 1) throw std::invalid_argument("interior: degree < 1");
  Alternating<T> c(a.degree - 1);
  const auto& ba = multiindex::basis(a.degree);
  for (size_t i = 0; i < ba.size(); ++i) {
    if (a.coeffs[i] == T{}) continue;
    unsigned m = ba[i];
    for (int ax = 0; ax < 6; ++ax) {
      if (!(m & (1u << ax)) || v[ax] == T{}) continue;
      int s = multiindex::interior_sign(m, ax);
      T term = v[ax] * a.coeffs[i];
      c[m & ~(1u << ax)] += (s > 0 ? term : -term);
    }
  }
  return c;
}

template <class T>
T minor_det(const LinearMap6<T>& h, const std::vector<int>& rows,
            const std::vector<int>& cols);

// (h^* a)(v_1,..,v_k) = a(h v_1,..,h v_k); coefficient on J picks up the
// k x k minor of h with rows I, columns J.
template <class T>
Alternating<T> pullback_impl(const LinearMap6<T>& h, const Alternating<T>& a) {
  const int k = a.degree;
  Alternating<T> c(k);
  if (k == 0) { c.coeffs[0] = a.coeffs[0]; return c; }
  const auto& bs = multiindex::basis(k);
  for (size_t jj = 0; jj < bs.size(); ++jj) {
    auto cols = multiindex::axes(bs[jj]);
    T acc{};
    for (size_t ii = 0; ii < bs.size(); ++ii) {
      if (a.coeffs[ii] == T{}) continue;
      auto rows = multiindex::axes(bs[ii]);
      acc += a.coeffs[ii] * minor_det(h, rows, cols);
    }
    c.coeffs[jj] = acc;
  }
  return c;
}

template <class T>
T minor_det(const LinearMap6<T>& h, const std::vector<int>& rows,
            const std::vector<int>& cols) {
  const int k = (int)rows.size();
  switch (k) {
    case 1:
      return h(rows[0], cols[0]);
    case 2:
      return h(rows[0], cols[0]) * h(rows[1], cols[1]) -
             h(rows[0], cols[1]) * h(rows[1], cols[0]);
    case 3: {
      T a = h(rows[0], cols[0]), b = h(rows[0], cols[1]), c = h(rows[0], cols[2]);
      T d = h(rows[1], cols[0]), e = h(rows[1], cols[1]), f = h(rows[1], cols[2]);
      T g = h(rows[2], cols[0]), i = h(rows[2], cols[1]), j = h(rows[2], cols[2]);
      return a * (e * j - f * i) - b * (d * j - f * g) + c * (d * i - e * g);
    }
    default: {
      // Laplace expansion along the first row; k <= 6 so this stays small.
      T acc{};
      for (int c0 = 0; c0 < k; ++c0) {
        std::vector<int> sub_rows(rows.begin() + 1, rows.end());
        std::vector<int> sub_cols;
        for (int c1 = 0; c1 < k; ++c1)
          if (c1 != c0) sub_cols.push_back(cols[c1]);
        T term = h(rows[0], cols[c0]) * minor_det(h, sub_rows, sub_cols);
        acc += (c0 % 2) ? -term : term;
      }
      return acc;
    }
  }
}

}  // namespace detail

// Alternating k-form on R^6.
template <class T>
struct KForm : detail::Alternating<T> {
  using detail::Alternating<T>::Alternating;
  KForm(const detail::Alternating<T>& a) : detail::Alternating<T>(a) {}
};

// Alternating k-vector on R^6 (same storage, paired against KForm).
template <class T>
struct KVector : detail::Alternating<T> {
  using detail::Alternating<T>::Alternating;
  KVector(const detail::Alternating<T>& a) : detail::Alternating<T>(a) {}
};

template <class T>
KForm<T> operator+(const KForm<T>& a, const KForm<T>& b) {
  return KForm<T>(static_cast<const detail::Alternating<T>&>(a) +
                  static_cast<const detail::Alternating<T>&>(b));
}
template <class T>
KForm<T> operator-(const KForm<T>& a, const KForm<T>& b) {
  return KForm<T>(static_cast<const detail::Alternating<T>&>(a) -
                  static_cast<const detail::Alternating<T>&>(b));
}
template <class T>
KForm<T> operator*(const T& s, const KForm<T>& a) {
  return KForm<T>(s * static_cast<const detail::Alternating<T>&>(a));
}
template <class T>
KVector<T> operator+(const KVector<T>& a, const KVector<T>& b) {
  return KVector<T>(static_cast<const detail::Alternating<T>&>(a) +
                    static_cast<const detail::Alternating<T>&>(b));
}

template <class T>
KForm<T> wedge(const KForm<T>& a, const KForm<T>& b) {
  return detail::wedge_impl<T>(a, b);
}
template <class T>
KVector<T> wedge(const KVector<T>& a, const KVector<T>& b) {
  return detail::wedge_impl<T>(a, b);
}

template <class T>
KForm<T> interior(const std::array<T, 6>& v, const KForm<T>& a) {
  return detail::interior_impl<T>(v, a);
}

template <class T>
KForm<T> pullback(const LinearMap6<T>& h, const KForm<T>& a) {
  return detail::pullback_impl<T>(h, a);
}

// canonical pairing of a k-form with a k-vector
template <class T>
T evaluate(const KForm<T>& a, const KVector<T>& v) {
  if (a.degree != v.degree) throw std::invalid_argument("evaluate: degree mismatch");
  T s{};
  for (size_t i = 0; i < a.coeffs.size(); ++i) s += a.coeffs[i] * v.coeffs[i];
  return s;
}

template <class T>
KVector<T> kvector_from(const std::array<T, 6>& v) {
  KVector<T> k(1);
  for (int i = 0; i < 6; ++i) k.coeffs[i] = v[i];
  return k;
}

// Multilinear evaluation a(v_1,..,v_k) through the wedge of the arguments.
template <class T>
T evaluate(const KForm<T>& a, const std::vector<std::array<T, 6>>& vs) {
  if ((int)vs.size() != a.degree)
    throw std::invalid_argument("evaluate: degree mismatch");
  if (a.degree == 0) return a.coeffs[0];
  KVector<T> w = kvector_from(vs[0]);
  for (size_t i = 1; i < vs.size(); ++i) w = wedge(w, kvector_from(vs[i]));
  return evaluate(a, w);
}

// The special Lagrangian 3-form Re dz1^dz2^dz3 in coordinates
// (x1,x2,x3,y1,y2,y3):  dx1dx2dx3 - dy1dy2dx3 - dx1dy2dy3 - dy1dx2dy3.
template <class T = double>
KForm<T> special_lagrangian_form() {
  KForm<T> phi(3);
  phi.add_term({0, 1, 2}, T(1));
  phi.add_term({3, 4, 2}, T(-1));
  phi.add_term({0, 4, 5}, T(-1));
  phi.add_term({3, 1, 5}, T(-1));
  return phi;
}

// Realification of the complex structure z -> iz, i.e. the matrix J with
// J dx_j = dy_j, J dy_j = -dx_j on vectors.
template <class T = double>
LinearMap6<T> complex_structure_matrix() {
  LinearMap6<T> j;
  for (int k = 0; k < 3; ++k) {
    j(3 + k, k) = T(1);
    j(k, 3 + k) = T(-1);
  }
  return j;
}

template <class T>
KForm<T> complex_structure_pullback(const KForm<T>& a) {
  return pullback(complex_structure_matrix<T>(), a);
}

template <class T>
T max_abs_coeff(const detail::Alternating<T>& a) {
  T best{};
  for (const auto& c : a.coeffs) {
    T v = c < T{} ? -c : c;
    if (best < v) best = v;
  }
  return best;
}

using KFormD = KForm<double>;
using KVectorD = KVector<double>;
using KFormQ = KForm<Rational>;
using LinearMap6D = LinearMap6<double>;
using LinearMap6Q = LinearMap6<Rational>;
using Vec6 = std::array<double, 6>;

// Plucker-type decomposability test for a 3-vector: w is simple iff the
// contraction of w by every 2-covector wedges back to zero against w.
inline double simplicity_defect(const KVector<double>& w) {
  if (w.degree != 3) throw std::invalid_argument("simplicity_defect: degree != 3");
  double worst = 0;
  for (unsigned pair_mask : multiindex::basis(2)) {
    auto ax = multiindex::axes(pair_mask);
    // alpha = e_i* ^ e_j*  acting by double contraction
    KVector<double> contracted(1);
    for (unsigned m : multiindex::basis(3)) {
      if ((m & pair_mask) != pair_mask) continue;
      unsigned rest = m & ~pair_mask;
      int rest_axis = multiindex::axes(rest)[0];
      int s = multiindex::interior_sign(m, ax[0]) *
              multiindex::interior_sign(m & ~(1u << ax[0]), ax[1]);
      contracted.coeffs[rest_axis] += s * w[m];
    }
    KVector<double> res = detail::wedge_impl<double>(contracted, w);
    worst = std::max(worst, (double)max_abs_coeff(res));
  }
  return worst;
}

}  // namespace calib6
