#pragma once

#include <cmath>
#include <stdexcept>

namespace calib6 {

// value and first three derivatives of a scalar function of one variable
struct Jet3 {
  double f = 0, d1 = 0, d2 = 0, d3 = 0;

  static Jet3 constant(double c) { return {c, 0, 0, 0}; }
  static Jet3 variable(double x) { return {x, 1, 0, 0}; }

  friend Jet3 operator+(const Jet3& a, const Jet3& b) {
    return {a.f + b.f, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
  }
  friend Jet3 operator-(const Jet3& a, const Jet3& b) {
    return {a.f - b.f, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
  }
  friend Jet3 operator*(const Jet3& a, const Jet3& b) {
    return {a.f * b.f,
            a.d1 * b.f + a.f * b.d1,
            a.d2 * b.f + 2 * a.d1 * b.d1 + a.f * b.d2,
            a.d3 * b.f + 3 * a.d2 * b.d1 + 3 * a.d1 * b.d2 + a.f * b.d3};
  }
  friend Jet3 operator/(const Jet3& a, const Jet3& b) {
    // a/b = a * (1/b), with (1/b) derivatives from the reciprocal rule
    double ib = 1.0 / b.f;
    Jet3 r;
    r.f = ib;
    r.d1 = -b.d1 * ib * ib;
    r.d2 = (2 * b.d1 * b.d1 - b.f * b.d2) * ib * ib * ib;
    r.d3 = (-6 * b.d1 * b.d1 * b.d1 + 6 * b.f * b.d1 * b.d2 - b.f * b.f * b.d3) *
           ib * ib * ib * ib;
    return a * r;
  }
  friend Jet3 operator*(double s, const Jet3& a) {
    return {s * a.f, s * a.d1, s * a.d2, s * a.d3};
  }
};

// e^{-1/u} for u > 0, identically 0 for u <= 0; smooth across 0
inline Jet3 bump_exp(const Jet3& u) {
  if (u.f <= 0) return {};
  double iu = 1.0 / u.f;
  double e = std::exp(-iu);
  Jet3 s;  // derivatives of e^{-1/u} with respect to u
  s.f = e;
  s.d1 = e * iu * iu;
  s.d2 = e * (iu * iu * iu * iu - 2 * iu * iu * iu);
  s.d3 = e * (iu * iu * iu * iu * iu * iu - 6 * iu * iu * iu * iu * iu +
              6 * iu * iu * iu * iu);
  // chain through u(t)
  Jet3 r;
  r.f = s.f;
  r.d1 = s.d1 * u.d1;
  r.d2 = s.d2 * u.d1 * u.d1 + s.d1 * u.d2;
  r.d3 = s.d3 * u.d1 * u.d1 * u.d1 + 3 * s.d2 * u.d1 * u.d2 + s.d1 * u.d3;
  return r;
}

// C-infinity monotone step: 1 for t <= t0, 0 for t >= t1.
class SmoothStep {
 public:
  SmoothStep(double t0, double t1) : t0_(t0), t1_(t1) {
    if (!(t1 > t0)) throw std::invalid_argument("SmoothStep: t1 > t0 required");
  }

  Jet3 eval(double t) const {
    if (t <= t0_) return Jet3::constant(1.0);
    if (t >= t1_) return Jet3::constant(0.0);
    double w = t1_ - t0_;
    Jet3 u{(t - t0_) / w, 1.0 / w, 0, 0};
    Jet3 one_minus{1.0 - u.f, -u.d1, 0, 0};
    Jet3 a = bump_exp(one_minus), b = bump_exp(u);
    return a / (a + b);
  }
  double operator()(double t) const { return eval(t).f; }
  double lo() const { return t0_; }
  double hi() const { return t1_; }

 private:
  double t0_, t1_;
};

// Even bump used by the flow generators: b(s) = 1 for s <= inner,
// 0 for s >= outer, smooth monotone between (s is a squared distance).
class Bump {
 public:
  Bump(double inner, double outer) : step_(inner, outer) {}
  double operator()(double s) const { return step_(std::abs(s)); }
  Jet3 eval(double s) const { return step_.eval(std::abs(s)); }
  double inner() const { return step_.lo(); }
  double outer() const { return step_.hi(); }

 private:
  SmoothStep step_;
};

// monotone profile running from v0 to v1 across [t0, t1]
class MonotoneProfile {
 public:
  MonotoneProfile(double v0, double v1, double t0, double t1)
      : v0_(v0), v1_(v1), step_(t0, t1) {}

  Jet3 eval(double t) const {
    Jet3 s = step_.eval(t);  // 1 -> 0
    return Jet3::constant(v1_) + (v0_ - v1_) * s;
  }
  double operator()(double t) const { return eval(t).f; }
  double lo_value() const { return v0_; }
  double hi_value() const { return v1_; }

 private:
  double v0_, v1_;
  SmoothStep step_;
};

}  // namespace calib6
