#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>

#include "calib6/forms.hpp"
#include "calib6/linalg.hpp"

using namespace calib6;

namespace {

// Independent oracle: expand Re/Im of dz1^dz2^dz3 on three vectors by raw
// complex arithmetic, no exterior-algebra machinery involved.
std::complex<double> holomorphic_volume(const Vec6& u, const Vec6& v, const Vec6& w) {
  auto zc = [](const Vec6& a, int j) {
    return std::complex<double>(a[j], a[3 + j]);
  };
  std::complex<double> m[3][3];
  const Vec6* rows[3] = {&u, &v, &w};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = zc(*rows[r], c);
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Vec6 basis_vec(int i) {
  Vec6 v{};
  v[i] = 1.0;
  return v;
}

KFormD random_form(int degree, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  KFormD a(degree);
  for (auto& c : a.coeffs) c = u(rng);
  return a;
}

Vec6 random_vec(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Vec6 v;
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("special Lagrangian form coefficients") {
  auto phi = special_lagrangian_form<double>();
  CHECK(phi.degree == 3);
  CHECK(phi[0b000111] == doctest::Approx(1.0));   // x1 x2 x3
  CHECK(phi[0b111000] == doctest::Approx(0.0));   // y1 y2 y3
  int nonzero = 0;
  for (double c : phi.coeffs) {
    if (c != 0.0) {
      ++nonzero;
      CHECK(std::abs(c) == doctest::Approx(1.0));
    }
  }
  CHECK(nonzero == 4);
}

TEST_CASE("phi matches the Re dz1dz2dz3 expansion oracle on all basis triples") {
  auto phi = special_lagrangian_form<double>();
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int k = j + 1; k < 6; ++k) {
        double direct =
            evaluate(phi, {basis_vec(i), basis_vec(j), basis_vec(k)});
        double oracle =
            holomorphic_volume(basis_vec(i), basis_vec(j), basis_vec(k)).real();
        CHECK(direct == doctest::Approx(oracle).epsilon(1e-14));
      }
}

TEST_CASE("wedge basics") {
  KFormD dx1(1), dx2(1), dx3(1);
  dx1.coeffs[0] = 1;
  dx2.coeffs[1] = 1;
  dx3.coeffs[2] = 1;
  auto zero = wedge(dx1, dx1);
  CHECK(max_abs_coeff(zero) == 0.0);
  auto d12 = wedge(dx1, dx2);
  CHECK(d12[0b000011] == doctest::Approx(1.0));
  auto d123 = wedge(d12, dx3);
  CHECK(d123[0b000111] == doctest::Approx(1.0));
  KFormD six(6);
  six.coeffs[0] = 1;
  CHECK_THROWS(wedge(six, dx1));
}

TEST_CASE("graded anticommutativity, float and rational") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int k = 1 + trial % 3, l = 1 + (trial / 3) % 3;
    if (k + l > 6) continue;
    auto a = random_form(k, rng), b = random_form(l, rng);
    auto ab = wedge(a, b), ba = wedge(b, a);
    double sign = (k * l) % 2 ? -1.0 : 1.0;
    for (size_t i = 0; i < ab.coeffs.size(); ++i)
      CHECK(ab.coeffs[i] == doctest::Approx(sign * ba.coeffs[i]).epsilon(1e-12));
  }
  // exact case
  KFormQ a(2), b(3);
  a.add_term({0, 3}, Rational(2, 3));
  a.add_term({1, 4}, Rational(-1, 7));
  b.add_term({2, 4, 5}, Rational(5, 2));
  b.add_term({0, 1, 5}, Rational(1, 3));
  auto ab = wedge(a, b), ba = wedge(b, a);
  for (size_t i = 0; i < ab.coeffs.size(); ++i)
    CHECK(ab.coeffs[i] == ba.coeffs[i]);
}

TEST_CASE("interior product") {
  auto phi = special_lagrangian_form<double>();
  Vec6 e3 = basis_vec(2);  // d/dx3
  auto c = interior(e3, phi);
  // dx1^dx2 - dy1^dy2
  CHECK(c[0b000011] == doctest::Approx(1.0));
  CHECK(c[0b011000] == doctest::Approx(-1.0));
  double rest = 0;
  for (unsigned m : multiindex::basis(2))
    if (m != 0b000011u && m != 0b011000u) rest += std::abs(c[m]);
  CHECK(rest == doctest::Approx(0.0));

  KFormD d123(3);
  d123.add_term({0, 1, 2}, 1.0);
  CHECK(max_abs_coeff(interior(basis_vec(5), d123)) == 0.0);
}

TEST_CASE("interior is an antiderivation and squares to zero") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_form(2, rng);
    auto b = random_form(1 + trial % 2, rng);
    auto v = random_vec(rng);
    auto lhs = interior(v, wedge(a, b));
    auto rhs = wedge(interior(v, a), b) + wedge(a, interior(v, b));
    // deg a = 2, so the sign on the second term is +1
    for (size_t i = 0; i < lhs.coeffs.size(); ++i)
      CHECK(lhs.coeffs[i] == doctest::Approx(rhs.coeffs[i]).epsilon(1e-12));

    auto twice = interior(v, interior(v, random_form(3, rng)));
    CHECK(max_abs_coeff(twice) < 1e-14);
  }
}

TEST_CASE("pullback: identity, scaling, contravariance") {
  std::mt19937 rng(3);
  auto phi = special_lagrangian_form<double>();
  auto id = LinearMap6D::identity();
  auto p = pullback(id, phi);
  for (size_t i = 0; i < p.coeffs.size(); ++i)
    CHECK(p.coeffs[i] == doctest::Approx(phi.coeffs[i]));

  LinearMap6D two;
  for (int i = 0; i < 6; ++i) two(i, i) = 2.0;
  auto p8 = pullback(two, phi);
  for (size_t i = 0; i < p8.coeffs.size(); ++i)
    CHECK(p8.coeffs[i] == doctest::Approx(8.0 * phi.coeffs[i]));

  for (int trial = 0; trial < 8; ++trial) {
    LinearMap6D g, h;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        g(i, j) = std::uniform_real_distribution<double>(-1, 1)(rng);
        h(i, j) = std::uniform_real_distribution<double>(-1, 1)(rng);
      }
    auto a = random_form(3, rng);
    auto lhs = pullback(g * h, a);
    auto rhs = pullback(h, pullback(g, a));
    for (size_t i = 0; i < lhs.coeffs.size(); ++i)
      CHECK(lhs.coeffs[i] == doctest::Approx(rhs.coeffs[i]).epsilon(1e-10));
  }
}

TEST_CASE("pullback agrees with brute-force multilinear evaluation") {
  std::mt19937 rng(5);
  LinearMap6D h;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      h(i, j) = std::uniform_real_distribution<double>(-1, 1)(rng);
  auto a = random_form(3, rng);
  auto ha = pullback(h, a);
  for (unsigned m : multiindex::basis(3)) {
    auto ax = multiindex::axes(m);
    std::vector<Vec6> imgs;
    for (int axi : ax) {
      Vec6 img{};
      for (int r = 0; r < 6; ++r) img[r] = h(r, axi);
      imgs.push_back(img);
    }
    CHECK(ha[m] == doctest::Approx(evaluate(a, imgs)).epsilon(1e-12));
  }
}

TEST_CASE("SU(3) invariance of phi") {
  std::mt19937 rng(17);
  auto phi = special_lagrangian_form<double>();

  // fixed diagonal example first
  double th = 0.7;
  auto d = realify(diag_unitary(th, 0.0, -th));
  auto p = pullback(d, phi);
  for (size_t i = 0; i < p.coeffs.size(); ++i)
    CHECK(p.coeffs[i] == doctest::Approx(phi.coeffs[i]).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    auto u = random_su3(rng);
    auto pu = pullback(realify(u), phi);
    for (size_t i = 0; i < pu.coeffs.size(); ++i)
      CHECK(pu.coeffs[i] == doctest::Approx(phi.coeffs[i]).epsilon(1e-10));
  }
}

TEST_CASE("complex structure pullback") {
  auto phi = special_lagrangian_form<double>();
  auto jphi = complex_structure_pullback(phi);

  // J* phi is Im dz1dz2dz3: oracle comparison on every basis triple
  for (unsigned m : multiindex::basis(3)) {
    auto ax = multiindex::axes(m);
    double oracle =
        holomorphic_volume(basis_vec(ax[0]), basis_vec(ax[1]), basis_vec(ax[2]))
            .imag();
    CHECK(jphi[m] == doctest::Approx(oracle).epsilon(1e-14));
  }
  KVectorD e123 = wedge(wedge(kvector_from(basis_vec(0)), kvector_from(basis_vec(1))),
                        kvector_from(basis_vec(2)));
  CHECK(evaluate(jphi, e123) == doctest::Approx(0.0));

  // J^4 = identity on forms
  auto four = complex_structure_pullback(
      complex_structure_pullback(complex_structure_pullback(jphi)));
  for (size_t i = 0; i < four.coeffs.size(); ++i)
    CHECK(four.coeffs[i] == doctest::Approx(phi.coeffs[i]));

  // theta = 0 rotation leaves phi alone
  auto rot = std::cos(0.0) * phi - std::sin(0.0) * jphi;
  for (size_t i = 0; i < rot.coeffs.size(); ++i)
    CHECK(rot.coeffs[i] == doctest::Approx(phi.coeffs[i]));
}

TEST_CASE("evaluate pairing") {
  auto phi = special_lagrangian_form<double>();
  KVectorD e123 = wedge(wedge(kvector_from(basis_vec(0)), kvector_from(basis_vec(1))),
                        kvector_from(basis_vec(2)));
  KVectorD eyyy = wedge(wedge(kvector_from(basis_vec(3)), kvector_from(basis_vec(4))),
                        kvector_from(basis_vec(5)));
  CHECK(evaluate(phi, e123) == doctest::Approx(1.0));
  CHECK(evaluate(phi, eyyy) == doctest::Approx(0.0));
  KFormD d123(3);
  d123.add_term({0, 1, 2}, 1.0);
  CHECK(evaluate(d123, e123) == doctest::Approx(1.0));
  KFormD d12(2);
  d12.add_term({0, 1}, 1.0);
  CHECK_THROWS(evaluate(d12, e123));
}

TEST_CASE("simple 3-vectors pass the decomposability check") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    auto v1 = kvector_from(random_vec(rng));
    auto v2 = kvector_from(random_vec(rng));
    auto v3 = kvector_from(random_vec(rng));
    auto w = wedge(wedge(v1, v2), v3);
    CHECK(simplicity_defect(w) < 1e-12);
  }
  // generic sums of two simple 3-vectors are not simple
  auto w1 = wedge(wedge(kvector_from(basis_vec(0)), kvector_from(basis_vec(1))),
                  kvector_from(basis_vec(2)));
  auto w2 = wedge(wedge(kvector_from(basis_vec(3)), kvector_from(basis_vec(4))),
                  kvector_from(basis_vec(5)));
  CHECK(simplicity_defect(w1 + w2) > 0.5);
}

TEST_CASE("rational arithmetic is exact") {
  Rational a(1, 3), b(1, 6);
  CHECK(a + b == Rational(1, 2));
  CHECK(a * b == Rational(1, 18));
  CHECK(a - b == Rational(1, 6));
  CHECK(a / b == Rational(2));
  CHECK_THROWS(a / Rational(0));
}
