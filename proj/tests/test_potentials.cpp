#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "calib6/hl_cone.hpp"
#include "calib6/potentials.hpp"

using namespace calib6;

namespace {

// standard desk-scale aligned cone used across the gluing tests
struct ConeSetup {
  Matrix6d align;
  double alpha, beta;
  double rho_star;
};

const ConeSetup& setup() {
  static ConeSetup s = [] {
    auto p = plane_p(0, M_PI / 4);
    RayCountOptions o;
    o.seeds = 8000;
    auto rays = count_rays(p, o);
    REQUIRE(rays.count == 1);
    Eigen::Vector3cd v = complexify_row(rays.rays[0]).transpose();
    auto [alpha, beta] = hl::link_angles(v);
    auto tangent = hl::cone_tangent_plane(alpha, beta);
    auto res = align_pair(tangent, p, rays.rays[0]);
    Matrix3cd total = slope_flattening_rotation(res.rho) * res.s;
    return ConeSetup{realify6(total), alpha, beta, res.rho};
  }();
  return s;
}

Box3 tube_box(double r, double lo, double hi) {
  return Box3{{-r, -r, lo}, {r, r, hi}};
}

PotentialJet fd_jet(const PotentialPatch& f, const Eigen::Vector3d& x, double h) {
  // finite-difference gradient/hessian/third from values only
  PotentialJet out;
  out.value = f.eval(x).value;
  auto val = [&](const Eigen::Vector3d& p) { return f.eval(p).value; };
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d e = Eigen::Vector3d::Unit(i) * h;
    out.grad(i) = (val(x + e) - val(x - e)) / (2 * h);
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d ej = Eigen::Vector3d::Unit(j) * h;
      out.hess(i, j) =
          (val(x + e + ej) - val(x + e - ej) - val(x - e + ej) + val(x - e - ej)) /
          (4 * h * h);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("smooth step jets and flatness at breakpoints") {
  SmoothStep chi(0.25, 1.75);
  CHECK(chi(0.0) == 1.0);
  CHECK(chi(0.25) == 1.0);
  CHECK(chi(1.75) == 0.0);
  CHECK(chi(2.0) == 0.0);
  // monotone
  double prev = 1.0;
  for (double t = 0.25; t <= 1.75; t += 0.01) {
    CHECK(chi(t) <= prev + 1e-15);
    prev = chi(t);
  }
  // derivative jets against finite differences
  for (double t : {0.4, 0.9, 1.3, 1.6}) {
    Jet3 j = chi.eval(t);
    double h = 1e-5;
    double d1 = (chi(t + h) - chi(t - h)) / (2 * h);
    double d2 = (chi(t + h) - 2 * chi(t) + chi(t - h)) / (h * h);
    CHECK(j.d1 == doctest::Approx(d1).epsilon(1e-6));
    CHECK(j.d2 == doctest::Approx(d2).epsilon(1e-4));
  }
  // all computed derivatives vanish at the breakpoints
  for (double t : {0.25, 1.75}) {
    Jet3 j = chi.eval(t);
    CHECK(std::abs(j.d1) <= 1e-12);
    CHECK(std::abs(j.d2) <= 1e-12);
    CHECK(std::abs(j.d3) <= 1e-12);
  }
}

TEST_CASE("quadratic model potential jets match finite differences") {
  MonotoneProfile prof(0.3, 0.9, 0.5, 1.5);
  QuadraticModelPotential pot([&](double t) { return prof.eval(t); },
                              tube_box(0.2, 0.0, 2.0));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ux(-0.2, 0.2), uz(0.2, 1.8);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Vector3d x(ux(rng), ux(rng), uz(rng));
    auto jet = pot.eval(x);
    auto fd = fd_jet(pot, x, 1e-4);
    CHECK((jet.grad - fd.grad).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((jet.hess - fd.hess).cwiseAbs().maxCoeff() < 1e-5);
    // third derivatives against hessian differences
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Unit(k) * 1e-4;
      Eigen::Matrix3d dh =
          (pot.eval(x + e).hess - pot.eval(x - e).hess) / (2e-4);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          CHECK(jet.third(i, j, k) == doctest::Approx(dh(i, j)).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("cone graph potential: on-ray certificates and cone membership") {
  const auto& s = setup();
  Box3 box = tube_box(0.01, 0.6, 1.4);
  auto res = cone_graph_potential(s.align, s.alpha, s.beta, box, 32, 25);
  CHECK(res.max_on_ray_value <= 1e-8);
  CHECK(res.max_on_ray_grad <= 1e-8);
  CHECK(res.max_on_ray_hess <= 1e-8);
  CHECK(res.max_loop_integral <= 1e-8);

  // graph points really sit on the cone: un-align and check the link system
  Matrix6d inv = s.align.inverse();
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ux(-0.01, 0.01), uz(0.6, 1.4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d x(ux(rng), ux(rng), uz(rng));
    auto jet = res.potential->eval(x);
    Vector6d pt;
    pt << x(0), x(1), x(2), jet.grad(0), jet.grad(1), jet.grad(2);
    Vector6d w = inv * pt;
    double scale = w.norm();
    Eigen::Vector3cd z = complexify_row(w).transpose() / scale;
    CHECK(hl::link_residual(z).cwiseAbs().maxCoeff() < 1e-10);

    // Hessian symmetric (the graph 1-form is closed)
    CHECK((jet.hess - jet.hess.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // gradient consistent with the potential by finite differences
    auto fd = fd_jet(*res.potential, x, 2e-5);
    CHECK((jet.grad - fd.grad).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((jet.hess - fd.hess).cwiseAbs().maxCoeff() < 2e-5);
  }
}

TEST_CASE("cone flattens along the ray") {
  const auto& s = setup();
  Box3 box = tube_box(0.01, 0.5, 2.1);
  ConeGraphPotential pot(s.align, s.alpha, s.beta, box);
  auto sup_hess = [&](double x3) {
    double m = 0;
    for (double dx : {-0.01, 0.01})
      for (double dy : {-0.01, 0.01})
        m = std::max(m,
                     pot.eval(Eigen::Vector3d(dx, dy, x3)).hess.cwiseAbs().maxCoeff());
    return m;
  };
  CHECK(sup_hess(2.0) <= sup_hess(1.0) + 1e-12);
  CHECK(sup_hess(1.0) <= sup_hess(0.5) + 1e-12);
}

TEST_CASE("reflected potential is the reflected graph") {
  const auto& s = setup();
  double p3 = 1.0;
  Box3 box = tube_box(0.01, 0.1, 1.9);
  auto base = std::make_shared<ConeGraphPotential>(s.align, s.alpha, s.beta, box);
  ReflectedPotential refl(base, p3);

  Eigen::Vector3d x(0.004, -0.007, 1.3);
  auto a = refl.eval(x);
  auto b = base->eval(Eigen::Vector3d(-x(0), x(1), 2 * p3 - x(2)));
  CHECK(a.value == doctest::Approx(b.value));
  CHECK(a.grad(0) == doctest::Approx(-b.grad(0)));
  CHECK(a.grad(1) == doctest::Approx(b.grad(1)));
  CHECK(a.grad(2) == doctest::Approx(-b.grad(2)));
  auto fd = fd_jet(refl, x, 2e-5);
  CHECK((a.grad - fd.grad).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("bridged potential: axis invariants at 1e-8") {
  const auto& s = setup();
  double p3 = 1.0, r0 = 1.0 / 32;
  Box3 box = tube_box(0.008, r0 * 0.9, 2 * p3 - r0 * 0.9);
  auto f = std::make_shared<ConeGraphPotential>(s.align, s.alpha, s.beta, box);
  auto fp = std::make_shared<ReflectedPotential>(f, p3);
  SmoothStep chi(1.5 * r0, 2 * p3 - 1.5 * r0);

  auto bridged = bridge_potentials(f, fp, chi);
  CHECK(bridged->kind() == PotentialPatch::Kind::bridged);

  for (int i = 0; i <= 40; ++i) {
    double x3 = r0 + (2 * p3 - 2 * r0) * i / 40.0;
    Eigen::Vector3d x(0, 0, x3);
    auto jet = bridged->eval(x);
    CHECK(std::abs(jet.value) <= 1e-8);
    CHECK(jet.grad.norm() <= 1e-8);
    CHECK(jet.hess.cwiseAbs().maxCoeff() <= 1e-8);
    Vector6d h = mean_curvature_of_potential(*bridged, x);
    CHECK(h.norm() <= 1e-8);
  }

  // chi identically 1 reproduces the first potential
  SmoothStep late(2 * p3 + 1, 2 * p3 + 2);
  BridgedPotential same(f, fp, late);
  Eigen::Vector3d x(0.003, 0.002, 0.8);
  CHECK(same.eval(x).value == doctest::Approx(f->eval(x).value));
  CHECK((same.eval(x).grad - f->eval(x).grad).cwiseAbs().maxCoeff() < 1e-15);

  // cone glued to its own tangent plane
  auto flat = std::make_shared<ZeroPotential>(box);
  auto to_tangent = bridge_potentials(f, flat, chi);
  Eigen::Vector3d far_end(0.002, 0.001, 2 * p3 - r0);
  CHECK(to_tangent->eval(far_end).grad.norm() < 1e-12);

  // precondition violation: a potential without the axis vanishing
  auto bad = std::make_shared<QuadraticModelPotential>(
      [](double) { return Jet3::constant(0.5); }, box);
  CHECK_THROWS(bridge_potentials(bad, flat, chi));
}

TEST_CASE("mean curvature basics") {
  // flat graph
  Eigen::Matrix<double, 6, 3> first;
  std::array<Eigen::Matrix3d, 6> second;
  PotentialJet flat;
  gradient_graph_immersion(flat, first, second);
  CHECK(mean_curvature(first, second).norm() == 0.0);

  // rotating-slope model surface: H = 0 on the axis
  MonotoneProfile prof(0.3, 0.9, 0.5, 1.5);
  QuadraticModelPotential pot([&](double t) { return prof.eval(t); },
                              tube_box(0.3, 0.0, 2.0));
  for (double x3 : {0.1, 0.7, 1.0, 1.3, 1.9}) {
    Vector6d h = mean_curvature_of_potential(pot, Eigen::Vector3d(0, 0, x3));
    CHECK(h.norm() <= 1e-8);
    // normal components against the axis normal frame
    double rho = prof(x3);
    Vector6d v4, v5, v6;
    v4 << -rho, 0, 0, 1, 0, 0;
    v5 << 0, rho, 0, 0, 1, 0;
    v6 << 0, 0, 0, 0, 0, 1;
    CHECK(std::abs(h.dot(v4)) <= 1e-8);
    CHECK(std::abs(h.dot(v5)) <= 1e-8);
    CHECK(std::abs(h.dot(v6)) <= 1e-8);
  }

  // off the axis the model surface has nonzero mean curvature somewhere
  Vector6d h_off =
      mean_curvature_of_potential(pot, Eigen::Vector3d(0.25, 0.1, 1.0));
  CHECK(h_off.norm() > 1e-6);

  // singular metric rejected
  Eigen::Matrix<double, 6, 3> sing = Eigen::Matrix<double, 6, 3>::Zero();
  CHECK_THROWS(mean_curvature(sing, second));
}
