#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "calib6/gluing.hpp"

using namespace calib6;

namespace {

TubeGrid unit_grid(int n = 9) {
  TubeGrid g;
  g.tube_radius = 0.3;
  g.p3 = 1;
  g.r0 = 1.0 / 32;
  g.n_perp = n;
  g.n_axial = 2 * n - 1;
  g.lo = {-0.3, -0.3, 0.2};
  g.hi = {0.3, 0.3, 1.8};
  g.normal = {Vector6d::Unit(3), Vector6d::Unit(4), Vector6d::Unit(5)};
  return g;
}

// smooth compactly-varying 2-form with closed-form coefficients
FormField smooth_two_form() {
  FormField f;
  f.degree = 2;
  f.eval = [](const Vector6d& x) {
    KFormD w(2);
    double s = std::sin(x(0) + 0.3 * x(4)), c = std::cos(x(2) - x(5));
    double q = std::exp(-0.5 * (x(1) * x(1) + x(3) * x(3)));
    w.add_term({0, 3}, s * q);
    w.add_term({1, 4}, c * q);
    w.add_term({2, 5}, s * c);
    w.add_term({0, 4}, 0.4 * q);
    w.add_term({3, 5}, 0.2 * s);
    return w;
  };
  return f;
}

}  // namespace

TEST_CASE("homotopy operator: primitives of exact forms") {
  auto grid = unit_grid();
  Vector6d steps;
  steps << 1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3;

  // tau = d(smooth 2-form) is closed and the operator must invert d on it
  FormField base = smooth_two_form();
  FormField tau{3, [base, steps](const Vector6d& x) {
                  return fd_exterior_derivative(base, x, steps);
                }};

  auto res = homotopy_primitive(tau, grid, 5e-6);
  CHECK(res.max_input_closedness <= 5e-6);
  CHECK(res.max_defect <= 5e-5);
  CHECK(res.max_on_base <= 1e-14);

  // zero input gives the zero primitive
  FormField zero{3, [](const Vector6d&) { return KFormD(3); }};
  auto zres = homotopy_primitive(zero, grid, 5e-6);
  Vector6d x;
  x << 0.1, -0.2, 1.0, 0.2, 0.1, -0.05;
  CHECK((double)max_abs_coeff(zres.primitive.eval(x)) == 0.0);
}

TEST_CASE("homotopy operator rejects non-closed input") {
  auto grid = unit_grid();
  FormField bad{3, [](const Vector6d& x) {
                  KFormD w(3);
                  w.add_term({0, 1, 3}, x(4));  // d has a dy2 dy1... term
                  w.add_term({2, 4, 5}, x(0) * x(3));
                  return w;
                }};
  CHECK_THROWS(homotopy_primitive(bad, grid, 5e-6));
}

TEST_CASE("Cartan identity diagnostic on non-closed input") {
  FormField field{3, [](const Vector6d& x) {
                    KFormD w(3);
                    w.add_term({0, 1, 3}, std::sin(x(4)) * 0.2);
                    w.add_term({1, 3, 4}, x(5) * 0.1);
                    w.add_term({2, 4, 5}, 0.3 * std::cos(x(0)));
                    return w;
                  }};
  Vector6d steps;
  steps << 2e-3, 2e-3, 2e-3, 2e-3, 2e-3, 2e-3;
  for (auto& pt : {std::array<double, 6>{0.1, 0.0, 0.9, 0.15, -0.1, 0.2},
                   std::array<double, 6>{-0.2, 0.1, 1.2, -0.1, 0.2, 0.1}}) {
    Vector6d x;
    for (int i = 0; i < 6; ++i) x(i) = pt[i];
    KFormD defect = cartan_defect(field, x, steps);
    CHECK((double)max_abs_coeff(defect) <= 5e-5);
  }
}

TEST_CASE("tangent frames of the model surface") {
  MonotoneProfile prof(0.3, 0.9, 0.2, 1.8);
  auto pot = std::make_shared<QuadraticModelPotential>(
      [prof](double t) { return prof.eval(t); },
      Box3{{-0.4, -0.4, 0.0}, {0.4, 0.4, 2.0}});
  auto grid = unit_grid();
  auto frames = tangent_frame_field(pot, grid);
  CHECK(frames.max_unitary_defect <= 1e-10);
  CHECK(frames.max_span_defect <= 1e-8);
  CHECK(frames.min_chart_det > 1e-6);

  // flat region: identity frame, zero angle
  auto flat = std::make_shared<ZeroPotential>(Box3{grid.lo, grid.hi});
  auto fframes = tangent_frame_field(flat, grid);
  CHECK((fframes.frame_op(Eigen::Vector3d(0.1, 0.2, 1.0)) -
         Matrix3cd::Identity())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(fframes.theta(Eigen::Vector3d(0.1, 0.2, 1.0)) == 0.0);

  // on the axis the angle vanishes and the finite-difference derivative
  // along the axis is tiny
  for (double x3 : {0.3, 0.8, 1.4}) {
    CHECK(std::abs(frames.theta(Eigen::Vector3d(0, 0, x3))) <= 1e-12);
    double h = 1e-4;
    double fd = (frames.theta(Eigen::Vector3d(0, 0, x3 + h)) -
                 frames.theta(Eigen::Vector3d(0, 0, x3 - h))) /
                (2 * h);
    CHECK(std::abs(fd) <= 1e-8);
  }

  // dtheta matches finite differences off the axis
  Eigen::Vector3d x(0.21, -0.13, 0.9);
  Eigen::Vector3d analytic = frames.dtheta(x);
  for (int k = 0; k < 3; ++k) {
    double h = 1e-5;
    Eigen::Vector3d e = Eigen::Vector3d::Unit(k) * h;
    double fd = (frames.theta(x + e) - frames.theta(x - e)) / (2 * h);
    CHECK(analytic(k) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("modified form: two routes agree and derivative matches FD") {
  MonotoneProfile prof(0.2, 0.7, 0.2, 1.8);
  auto pot = std::make_shared<QuadraticModelPotential>(
      [prof](double t) { return prof.eval(t); },
      Box3{{-0.4, -0.4, 0.0}, {0.4, 0.4, 2.0}});
  auto grid = unit_grid();
  auto frames = tangent_frame_field(pot, grid);
  auto mf = modified_form(frames);
  CHECK(mf.route_disagreement <= 1e-12);

  Vector6d steps;
  steps << 1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3;
  for (auto x3 : {0.5, 1.0, 1.5}) {
    Vector6d x;
    x << 0.12, -0.07, x3, 0.0, 0.0, 0.0;
    KFormD fd = fd_exterior_derivative(mf.chart, x, steps);
    KFormD an = mf.chart_derivative.eval(x);
    CHECK((double)max_abs_coeff(fd - an) <= 5e-6);
  }
}

TEST_CASE("rotating tangent bridge certificates") {
  auto grid = unit_grid(13);
  MonotoneProfile prof(0.3, 0.9, grid.lo(2) + 0.2, grid.hi(2) - 0.2);
  auto bridge = rotating_tangent_bridge(0.3, 0.9, prof, grid);
  CHECK(bridge.tsp_defect <= 1e-10);
  CHECK(bridge.mc_on_axis <= 1e-8);
  CHECK(bridge.axis_only_margin > 0.5);
  CHECK(bridge.fitted_constant > 0.0);
  CHECK(bridge.fitted_constant < 50.0);

  // constant profile: constant tangent planes
  MonotoneProfile flat(0.5, 0.5, 0.5, 1.5);
  auto same = rotating_tangent_bridge(0.5, 0.5, flat, grid);
  CHECK(same.tsp_defect <= 1e-14);

  // non-monotone profile rejected
  auto wiggly = MonotoneProfile(0.9, 0.3, 0.5, 1.5);
  CHECK_THROWS(rotating_tangent_bridge(0.3, 0.9, wiggly, grid));
}

TEST_CASE("euclidean comass of the calibration form is one") {
  ComassOptions o;
  o.starts = 200;
  o.sweep = 20000;
  auto phi = special_lagrangian_form<double>();
  auto res = comass(phi, Matrix6d::Identity(), o);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.sweep_best <= res.value + 1e-12);

  KFormD d123(3);
  d123.add_term({0, 1, 2}, 1.0);
  CHECK(comass(d123, Matrix6d::Identity(), o).value ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("comass transforms correctly under a metric pullback") {
  // pulled-back pair (psi, g) has the same comass as (phi, delta)
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.08, 0.08);
  Matrix6d t = Matrix6d::Identity();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) t(i, j) += u(rng);
  Matrix6d tinv = t.inverse();
  auto phi = special_lagrangian_form<double>();
  KFormD psi = pullback(to_linear_map(tinv), phi);
  Matrix6d gram = (t * t.transpose()).inverse();
  ComassOptions o;
  o.starts = 300;
  o.sweep = 20000;
  auto res = comass(psi, gram, o);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("glue pipeline, slopes mode at test resolution") {
  GlueConfig cfg;
  cfg.mode = GlueMode::slopes;
  cfg.grid_n = 13;
  cfg.grid_axial = 129;
  cfg.gamma_samples = 17;
  cfg.comass_points = 2;
  cfg.comass_starts = 120;
  cfg.comass_sweep = 8000;
  cfg.factor_samples = 24;
  auto run = run_glue_pipeline(cfg);
  for (const auto& c : run.checks) {
    INFO(c.name, " value=", c.value, " tol=", c.tol);
    CHECK(c.pass);
  }
  CHECK(run.all_pass);
}

TEST_CASE("glue pipeline, tangent mode at test resolution") {
  GlueConfig cfg;
  cfg.mode = GlueMode::tangent;
  cfg.grid_n = 13;
  cfg.grid_axial = 129;
  cfg.gamma_samples = 17;
  cfg.comass_points = 2;
  cfg.comass_starts = 120;
  cfg.comass_sweep = 8000;
  cfg.factor_samples = 24;
  auto run = run_glue_pipeline(cfg);
  for (const auto& c : run.checks) {
    INFO(c.name, " value=", c.value, " tol=", c.tol);
    CHECK(c.pass);
  }
  CHECK(run.all_pass);
}

TEST_CASE("glue pipeline, reflected mode at test resolution") {
  GlueConfig cfg;
  cfg.mode = GlueMode::reflected;
  cfg.grid_n = 13;
  cfg.grid_axial = 129;
  cfg.gamma_samples = 17;
  cfg.comass_points = 2;
  cfg.comass_starts = 120;
  cfg.comass_sweep = 8000;
  cfg.factor_samples = 24;
  auto run = run_glue_pipeline(cfg);
  for (const auto& c : run.checks) {
    INFO(c.name, " value=", c.value, " tol=", c.tol);
    CHECK(c.pass);
  }
  CHECK(run.all_pass);
}
