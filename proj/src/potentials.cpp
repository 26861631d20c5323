#include "calib6/potentials.hpp"

#include "calib6/hl_cone.hpp"

namespace calib6 {

namespace {

// 16-node Gauss-Legendre on [0,1]
constexpr int kGL = 16;
const double kGLx[kGL] = {
    0.005299532504175031, 0.0277124884633837,   0.06718439880608412,
    0.12229779582249845,  0.19106187779867811,  0.2709916111713863,
    0.35919822461037054,  0.45249374508118123,  0.5475062549188188,
    0.6408017753896295,   0.7290083888286136,   0.8089381222013219,
    0.8777022041775016,   0.9328156011939159,   0.9722875115366163,
    0.994700467495825};
const double kGLw[kGL] = {
    0.013576229705877047, 0.03112676196932395,  0.04757925584124639,
    0.06231448562776694,  0.07479799440828837,  0.08457825969750127,
    0.09130170752246179,  0.0947253052275343,   0.0947253052275343,
    0.09130170752246179,  0.08457825969750127,  0.07479799440828837,
    0.06231448562776694,  0.04757925584124639,  0.03112676196932395,
    0.013576229705877047};

}  // namespace

PotentialJet QuadraticModelPotential::eval(const Eigen::Vector3d& x) const {
  Jet3 r = profile_(x(2));
  double q = 0.5 * (x(0) * x(0) - x(1) * x(1));
  PotentialJet out;
  out.value = r.f * q;
  out.grad = Eigen::Vector3d(r.f * x(0), -r.f * x(1), r.d1 * q);
  out.hess << r.f, 0, r.d1 * x(0),
              0, -r.f, -r.d1 * x(1),
              r.d1 * x(0), -r.d1 * x(1), r.d2 * q;
  auto set_sym = [&](int i, int j, int k, double v) {
    int idx[3] = {i, j, k};
    std::sort(idx, idx + 3);
    do {
      out.third(idx[0], idx[1], idx[2]) = v;
    } while (std::next_permutation(idx, idx + 3));
  };
  set_sym(0, 0, 2, r.d1);
  set_sym(1, 1, 2, -r.d1);
  set_sym(0, 2, 2, r.d2 * x(0));
  set_sym(1, 2, 2, -r.d2 * x(1));
  out.third(2, 2, 2) = r.d3 * q;
  return out;
}

ConeGraphPotential::ConeGraphPotential(const Matrix6d& align, double ray_alpha,
                                       double ray_beta, Box3 domain)
    : PotentialPatch(Kind::cone_graph, domain),
      align_(align),
      a0_(ray_alpha),
      b0_(ray_beta) {}

namespace {

// aligned cone point and its parameter derivatives through order two
struct ConePointJet {
  Vector6d w;
  Vector6d dw[3];      // d/ds, d/dalpha, d/dbeta
  Vector6d ddw[3][3];  // symmetric
};

ConePointJet cone_point_jet(const Matrix6d& align, double s, double a, double b) {
  Eigen::Vector3cd f = hl::link_point(a, b);
  const complexd i(0, 1);
  Eigen::Vector3cd fa(i * f(0), 0.0, -i * f(2));
  Eigen::Vector3cd fb(0.0, i * f(1), -i * f(2));
  Eigen::Vector3cd faa(-f(0), 0.0, -f(2));
  Eigen::Vector3cd fbb(0.0, -f(1), -f(2));
  Eigen::Vector3cd fab(0.0, 0.0, -f(2));

  auto lift = [&](const Eigen::Vector3cd& z) -> Vector6d {
    return align * realify_row(z.transpose());
  };
  ConePointJet out;
  out.w = s * lift(f);
  out.dw[0] = lift(f);
  out.dw[1] = s * lift(fa);
  out.dw[2] = s * lift(fb);
  out.ddw[0][0] = Vector6d::Zero();
  out.ddw[0][1] = out.ddw[1][0] = lift(fa);
  out.ddw[0][2] = out.ddw[2][0] = lift(fb);
  out.ddw[1][1] = s * lift(faa);
  out.ddw[1][2] = out.ddw[2][1] = s * lift(fab);
  out.ddw[2][2] = s * lift(fbb);
  return out;
}

}  // namespace

Eigen::Vector3d ConeGraphPotential::solve_params(const Eigen::Vector3d& x) const {
  Eigen::Vector3d u(x(2), a0_, b0_);  // on-ray initial guess
  for (int iter = 0; iter < 60; ++iter) {
    auto jet = cone_point_jet(align_, u(0), u(1), u(2));
    Eigen::Vector3d res = jet.w.head<3>() - x;
    if (res.cwiseAbs().maxCoeff() < 1e-14) return u;
    Eigen::Matrix3d jac;
    for (int c = 0; c < 3; ++c) jac.col(c) = jet.dw[c].head<3>();
    Eigen::Vector3d step = jac.partialPivLu().solve(res);
    u -= step;
    if (step.cwiseAbs().maxCoeff() < 1e-15) {
      auto check = cone_point_jet(align_, u(0), u(1), u(2));
      if ((check.w.head<3>() - x).cwiseAbs().maxCoeff() < 1e-12) return u;
      break;
    }
  }
  throw std::runtime_error(
      "cone graph: projection failed at node (" + std::to_string(x(0)) + ", " +
      std::to_string(x(1)) + ", " + std::to_string(x(2)) + ")");
}

void ConeGraphPotential::graph_jet(const Eigen::Vector3d& x, Eigen::Vector3d& y,
                                   Eigen::Matrix3d& dy, Sym3Tensor& ddy) const {
  Eigen::Vector3d u = solve_params(x);
  auto jet = cone_point_jet(align_, u(0), u(1), u(2));
  y = jet.w.tail<3>();

  Eigen::Matrix3d ax, bx;  // base and fiber parameter derivatives
  for (int c = 0; c < 3; ++c) {
    ax.col(c) = jet.dw[c].head<3>();
    bx.col(c) = jet.dw[c].tail<3>();
  }
  Eigen::Matrix3d du = ax.inverse();  // du/dx
  dy = bx * du;

  // second derivatives: d2u = -du . A''[du, du],  d2y = B''[du,du] + B' d2u
  for (int p = 0; p < 3; ++p)
    for (int q = p; q < 3; ++q) {
      Eigen::Vector3d a2 = Eigen::Vector3d::Zero();
      Eigen::Vector3d b2 = Eigen::Vector3d::Zero();
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) {
          a2 += du(m, p) * du(n, q) * jet.ddw[m][n].head<3>();
          b2 += du(m, p) * du(n, q) * jet.ddw[m][n].tail<3>();
        }
      Eigen::Vector3d d2u = -du * a2;
      Eigen::Vector3d v = b2 + bx * d2u;
      for (int r = 0; r < 3; ++r) {
        ddy(r, p, q) = v(r);
        ddy(r, q, p) = v(r);
      }
    }
}

PotentialJet ConeGraphPotential::eval(const Eigen::Vector3d& x) const {
  PotentialJet out;
  Eigen::Vector3d y;
  Eigen::Matrix3d dy;
  Sym3Tensor ddy_raw;
  graph_jet(x, y, dy, ddy_raw);
  out.grad = y;
  out.hess = 0.5 * (dy + dy.transpose());  // Lagrangian: dy is symmetric
  // third(i,j,k) = d_i d_j grad_k, symmetrized
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        out.third(i, j, k) = ddy_raw(k, i, j);

  // potential value: integrate the 1-form y . dx radially from the axis
  double acc = 0;
  for (int q = 0; q < kGL; ++q) {
    double t = kGLx[q];
    Eigen::Vector3d c(t * x(0), t * x(1), x(2));
    Eigen::Vector3d yq, dum_y;
    Eigen::Matrix3d dum;
    Sym3Tensor dumt;
    graph_jet(c, yq, dum, dumt);
    acc += kGLw[q] * (yq(0) * x(0) + yq(1) * x(1));
  }
  out.value = acc;
  return out;
}

ReflectedPotential::ReflectedPotential(PotentialPtr base, double p3)
    : PotentialPatch(Kind::reflected,
                     Box3{{-base->domain().hi(0), base->domain().lo(1),
                           2 * p3 - base->domain().hi(2)},
                          {-base->domain().lo(0), base->domain().hi(1),
                           2 * p3 - base->domain().lo(2)}}),
      base_(std::move(base)),
      p3_(p3) {}

PotentialJet ReflectedPotential::eval(const Eigen::Vector3d& x) const {
  const double sgn[3] = {-1, 1, -1};
  Eigen::Vector3d xr(-x(0), x(1), 2 * p3_ - x(2));
  PotentialJet in = base_->eval(xr);
  PotentialJet out;
  out.value = in.value;
  for (int i = 0; i < 3; ++i) out.grad(i) = sgn[i] * in.grad(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.hess(i, j) = sgn[i] * sgn[j] * in.hess(i, j);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        out.third(i, j, k) = sgn[i] * sgn[j] * sgn[k] * in.third(i, j, k);
  return out;
}

BridgedPotential::BridgedPotential(PotentialPtr f, PotentialPtr f_prime,
                                   SmoothStep chi)
    : PotentialPatch(Kind::bridged, f->domain()),
      f_(std::move(f)),
      fp_(std::move(f_prime)),
      chi_(chi) {}

PotentialJet BridgedPotential::eval(const Eigen::Vector3d& x) const {
  PotentialJet a = f_->eval(x), b = fp_->eval(x);
  Jet3 c = chi_.eval(x(2));

  PotentialJet out;
  double dv = a.value - b.value;
  Eigen::Vector3d dg = a.grad - b.grad;
  Eigen::Matrix3d dh = a.hess - b.hess;

  out.value = c.f * a.value + (1 - c.f) * b.value;
  out.grad = c.f * dg + b.grad;
  out.grad(2) += c.d1 * dv;

  out.hess = c.f * dh + b.hess;
  for (int i = 0; i < 3; ++i) {
    out.hess(2, i) += c.d1 * dg(i);
    out.hess(i, 2) += c.d1 * dg(i);
  }
  out.hess(2, 2) += c.d2 * dv;

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double t = c.f * (a.third(i, j, k) - b.third(i, j, k)) + b.third(i, j, k);
        t += c.d1 * ((i == 2 ? dh(j, k) : 0.0) + (j == 2 ? dh(i, k) : 0.0) +
                     (k == 2 ? dh(i, j) : 0.0));
        t += c.d2 * ((i == 2 && j == 2 ? dg(k) : 0.0) +
                     (i == 2 && k == 2 ? dg(j) : 0.0) +
                     (j == 2 && k == 2 ? dg(i) : 0.0));
        if (i == 2 && j == 2 && k == 2) t += c.d3 * dv;
        out.third(i, j, k) = t;
      }
  return out;
}

PotentialPtr bridge_potentials(PotentialPtr f, PotentialPtr f_prime,
                               const SmoothStep& chi, double gamma_tol) {
  // both ends must carry vanishing value, gradient and Hessian on the axis
  auto check = [&](const PotentialPatch& pot, const char* which) {
    const Box3& d = pot.domain();
    for (int i = 0; i <= 16; ++i) {
      double x3 = d.lo(2) + (d.hi(2) - d.lo(2)) * i / 16.0;
      Eigen::Vector3d x(0, 0, x3);
      if (!pot.domain().contains(x, 1e-12)) continue;
      PotentialJet j = pot.eval(x);
      if (std::abs(j.value) > gamma_tol || j.grad.norm() > gamma_tol ||
          j.hess.cwiseAbs().maxCoeff() > gamma_tol)
        throw std::invalid_argument(std::string("bridge_potentials: ") + which +
                                    " violates the axis vanishing conditions");
    }
  };
  check(*f, "first potential");
  check(*f_prime, "second potential");
  return std::make_shared<BridgedPotential>(std::move(f), std::move(f_prime), chi);
}

ConeGraphResult cone_graph_potential(const Matrix6d& align, double ray_alpha,
                                     double ray_beta, const Box3& box,
                                     int ray_samples, int loop_checks) {
  ConeGraphResult out;
  out.potential =
      std::make_shared<ConeGraphPotential>(align, ray_alpha, ray_beta, box);

  for (int i = 0; i <= ray_samples; ++i) {
    double x3 = box.lo(2) + (box.hi(2) - box.lo(2)) * i / ray_samples;
    PotentialJet j = out.potential->eval(Eigen::Vector3d(0, 0, x3));
    out.max_on_ray_value = std::max(out.max_on_ray_value, std::abs(j.value));
    out.max_on_ray_grad = std::max(out.max_on_ray_grad, j.grad.norm());
    out.max_on_ray_hess =
        std::max(out.max_on_ray_hess, j.hess.cwiseAbs().maxCoeff());
  }

  // closedness of y . dx certified by loop integrals around random loops
  std::mt19937 rng(20240301);
  std::uniform_real_distribution<double> u01(0.15, 0.85);
  const int loop_pts = 256;
  double rx = 0.5 * (box.hi(0) - box.lo(0));
  double ry = 0.5 * (box.hi(1) - box.lo(1));
  for (int l = 0; l < loop_checks; ++l) {
    double cx = box.lo(0) + (box.hi(0) - box.lo(0)) * u01(rng);
    double cy = box.lo(1) + (box.hi(1) - box.lo(1)) * u01(rng);
    double cz = box.lo(2) + (box.hi(2) - box.lo(2)) * u01(rng);
    double ax = rx * 0.3 * u01(rng), by = ry * 0.3 * u01(rng);
    double integral = 0;
    Eigen::Vector3d y, prev_pt, dum_y;
    Eigen::Matrix3d dum;
    Sym3Tensor dumt;
    for (int s = 0; s < loop_pts; ++s) {
      double t0 = 2 * M_PI * s / loop_pts, t1 = 2 * M_PI * (s + 1) / loop_pts;
      Eigen::Vector3d p0(cx + ax * std::cos(t0), cy + by * std::sin(t0), cz);
      Eigen::Vector3d p1(cx + ax * std::cos(t1), cy + by * std::sin(t1), cz);
      Eigen::Vector3d ymid;
      out.potential->graph_jet(0.5 * (p0 + p1), ymid, dum, dumt);
      integral += ymid.head<2>().dot((p1 - p0).head<2>());
    }
    out.max_loop_integral = std::max(out.max_loop_integral, std::abs(integral));
  }
  return out;
}

Vector6d mean_curvature(const Eigen::Matrix<double, 6, 3>& first,
                        const std::array<Eigen::Matrix3d, 6>& second) {
  Eigen::Matrix3d g = first.transpose() * first;
  double det = g.determinant();
  if (std::abs(det) < 1e-14)
    throw std::runtime_error("mean_curvature: singular induced metric");
  Eigen::Matrix3d gi = g.inverse();
  Vector6d w = Vector6d::Zero();
  for (int beta = 0; beta < 6; ++beta) {
    double acc = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) acc += gi(i, j) * second[beta](i, j);
    w(beta) = acc;
  }
  // remove the tangential part
  Eigen::Vector3d coeff = gi * (first.transpose() * w);
  return w - first * coeff;
}

void gradient_graph_immersion(const PotentialJet& jet,
                              Eigen::Matrix<double, 6, 3>& first,
                              std::array<Eigen::Matrix3d, 6>& second) {
  first.setZero();
  first.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();
  first.block<3, 3>(3, 0) = jet.hess;
  for (int beta = 0; beta < 3; ++beta) second[beta].setZero();
  for (int beta = 0; beta < 3; ++beta) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = jet.third(i, j, beta);
    second[3 + beta] = m;
  }
}

Vector6d mean_curvature_of_potential(const PotentialPatch& f,
                                     const Eigen::Vector3d& x) {
  PotentialJet jet = f.eval(x);
  Eigen::Matrix<double, 6, 3> first;
  std::array<Eigen::Matrix3d, 6> second;
  gradient_graph_immersion(jet, first, second);
  return mean_curvature(first, second);
}

}  // namespace calib6
