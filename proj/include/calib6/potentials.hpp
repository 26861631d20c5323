#pragma once

#include <functional>
#include <memory>

#include "calib6/jets.hpp"
#include "calib6/linalg.hpp"
#include "calib6/planes.hpp"

namespace calib6 {

// fully symmetric 3x3x3 tensor of third derivatives
struct Sym3Tensor {
  double t[3][3][3] = {};
  double& operator()(int i, int j, int k) { return t[i][j][k]; }
  double operator()(int i, int j, int k) const { return t[i][j][k]; }
  double max_abs() const {
    double m = 0;
    for (auto& a : t)
      for (auto& b : a)
        for (double c : b) m = std::max(m, std::abs(c));
    return m;
  }
};

struct PotentialJet {
  double value = 0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
  Sym3Tensor third;
};

struct Box3 {
  Eigen::Vector3d lo, hi;
  bool contains(const Eigen::Vector3d& x, double slack = 0) const {
    for (int i = 0; i < 3; ++i)
      if (x(i) < lo(i) - slack || x(i) > hi(i) + slack) return false;
    return true;
  }
};

// Scalar potential on a box with derivatives through order three; the graph
// of the gradient is the Lagrangian surface the potential encodes.
class PotentialPatch {
 public:
  enum class Kind { zero, cone_graph, quadratic_model, reflected, bridged };

  PotentialPatch(Kind kind, Box3 domain) : kind_(kind), domain_(domain) {}
  virtual ~PotentialPatch() = default;
  virtual PotentialJet eval(const Eigen::Vector3d& x) const = 0;

  Kind kind() const { return kind_; }
  const Box3& domain() const { return domain_; }

 private:
  Kind kind_;
  Box3 domain_;
};

using PotentialPtr = std::shared_ptr<const PotentialPatch>;

class ZeroPotential final : public PotentialPatch {
 public:
  explicit ZeroPotential(Box3 domain)
      : PotentialPatch(Kind::zero, domain) {}
  PotentialJet eval(const Eigen::Vector3d&) const override { return {}; }
};

// rho(x3) (x1^2 - x2^2)/2 with a jet-valued profile
class QuadraticModelPotential final : public PotentialPatch {
 public:
  QuadraticModelPotential(std::function<Jet3(double)> profile, Box3 domain)
      : PotentialPatch(Kind::quadratic_model, domain), profile_(std::move(profile)) {}
  PotentialJet eval(const Eigen::Vector3d& x) const override;

 private:
  std::function<Jet3(double)> profile_;
};

// The Harvey-Lawson cone written as a gradient graph over its aligned
// tangent plane: aligned cone point = align * (s * link(alpha, beta)),
// Newton-inverted in (s, alpha, beta).  The potential value comes from the
// line integral of the graph 1-form off the central ray, where it vanishes.
class ConeGraphPotential final : public PotentialPatch {
 public:
  ConeGraphPotential(const Matrix6d& align, double ray_alpha, double ray_beta,
                     Box3 domain);
  PotentialJet eval(const Eigen::Vector3d& x) const override;

  // graph value and derivatives of y(x) without the line integral
  void graph_jet(const Eigen::Vector3d& x, Eigen::Vector3d& y,
                 Eigen::Matrix3d& dy, Sym3Tensor& ddy) const;

 private:
  Eigen::Vector3d solve_params(const Eigen::Vector3d& x) const;

  Matrix6d align_;
  double a0_, b0_;
};

// base potential reflected through diag(-1,1,-1) at height p3:
// F'(x) = F(-x1, x2, 2 p3 - x3)
class ReflectedPotential final : public PotentialPatch {
 public:
  ReflectedPotential(PotentialPtr base, double p3);
  PotentialJet eval(const Eigen::Vector3d& x) const override;

 private:
  PotentialPtr base_;
  double p3_;
};

// chi F + (1 - chi) F' with chi a function of x3 only
class BridgedPotential final : public PotentialPatch {
 public:
  BridgedPotential(PotentialPtr f, PotentialPtr f_prime, SmoothStep chi);
  PotentialJet eval(const Eigen::Vector3d& x) const override;
  const SmoothStep& cutoff() const { return chi_; }

 private:
  PotentialPtr f_, fp_;
  SmoothStep chi_;
};

// factory matching the vanishing-precondition contract
PotentialPtr bridge_potentials(PotentialPtr f, PotentialPtr f_prime,
                               const SmoothStep& chi,
                               double gamma_tol = 1e-8);

// cone-as-graph construction with on-ray certificates
struct ConeGraphResult {
  std::shared_ptr<const ConeGraphPotential> potential;
  double max_on_ray_value = 0;
  double max_on_ray_grad = 0;
  double max_on_ray_hess = 0;
  double max_loop_integral = 0;  // closedness of the graph 1-form
};

ConeGraphResult cone_graph_potential(const Matrix6d& align, double ray_alpha,
                                     double ray_beta, const Box3& box,
                                     int ray_samples = 64, int loop_checks = 100);

// mean curvature of a graph immersion x -> (x, u(x)) in the ambient basis
Vector6d mean_curvature(const Eigen::Matrix<double, 6, 3>& first,
                        const std::array<Eigen::Matrix3d, 6>& second);

// convenience: mean curvature of the gradient graph of a potential
Vector6d mean_curvature_of_potential(const PotentialPatch& f,
                                     const Eigen::Vector3d& x);

// immersion jets of the gradient graph
void gradient_graph_immersion(const PotentialJet& jet,
                              Eigen::Matrix<double, 6, 3>& first,
                              std::array<Eigen::Matrix3d, 6>& second);

}  // namespace calib6
