#pragma once

#include <functional>
#include <string>

#include "calib6/form_orbit.hpp"
#include "calib6/potentials.hpp"

namespace calib6 {

// Tensor grid over the chart box [-r,r]^2 x [x3lo, x3hi] together with the
// three constant chart normals: chart(X, Y) = (X, grad F(X)) + sum Y_k n_k.
// The axial direction is long (the whole segment) while the transverse box
// is a thin tube, so the node counts are independent per axis.
struct TubeGrid {
  double tube_radius = 0;
  double p3 = 1, r0 = 1.0 / 32;
  int n_perp = 33;
  int n_axial = 257;
  // Cone geometries are self-similar toward the two cone points at x3 = 0
  // and x3 = 2 p3, so the axial nodes can be placed uniformly in
  // log(x3 / (2 p3 - x3)); differences taken in that parameter stay
  // fourth-order with the chain factor below.
  bool log_axial = false;
  Eigen::Vector3d lo, hi;
  std::array<Vector6d, 3> normal;

  int n(int axis) const { return axis == 2 ? n_axial : n_perp; }
  double axial_param(double x3) const {
    return log_axial ? std::log(x3 / (2 * p3 - x3)) : x3;
  }
  double axial_coord(double s) const {
    return log_axial ? 2 * p3 / (1 + std::exp(-s)) : s;
  }
  double step(int axis) const {
    if (axis == 2)
      return (axial_param(hi(2)) - axial_param(lo(2))) / (n_axial - 1);
    return (hi(axis) - lo(axis)) / (n_perp - 1);
  }
  Eigen::Vector3d node(int i, int j, int k) const {
    return {lo(0) + i * step(0), lo(1) + j * step(1),
            axial_coord(axial_param(lo(2)) + k * step(2))};
  }
  // d(axial param)/d(x3) at a point, for chain-rule factors
  double axial_scale(double x3) const {
    return log_axial ? 1.0 / x3 + 1.0 / (2 * p3 - x3) : 1.0;
  }
  size_t total_nodes() const { return (size_t)n_perp * n_perp * n_axial; }
};

// degree-tagged form field over chart coordinates (X | Y)
struct FormField {
  int degree = 0;
  std::function<KFormD(const Vector6d&)> eval;
};

// finite-difference exterior derivative, fourth-order central stencils
KFormD fd_exterior_derivative(const FormField& f, const Vector6d& x,
                              const Vector6d& steps);

// pullback through the projection onto the base slice {Y = 0}
KFormD projection_pullback(const FormField& f, const Vector6d& x);

struct HomotopyOptions {
  int quad_nodes = 32;
};

// The integration operator along the normal scaling homotopy
// G(t, (X,Y)) = (X, tY): primitive values of a closed form field.
KFormD homotopy_primitive_at(const FormField& tau, const Vector6d& x,
                             const HomotopyOptions& opts = {});

struct HomotopyResult {
  FormField primitive;
  double max_input_closedness = 0;   // FD |d tau| over samples
  double max_defect = 0;             // FD |d Phi - tau| over samples
  double max_on_base = 0;            // |Phi| at Y = 0 samples
};

// primitive with certificates; throws if the closedness precondition fails
HomotopyResult homotopy_primitive(const FormField& tau, const TubeGrid& grid,
                                  double closedness_tol = 5e-6,
                                  const HomotopyOptions& opts = {});

// Cartan identity diagnostic d I(tau) + I(d tau) - tau + pi* tau at a point
KFormD cartan_defect(const FormField& tau, const Vector6d& x,
                     const Vector6d& steps, const HomotopyOptions& opts = {});

// Unitary tangent frames of the gradient graph of a potential, extended
// constantly along the chart normals.  theta is the argument of the
// determinant of the inverse frame.
class TangentFrameField {
 public:
  TangentFrameField(PotentialPtr surface, TubeGrid grid);

  // everything derived from one evaluation of the surface jet
  struct PointData {
    double theta = 0;
    Eigen::Vector3d dtheta = Eigen::Vector3d::Zero();
    Matrix6d dq = Matrix6d::Identity();
    PotentialJet jet;
  };
  PointData point_data(const Eigen::Vector3d& X) const;

  // complex operator sending the coordinate frame to the tangent frame
  Matrix3cd frame_op(const Eigen::Vector3d& X) const;
  double theta(const Eigen::Vector3d& X) const;
  Eigen::Vector3d dtheta(const Eigen::Vector3d& X) const;

  Matrix6d chart_jacobian(const Eigen::Vector3d& X) const;  // dQ, Y-free
  const TubeGrid& grid() const { return grid_; }
  const PotentialPatch& surface() const { return *surface_; }
  PotentialPtr surface_ptr() const { return surface_; }

  // certificates collected over the grid at construction
  double max_unitary_defect = 0;
  double max_span_defect = 0;  // frame rows against the actual tangent
  double min_chart_det = 0;

 private:
  PotentialPtr surface_;
  TubeGrid grid_;
};

TangentFrameField tangent_frame_field(PotentialPtr surface, const TubeGrid& grid);

// phi-bar in chart coordinates, two routes compared on demand
struct ModifiedForm {
  FormField chart;                  // (dQ)* phi-bar, X-dependent only
  FormField chart_derivative;      // exact d of the chart form (degree 4)
  double route_disagreement = 0;   // pullback route vs cos/sin route
};

ModifiedForm modified_form(const TangentFrameField& frames);

enum class GlueMode { reflected, slopes, tangent };

struct GlueConfig {
  GlueMode mode = GlueMode::reflected;
  double p3 = 1.0;
  double r0 = 1.0 / 32.0;
  double tube_radius = -1;  // <= 0 requests auto-shrink
  int grid_n = 33;          // transverse nodes per axis
  int grid_axial = 257;     // axial nodes (the box is ~60x longer there)
  double rho1 = 0.3, rho2 = 0.9;  // slopes mode
  int gamma_samples = 65;
  int comass_points = 20;
  int comass_starts = 2000;
  int comass_sweep = 100000;
  int quad_nodes = 32;
  int factor_samples = 160;  // where h' is certified
  int threads = 2;
};

struct CheckRow {
  std::string name;
  double value = 0;
  double tol = 0;
  bool pass = false;
  std::string ref;
};

struct RotatingBridge {
  PotentialPtr potential;
  double tsp_defect = 0;       // on-axis tangent vs the prescribed slope graph
  double mc_on_axis = 0;       // on-axis mean curvature
  double axis_only_margin = 0; // distance of off-axis samples from the partner plane
  double fitted_constant = 0;  // off-axis tangent drift / (r|rho|C1 + r^2|rho|C2)
};

RotatingBridge rotating_tangent_bridge(double rho1, double rho2,
                                       const MonotoneProfile& profile,
                                       const TubeGrid& grid);

struct AssembleOptions {
  int quad_nodes = 32;
  int comass_points = 20;
  int comass_starts = 2000;
  int comass_sweep = 100000;
  int factor_samples = 160;
  int threads = 2;
};

// Closed calibration form psi = phi_bar - primitive(d phi_bar) in chart
// coordinates, with the twisted-metric fields certified at samples:
// closedness, calibration values on the surface and partner, locality on
// the end zones, factorization basin and comass.
struct CalibrationPackage {
  TubeGrid grid;
  Eigen::Matrix<double, 3, 6> p_frame;
  FormField psi_chart;
  std::function<Matrix6d(const Eigen::Vector3d&)> chart_jacobian;
  std::vector<CheckRow> checks;
  double fd_closedness = 0, fd_closedness_coarse = 0;
  double basin_radius = 0;
  double max_comass = 0;
  double min_metric_eigenvalue = 0;
  bool all_pass = false;
};

CalibrationPackage assemble_calibration(const ModifiedForm& phi_bar,
                                        const TangentFrameField& frames,
                                        const Eigen::Matrix<double, 3, 6>& p_frame,
                                        const AssembleOptions& opts = {});

// Full pipeline output: certificates plus the data needed for export.
struct GlueRun {
  GlueConfig config;
  double tube_radius_used = 0;
  double rho_star = 0;
  std::vector<CheckRow> checks;
  bool all_pass = false;

  PotentialPtr surface;
  TubeGrid grid;
  Eigen::Matrix<double, 3, 6> p_frame;  // oriented partner-plane frame
  double fd_closedness = 0, fd_closedness_coarse = 0;
  double basin_radius = 0;  // max sup-distance of psi from phi over samples
  double max_comass = 0;

  // chart-space calibration form, for export and downstream sampling
  FormField psi_chart;
  std::function<Matrix6d(const Eigen::Vector3d&)> chart_jacobian;
};

GlueRun run_glue_pipeline(const GlueConfig& config);

struct ComassOptions {
  int starts = 2000;
  int sweep = 100000;
  int max_iters = 200;
};

struct ComassResult {
  double value = 0;
  Eigen::Matrix<double, 6, 3> frame;  // maximizing g-orthonormal frame
  double sweep_best = 0;
};

// maximum of a 3-form over metric-orthonormal oriented simple 3-vectors
ComassResult comass(const KFormD& form, const Matrix6d& metric_gram,
                    const ComassOptions& opts = {});

}  // namespace calib6
