#pragma once

#include <functional>
#include <string>

#include "calib6/gluing.hpp"
#include "calib6/hl_cone.hpp"

namespace calib6 {

// Combinatorial graph: vertex ids plus an edge multiset; self-loops are
// rejected, parallel edges allowed.
struct GraphSpec {
  std::vector<int> vertices;
  std::vector<std::pair<int, int>> edges;

  void validate() const;
  int degree(int id) const;
  int vertex_index(int id) const;

  static GraphSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// principal logarithm on SU(3): anti-hermitian, traceless, exp(log) = target
Matrix3cd su3_log(const Matrix3cd& target);

// smooth vector field with declared zero set, integrable by the flow below
struct FlowField {
  std::function<Vector6d(const Vector6d&)> generator;
  // centers/radii of the two reference balls (rotation: support; push: holes)
  Vector6d center_a = Vector6d::Zero(), center_b = Vector6d::Zero();
  double ball_a = 0, ball_b = 0;
};

// generator b(|x-va|^2)[(x-va).g_a] + b(|x-vb|^2)[(x-vb).g_b]; the row action
// of the anti-hermitian generators keeps spheres around the centers invariant
FlowField rotation_flow(const Vector6d& va, const Vector6d& vb,
                        const Matrix3cd& gen_a, const Matrix3cd& gen_b,
                        double p3);

// generator (1 - b(|x-va|^2))(1 - b(|x-vb|^2)) nu with the widened bump shell
FlowField push_flow(const Vector6d& va, const Vector6d& vb, const Vector6d& nu,
                    double p3, double eps);

struct FlowOptions {
  double tol = 1e-10;  // per unit time
  double h_init = 0.02;
};

Vector6d integrate_flow(const FlowField& field, const Vector6d& x0, double t,
                        const FlowOptions& opts = {});

// book-page direction orthogonal to the x3-axis avoiding the occupancy cloud
struct PageChoice {
  Vector6d normal = Vector6d::Zero();  // unit, zero x3 component
  double angular_clearance = 0;        // to the projected occupancy
  double distance_clearance = 0;       // euclidean distance to the page plane
  int candidate_index = 0;
};

PageChoice select_page_normal(const std::vector<Vector6d>& occupied,
                              double delta_page = 1e-2, int candidates = 4096);

struct EdgePlan {
  int a = 0, b = 0;          // vertex ids, in input order
  int plane_a = 0, plane_b = 0;  // indices into the endpoint collections
  Matrix3cd align_a, align_b;    // SU(3) coordinate changes per endpoint
  Matrix3cd gen_a, gen_b;        // su(3) generators of the rotations
  double log_roundtrip = 0;      // exp(gen) against the target rotations
  PageChoice page;
  double push_time = 0;
  double push_displacement = 0;  // certified displacement of cleared points
  std::vector<Vector6d> polyline;
  double min_dist_other_vertices = 0;
  double min_dist_spine_outside_balls = 0;
};

struct EmbeddingPlan {
  GraphSpec graph;
  double p3 = 1;
  std::vector<Vector6d> positions;
  std::vector<RealizingCollection> collections;  // per vertex, at the origin
  std::vector<EdgePlan> edges;

  double min_vertex_separation = 0;
  double min_edge_pair_distance = 0;   // away from shared vertices
  double min_shared_vertex_angle = 0;  // radians between incoming tangents
  std::vector<CheckRow> checks;
  bool all_pass = false;
};

struct EmbedOptions {
  double p3 = 1.0;
  int polyline_samples = 1000;
  int ray_seeds = 20000;
  double page_delta = 1e-2;
  int page_candidates = 4096;
  double flow_tol = 1e-10;
  int occupancy_samples = 60;  // per plane / cone patch
  int threads = 2;
};

EmbeddingPlan plan_embedding(const GraphSpec& g, const EmbedOptions& opts = {});

}  // namespace calib6
