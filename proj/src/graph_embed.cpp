#include "calib6/graph_embed.hpp"

#include <json.hpp>

#include <map>
#include <set>

namespace calib6 {

void GraphSpec::validate() const {
  std::set<int> seen;
  for (int v : vertices)
    if (!seen.insert(v).second)
      throw std::invalid_argument("graph: duplicate vertex id " + std::to_string(v));
  for (auto& [a, b] : edges) {
    if (a == b)
      throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(a));
    if (!seen.count(a) || !seen.count(b))
      throw std::invalid_argument("graph: edge references unknown vertex");
  }
}

int GraphSpec::degree(int id) const {
  int d = 0;
  for (auto& [a, b] : edges) d += (a == id) + (b == id);
  return d;
}

int GraphSpec::vertex_index(int id) const {
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == id) return (int)i;
  throw std::invalid_argument("graph: unknown vertex id");
}

GraphSpec GraphSpec::from_json_text(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  GraphSpec g;
  for (auto& v : j.at("vertices")) g.vertices.push_back(v.get<int>());
  for (auto& e : j.at("edges"))
    g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  g.validate();
  return g;
}

std::string GraphSpec::to_json_text() const {
  nlohmann::json j;
  j["vertices"] = vertices;
  j["edges"] = nlohmann::json::array();
  for (auto& [a, b] : edges) j["edges"].push_back({a, b});
  return j.dump();
}

Matrix3cd su3_log(const Matrix3cd& target) {
  if (su3_defect(target) > 1e-10)
    throw std::invalid_argument("su3_log: input is not special unitary");
  Eigen::ComplexSchur<Matrix3cd> schur(target);
  Matrix3cd q = schur.matrixU();
  Eigen::Vector3d angles;
  for (int i = 0; i < 3; ++i) angles(i) = std::arg(schur.matrixT()(i, i));
  // rebalance the branch so the angles sum to zero exactly
  double total = angles.sum();
  int wind = (int)std::lround(total / (2 * M_PI));
  for (int fix = 0; fix < std::abs(wind); ++fix) {
    int idx;
    if (wind > 0)
      angles.maxCoeff(&idx), angles(idx) -= 2 * M_PI;
    else
      angles.minCoeff(&idx), angles(idx) += 2 * M_PI;
  }
  Matrix3cd d = Matrix3cd::Zero();
  for (int i = 0; i < 3; ++i) d(i, i) = complexd(0, angles(i));
  Matrix3cd log = q * d * q.adjoint();
  // enforce anti-hermitian symmetry against Schur roundoff
  log = 0.5 * (log - log.adjoint());
  complexd tr = log.trace() / 3.0;
  for (int i = 0; i < 3; ++i) log(i, i) -= tr;

  Matrix3cd back = expm_antihermitian(log);
  if ((back - target).cwiseAbs().maxCoeff() > 1e-9) {
    // branch ambiguity near an eigenvalue at -1: retry on a perturbed
    // target and polish with one Newton-style correction
    Matrix3cd probe = diag_unitary(3e-7, -2e-7, -1e-7);
    Matrix3cd log2 = su3_log(probe * target);
    Matrix3cd corr = su3_log(target * expm_antihermitian(log2).adjoint());
    log = log2 + corr;
    log = 0.5 * (log - log.adjoint());
    tr = log.trace() / 3.0;
    for (int i = 0; i < 3; ++i) log(i, i) -= tr;
    back = expm_antihermitian(log);
    if ((back - target).cwiseAbs().maxCoeff() > 1e-9)
      throw std::runtime_error("su3_log: branch resolution failed");
  }
  return log;
}

namespace {

// row action (x - v).g realified: spheres around v stay invariant
Vector6d row_action(const Matrix6d& gt, const Vector6d& x, const Vector6d& v) {
  return gt * (x - v);
}

Bump standard_bump(double p3) {
  return Bump(p3 * p3 / 4.0, 9.0 * p3 * p3 / 16.0);
}

}  // namespace

FlowField rotation_flow(const Vector6d& va, const Vector6d& vb,
                        const Matrix3cd& gen_a, const Matrix3cd& gen_b,
                        double p3) {
  FlowField f;
  f.center_a = va;
  f.center_b = vb;
  f.ball_a = 0.75 * p3;
  f.ball_b = 0.75 * p3;
  // row-vector convention: the realified generator acts transposed
  Matrix6d ga = realify6(gen_a).transpose();
  Matrix6d gb = realify6(gen_b).transpose();
  Bump bump = standard_bump(p3);
  f.generator = [va, vb, ga, gb, bump](const Vector6d& x) {
    Vector6d out = Vector6d::Zero();
    double da = (x - va).squaredNorm(), db = (x - vb).squaredNorm();
    double wa = bump(da), wb = bump(db);
    if (wa != 0) out += wa * row_action(ga, x, va);
    if (wb != 0) out += wb * row_action(gb, x, vb);
    return out;
  };
  return f;
}

FlowField push_flow(const Vector6d& va, const Vector6d& vb, const Vector6d& nu,
                    double p3, double eps) {
  FlowField f;
  f.center_a = va;
  f.center_b = vb;
  f.ball_a = 0.5 * p3;
  f.ball_b = 0.5 * p3;
  Bump bump(p3 * p3 / 4.0, (p3 + eps) * (p3 + eps) / 4.0);
  f.generator = [va, vb, nu, bump](const Vector6d& x) {
    double wa = 1.0 - bump((x - va).squaredNorm());
    double wb = 1.0 - bump((x - vb).squaredNorm());
    return Vector6d(wa * wb * nu);
  };
  return f;
}

Vector6d integrate_flow(const FlowField& field, const Vector6d& x0, double t,
                        const FlowOptions& opts) {
  if (!std::isfinite(t) || !x0.allFinite())
    throw std::invalid_argument("integrate_flow: non-finite input");
  double dir = t >= 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  Vector6d x = x0;
  double h = std::min(opts.h_init, remaining);
  auto rk4 = [&](const Vector6d& y, double step) {
    Vector6d k1 = dir * field.generator(y);
    Vector6d k2 = dir * field.generator(y + 0.5 * step * k1);
    Vector6d k3 = dir * field.generator(y + 0.5 * step * k2);
    Vector6d k4 = dir * field.generator(y + step * k3);
    return Vector6d(y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4));
  };
  while (remaining > 1e-14) {
    h = std::min(h, remaining);
    // step doubling error control
    Vector6d full = rk4(x, h);
    Vector6d half = rk4(rk4(x, h / 2), h / 2);
    double err = (full - half).cwiseAbs().maxCoeff();
    double tol = opts.tol * h;
    if (err > tol && h > 1e-12) {
      h *= 0.5;
      if (h < 1e-12)
        throw std::runtime_error("integrate_flow: step underflow");
      continue;
    }
    x = half;
    remaining -= h;
    if (err < 0.1 * tol) h *= 1.8;
  }
  return x;
}

PageChoice select_page_normal(const std::vector<Vector6d>& occupied,
                              double delta_page, int candidates) {
  // deterministic low-discrepancy directions in the 4-sphere of normals
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  // projected occupancy in the projective space of directions
  std::vector<Eigen::Matrix<double, 5, 1>> cloud;
  for (const auto& p : occupied) {
    Eigen::Matrix<double, 5, 1> q;
    q << p(0), p(1), p(3), p(4), p(5);
    double n = q.norm();
    if (n < 1e-9) continue;  // points on the axis span no direction
    cloud.push_back(q / n);
  }

  for (int c = 0; c < candidates; ++c) {
    Eigen::Matrix<double, 5, 1> dir;
    static const int primes[5] = {2, 3, 5, 7, 11};
    for (int i = 0; i < 5; ++i) {
      // inverse normal through a rational approximation is overkill here;
      // a symmetric triangular profile keeps directions well spread
      double u = halton(c + 1, primes[i]);
      dir(i) = 2.0 * u - 1.0;
    }
    double n = dir.norm();
    if (n < 1e-6) continue;
    dir /= n;
    double worst = M_PI / 2;
    for (const auto& q : cloud)
      worst = std::min(worst, std::acos(std::min(1.0, std::abs(dir.dot(q)))));
    if (worst >= delta_page) {
      PageChoice out;
      out.normal << dir(0), dir(1), 0.0, dir(2), dir(3), dir(4);
      out.angular_clearance = worst;
      out.candidate_index = c;
      // euclidean distance from the occupancy to the page plane
      double dist = std::numeric_limits<double>::infinity();
      for (const auto& p : occupied) {
        Eigen::Matrix<double, 5, 1> q;
        q << p(0), p(1), p(3), p(4), p(5);
        if (q.norm() < 1e-9) continue;
        dist = std::min(dist, (q - q.dot(dir) * dir).norm());
      }
      out.distance_clearance = std::isfinite(dist) ? dist : 0.0;
      return out;
    }
  }
  throw std::runtime_error(
      "select_page_normal: no direction found at the requested clearance; "
      "refine the candidate sampling");
}

namespace {

// occupancy point cloud of a realizing collection placed at a vertex
void collection_cloud(const RealizingCollection& col, const Vector6d& center,
                      double p3, int samples, std::vector<Vector6d>& out) {
  // plane patches within the half-ball
  for (const auto& plane : col.planes) {
    auto rows = plane.orthonormal_rows();
    for (int s = 0; s < samples; ++s) {
      double u = (s % 8 + 0.5) / 8.0 * 2 - 1;
      double v = ((s / 8) % 8 + 0.5) / 8.0 * 2 - 1;
      double w = std::sin(0.7 * s + 0.3);
      Vector6d dir = u * rows.row(0).transpose() + v * rows.row(1).transpose() +
                     w * rows.row(2).transpose();
      if (dir.norm() < 1e-9) continue;
      out.push_back(center + (0.5 * p3) * dir.normalized());
    }
  }
  // cone patch: ray lattice over the link torus
  int g = std::max(2, (int)std::sqrt((double)samples / 2));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      double al = 2 * M_PI * i / g, be = 2 * M_PI * j / g;
      Vector6d ray = realify_row(hl::link_point(al, be).transpose());
      out.push_back(center + (0.5 * p3) * ray);
      out.push_back(center + (0.25 * p3) * ray);
    }
}

}  // namespace

EmbeddingPlan plan_embedding(const GraphSpec& g, const EmbedOptions& opts) {
  g.validate();
  EmbeddingPlan plan;
  plan.graph = g;
  plan.p3 = opts.p3;
  const double p3 = opts.p3;
  const int nv = (int)g.vertices.size();

  auto add_check = [&](const std::string& name, double value, double tol,
                       bool le, const std::string& ref) {
    bool pass = le ? value <= tol : value >= tol;
    plan.checks.push_back({name, value, tol, pass, ref});
  };

  // vertex placement along the spine
  for (int k = 0; k < nv; ++k) {
    Vector6d pos = Vector6d::Zero();
    pos(2) = 2.0 * k * p3;
    plan.positions.push_back(pos);
  }
  plan.min_vertex_separation =
      nv > 1 ? 2.0 * p3 : std::numeric_limits<double>::infinity();

  // realizing collections sized by degree
  RayCountOptions rc;
  rc.seeds = opts.ray_seeds;
  rc.threads = opts.threads;
  for (int k = 0; k < nv; ++k) {
    int deg = g.degree(g.vertices[k]);
    if (deg == 0) {
      plan.collections.push_back({});
      continue;
    }
    plan.collections.push_back(realizing_collection(deg, rc));
  }

  // degree realization certificate
  double degree_defect = 0;
  for (int k = 0; k < nv; ++k) {
    int deg = g.degree(g.vertices[k]);
    if (deg == 0) continue;
    const auto& col = plan.collections[k];
    degree_defect = std::max(
        degree_defect, std::abs((double)((int)col.planes.size() - deg)));
    for (int c : col.ray_counts)
      degree_defect = std::max(degree_defect, std::abs((double)(c - 1)));
  }
  add_check("degree.realization_defect", degree_defect, 0.0, true,
            "one certified ray per incident edge");

  // static occupancy cloud of every collection
  std::vector<Vector6d> occupancy;
  for (int k = 0; k < nv; ++k) {
    if (plan.collections[k].planes.empty()) continue;
    collection_cloud(plan.collections[k], plan.positions[k], p3,
                     opts.occupancy_samples, occupancy);
  }

  const Matrix3cd flip = Eigen::Vector3cd(-1, 1, -1).asDiagonal();
  std::vector<int> used_planes(nv, 0);
  double worst_roundtrip = 0, worst_flow_identity = 0, worst_exact_rotation = 0;
  double worst_sphere_preservation = 0;

  for (const auto& [ia, ib] : g.edges) {
    EdgePlan edge;
    int ka = g.vertex_index(ia), kb = g.vertex_index(ib);
    // orient so the edge runs toward increasing spine coordinate
    bool swap = plan.positions[kb](2) < plan.positions[ka](2);
    int lo = swap ? kb : ka, hi_v = swap ? ka : kb;
    edge.a = g.vertices[lo];
    edge.b = g.vertices[hi_v];
    edge.plane_a = used_planes[lo]++;
    edge.plane_b = used_planes[hi_v]++;

    const auto& col_a = plan.collections[lo];
    const auto& col_b = plan.collections[hi_v];
    const OrientedPlane3& pa = col_a.planes.at(edge.plane_a);
    const OrientedPlane3& pb = col_b.planes.at(edge.plane_b);

    // rays of the chosen planes and the per-endpoint standardizing rotation
    RayCountOptions rc_edge = rc;
    rc_edge.seeds = std::max(4000, opts.ray_seeds / 4);
    auto ray_a = count_rays(pa, rc_edge);
    auto ray_b = count_rays(pb, rc_edge);
    if (ray_a.count != 1 || ray_b.count != 1)
      throw std::runtime_error("plan_embedding: edge plane has unexpected rays");
    auto angles_a = hl::link_angles(complexify_row(ray_a.rays[0]).transpose());
    auto angles_b = hl::link_angles(complexify_row(ray_b.rays[0]).transpose());
    auto align_res_a = align_pair(
        hl::cone_tangent_plane(angles_a.first, angles_a.second), pa, ray_a.rays[0]);
    auto align_res_b = align_pair(
        hl::cone_tangent_plane(angles_b.first, angles_b.second), pb, ray_b.rays[0]);
    edge.align_a = align_res_a.s;
    edge.align_b = flip * align_res_b.s;

    edge.gen_a = su3_log(edge.align_a);
    edge.gen_b = su3_log(edge.align_b);
    edge.log_roundtrip = std::max(
        (expm_antihermitian(edge.gen_a) - edge.align_a).cwiseAbs().maxCoeff(),
        (expm_antihermitian(edge.gen_b) - edge.align_b).cwiseAbs().maxCoeff());
    worst_roundtrip = std::max(worst_roundtrip, edge.log_roundtrip);

    const Vector6d va = plan.positions[lo], vb = plan.positions[hi_v];

    // occupancy for the page: everything except points of the two endpoint
    // collections (their content stays inside the protected balls)
    std::vector<Vector6d> page_cloud;
    for (const auto& p : occupancy) {
      if ((p - va).norm() < 0.55 * p3 || (p - vb).norm() < 0.55 * p3) continue;
      Vector6d rel = p;
      rel(2) = 0;  // the page test projects out the spine anyway
      page_cloud.push_back(p - Vector6d::Unit(2) * p(2));
    }
    for (const auto& prev : plan.edges)
      for (const auto& q : prev.polyline)
        page_cloud.push_back(q - Vector6d::Unit(2) * q(2));
    edge.page = select_page_normal(page_cloud, opts.page_delta,
                                   opts.page_candidates);

    // flows
    FlowField rot = rotation_flow(va, vb, edge.gen_a, edge.gen_b, p3);
    double eps_bump = std::clamp(edge.page.distance_clearance, p3 / 16, p3 / 2);
    FlowField push = push_flow(va, vb, edge.page.normal, p3, eps_bump);
    edge.push_time = 2.0 * p3;

    FlowOptions fo;
    fo.tol = opts.flow_tol;

    // flow certificates on deterministic samples
    std::mt19937 rng(1234 + 17 * (int)plan.edges.size());
    std::uniform_real_distribution<double> u(-1, 1);
    for (int s = 0; s < 12; ++s) {
      Vector6d probe;
      for (int q = 0; q < 6; ++q) probe(q) = u(rng);
      // identity outside the rotation support
      Vector6d far = va + probe.normalized() * (0.80 * p3 + 0.5 * p3 * (s % 3));
      if ((far - vb).norm() > 0.76 * p3 && (far - va).norm() > 0.76 * p3) {
        Vector6d moved = integrate_flow(rot, far, 1.0, fo);
        worst_flow_identity =
            std::max(worst_flow_identity, (moved - far).norm());
      }
      // exact rotation inside the inner ball
      Vector6d nearby = va + probe.normalized() * (0.4 * p3);
      Vector6d moved = integrate_flow(rot, nearby, 1.0, fo);
      Matrix6d rot_exact = realify6(expm_antihermitian(edge.gen_a)).transpose();
      Vector6d expect = va + rot_exact * (nearby - va);
      worst_exact_rotation =
          std::max(worst_exact_rotation, (moved - expect).norm());
      worst_sphere_preservation = std::max(
          worst_sphere_preservation,
          std::abs((moved - va).norm() - (nearby - va).norm()));
      // push displacement of cleared points
      Vector6d cleared = va + probe.normalized() * (0.5 * p3 + eps_bump + 0.05 * p3);
      if ((cleared - vb).norm() > 0.5 * p3 + eps_bump + 0.04 * p3) {
        Vector6d pushed = integrate_flow(push, cleared, edge.push_time, fo);
        edge.push_displacement =
            std::max(edge.push_displacement,
                     std::abs((pushed - cleared).dot(edge.page.normal)));
      }
    }

    // the physical edge curve: pull the straight segment back through the
    // inverse push and inverse rotation
    edge.polyline.reserve(opts.polyline_samples + 1);
    for (int s = 0; s <= opts.polyline_samples; ++s) {
      double f = (double)s / opts.polyline_samples;
      Vector6d seg = va + f * (vb - va);
      Vector6d back = integrate_flow(push, seg, -edge.push_time, fo);
      back = integrate_flow(rot, back, -1.0, fo);
      edge.polyline.push_back(back);
    }

    // clearance certificates on the polyline; the spine-distance hypothesis
    // concerns the bridging part, i.e. samples whose straight-segment
    // parameter sits outside the endpoint balls
    edge.min_dist_other_vertices = std::numeric_limits<double>::infinity();
    edge.min_dist_spine_outside_balls = std::numeric_limits<double>::infinity();
    for (size_t si = 0; si < edge.polyline.size(); ++si) {
      const Vector6d& q = edge.polyline[si];
      double f = (double)si / opts.polyline_samples;
      Vector6d seg = va + f * (vb - va);
      for (int k = 0; k < nv; ++k) {
        if (k == lo || k == hi_v) continue;
        edge.min_dist_other_vertices = std::min(
            edge.min_dist_other_vertices, (q - plan.positions[k]).norm());
      }
      if ((seg - va).norm() > 0.75 * p3 && (seg - vb).norm() > 0.75 * p3) {
        double spine = std::sqrt(q(0) * q(0) + q(1) * q(1) + q(3) * q(3) +
                                 q(4) * q(4) + q(5) * q(5));
        edge.min_dist_spine_outside_balls =
            std::min(edge.min_dist_spine_outside_balls, spine);
      }
    }
    plan.edges.push_back(std::move(edge));
  }

  add_check("flows.log_roundtrip", worst_roundtrip, 1e-10, true,
            "generators exponentiate to the target rotations");
  add_check("flows.identity_outside_support", worst_flow_identity, 1e-10, true,
            "rotation flow is trivial outside its support");
  add_check("flows.exact_rotation_inner_ball", worst_exact_rotation, 1e-8, true,
            "time-one map matches the exact rotation");
  add_check("flows.sphere_preservation", worst_sphere_preservation, 1e-8, true,
            "rotation flow preserves spheres around the centers");

  double worst_push = std::numeric_limits<double>::infinity();
  double worst_vertex_clear = std::numeric_limits<double>::infinity();
  double worst_spine_clear = std::numeric_limits<double>::infinity();
  for (const auto& e : plan.edges) {
    if (!plan.edges.empty()) worst_push = std::min(worst_push, e.push_displacement);
    worst_vertex_clear = std::min(worst_vertex_clear, e.min_dist_other_vertices);
    worst_spine_clear = std::min(worst_spine_clear, e.min_dist_spine_outside_balls);
  }
  if (!plan.edges.empty()) {
    add_check("push.displacement", worst_push, 2.0 * p3 - 1e-6, false,
              "cleared points move the full push distance");
    add_check("clearance.other_vertices", worst_vertex_clear, p3, false,
              "edge curves keep a vertex-scale margin");
    add_check("clearance.spine_outside_balls", worst_spine_clear, p3, false,
              "bridging parts stay off the spine away from their endpoints");
  }

  // pairwise edge separation and shared-vertex angles
  plan.min_edge_pair_distance = std::numeric_limits<double>::infinity();
  plan.min_shared_vertex_angle = std::numeric_limits<double>::infinity();
  for (size_t e1 = 0; e1 < plan.edges.size(); ++e1)
    for (size_t e2 = e1 + 1; e2 < plan.edges.size(); ++e2) {
      const auto& ea = plan.edges[e1];
      const auto& eb = plan.edges[e2];
      std::vector<Vector6d> shared;
      for (int id : {ea.a, ea.b})
        if (id == eb.a || id == eb.b)
          shared.push_back(plan.positions[g.vertex_index(id)]);
      double min_d = std::numeric_limits<double>::infinity();
      for (const auto& qa : ea.polyline) {
        bool near_shared = false;
        for (const auto& sv : shared)
          if ((qa - sv).norm() < 0.35 * p3) near_shared = true;
        if (near_shared) continue;
        for (const auto& qb : eb.polyline) {
          bool nb = false;
          for (const auto& sv : shared)
            if ((qb - sv).norm() < 0.35 * p3) nb = true;
          if (nb) continue;
          min_d = std::min(min_d, (qa - qb).norm());
        }
      }
      plan.min_edge_pair_distance = std::min(plan.min_edge_pair_distance, min_d);

      // tangent angle at shared vertices
      for (const auto& sv : shared) {
        auto tangent_at = [&](const EdgePlan& e) {
          // direction of the first polyline step leaving the vertex
          const auto& poly = e.polyline;
          bool from_start = (poly.front() - sv).norm() < (poly.back() - sv).norm();
          Vector6d p0 = from_start ? poly[0] : poly[poly.size() - 1];
          Vector6d p1 = from_start ? poly[8] : poly[poly.size() - 9];
          return Vector6d((p1 - p0).normalized());
        };
        double c = std::clamp(tangent_at(ea).dot(tangent_at(eb)), -1.0, 1.0);
        plan.min_shared_vertex_angle =
            std::min(plan.min_shared_vertex_angle, std::acos(c));
      }
    }

  if (plan.edges.size() > 1) {
    if (std::isfinite(plan.min_edge_pair_distance))
      add_check("embedding.edge_pair_distance", plan.min_edge_pair_distance,
                1e-3, false, "edge curves meet only at shared vertices");
    if (std::isfinite(plan.min_shared_vertex_angle))
      add_check("embedding.shared_vertex_angle", plan.min_shared_vertex_angle,
                1e-3, false, "incoming edges are non-tangential");
  }
  add_check("embedding.vertex_separation", plan.min_vertex_separation,
            2.0 * p3 - 1e-12, false, "vertex images are distinct");

  plan.all_pass = true;
  for (const auto& c : plan.checks) plan.all_pass = plan.all_pass && c.pass;
  return plan;
}

}  // namespace calib6
