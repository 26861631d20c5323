#include "calib6/obj_export.hpp"

#include <cstdio>

#include "calib6/report.hpp"

namespace calib6 {

void ObjMesh::add_patch(int rows, int cols,
                        const std::function<Eigen::Vector3d(int, int)>& at) {
  int base = (int)vertices.size();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) vertices.push_back(at(i, j));
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j) {
      int v00 = base + i * cols + j, v01 = v00 + 1;
      int v10 = v00 + cols, v11 = v10 + 1;
      faces.push_back({v00, v10, v11});
      faces.push_back({v00, v11, v01});
    }
}

void ObjMesh::add_polyline(const std::vector<Eigen::Vector3d>& pts) {
  std::vector<int> strip;
  for (const auto& p : pts) strip.push_back(add_vertex(p));
  polylines.push_back(std::move(strip));
}

std::string to_obj_text(const ObjMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40);
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v(0), v(1), v(2));
    out += buf;
  }
  for (const auto& f : mesh.faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out += buf;
  }
  for (const auto& l : mesh.polylines) {
    out += "l";
    for (int idx : l) {
      std::snprintf(buf, sizeof buf, " %d", idx + 1);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_obj(const std::string& path, const ObjMesh& mesh) {
  write_atomic(path, to_obj_text(mesh));
}

void add_tube(ObjMesh& mesh, const std::vector<Eigen::Vector3d>& pts,
              double radius, int ring_segments) {
  if (pts.size() < 2) return;
  int base = (int)mesh.vertices.size();
  Eigen::Vector3d prev_u = Eigen::Vector3d::Zero();
  int rings = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    Eigen::Vector3d t = (i + 1 < pts.size() ? pts[i + 1] - pts[i]
                                            : pts[i] - pts[i - 1]);
    if (t.norm() < 1e-14) t = Eigen::Vector3d::UnitZ();
    t.normalize();
    Eigen::Vector3d u = prev_u.norm() > 0.5
                            ? (prev_u - prev_u.dot(t) * t)
                            : t.unitOrthogonal();
    if (u.norm() < 1e-9) u = t.unitOrthogonal();
    u.normalize();
    prev_u = u;
    Eigen::Vector3d v = t.cross(u);
    for (int k = 0; k < ring_segments; ++k) {
      double a = 2 * M_PI * k / ring_segments;
      mesh.vertices.push_back(pts[i] + radius * (std::cos(a) * u + std::sin(a) * v));
    }
    ++rings;
  }
  for (int i = 0; i + 1 < rings; ++i)
    for (int k = 0; k < ring_segments; ++k) {
      int k1 = (k + 1) % ring_segments;
      int a0 = base + i * ring_segments + k, a1 = base + i * ring_segments + k1;
      int b0 = a0 + ring_segments, b1 = a1 + ring_segments;
      mesh.faces.push_back({a0, b0, b1});
      mesh.faces.push_back({a0, b1, a1});
    }
}

Eigen::Vector3d glue_view(const Vector6d& p) {
  return Eigen::Vector3d(p(0), p(2), p(3));
}

PcaView pca_view(const std::vector<Vector6d>& cloud) {
  PcaView view;
  view.mean = Vector6d::Zero();
  for (const auto& p : cloud) view.mean += p;
  if (!cloud.empty()) view.mean /= (double)cloud.size();
  Matrix6d cov = Matrix6d::Zero();
  for (const auto& p : cloud) {
    Vector6d d = p - view.mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix6d> es(cov);
  for (int i = 0; i < 3; ++i) {
    Vector6d axis = es.eigenvectors().col(5 - i);
    // sign convention: first nonzero entry positive
    for (int j = 0; j < 6; ++j) {
      if (std::abs(axis(j)) > 1e-12) {
        if (axis(j) < 0) axis = -axis;
        break;
      }
    }
    view.axes.row(i) = axis.transpose();
  }
  return view;
}

}  // namespace calib6
