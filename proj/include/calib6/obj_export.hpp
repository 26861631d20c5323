#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "calib6/linalg.hpp"

namespace calib6 {

// minimal OBJ writer: triangulated patches plus polyline elements
struct ObjMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;       // 0-based
  std::vector<std::vector<int>> polylines;     // 0-based strips

  int add_vertex(const Eigen::Vector3d& v) {
    vertices.push_back(v);
    return (int)vertices.size() - 1;
  }
  // tensor patch triangulated from a (rows x cols) lattice of positions
  void add_patch(int rows, int cols,
                 const std::function<Eigen::Vector3d(int, int)>& at);
  void add_polyline(const std::vector<Eigen::Vector3d>& pts);
};

std::string to_obj_text(const ObjMesh& mesh);
void write_obj(const std::string& path, const ObjMesh& mesh);

// circular tube of the given radius around a polyline
void add_tube(ObjMesh& mesh, const std::vector<Eigen::Vector3d>& pts,
              double radius, int ring_segments);

// fixed linear view of R^6 used for the gluing meshes: (x1, x3, y1)
Eigen::Vector3d glue_view(const Vector6d& p);

// orientation-stable projection onto the three dominant directions of a
// point cloud, used for graph exports
struct PcaView {
  Eigen::Matrix<double, 3, 6> axes;
  Vector6d mean;
  Eigen::Vector3d operator()(const Vector6d& p) const {
    return axes * (p - mean);
  }
};
PcaView pca_view(const std::vector<Vector6d>& cloud);

}  // namespace calib6
