#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "femgraph/beamgen.hpp"
#include "femgraph/geometry.hpp"

namespace femgraph {

enum class EdgeTag { Contour, Fixture };

// Undirected edge, stored with first < second.
using EdgeKey = std::pair<int, int>;

inline EdgeKey make_edge(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> elements;  // counter-clockwise
  std::map<EdgeKey, EdgeTag> edge_tags;      // boundary edges only
  int load_node = -1;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return elements.size(); }

  // Rows are the element's node coordinates.
  Eigen::Matrix<double, 3, 2> element_coords(std::size_t e) const;
  Vec2 centroid(std::size_t e) const;
  double element_area(std::size_t e) const;
  double area() const;
};

struct MeshOptions {
  double target_size = 1.0;      // mm
  double min_angle_deg = 20.0;
  double max_edge_factor = 1.5;  // longest edge <= factor * target_size
  double min_edge = 0.1;         // segments shorter than 2 * min_edge are never split
};

// Conforming Delaunay triangulation with Ruppert refinement. Boundary edges
// are tagged and the load node is set before returning.
TriMesh triangulate(const PlanarDomain& domain, const MeshOptions& options);
TriMesh triangulate(const PlanarDomain& domain, double target_size = 1.0);

// Tags boundary edges on the fixture segment `Fixture`, every other
// boundary edge `Contour`, and snaps the load anchor to the nearest node.
// Throws MeshError if a boundary edge does not lie on any domain loop.
TriMesh classify_boundary(TriMesh mesh, const PlanarDomain& domain);

// Edges referenced by exactly one element, sorted.
std::vector<EdgeKey> boundary_edges(const TriMesh& mesh);

// Edges shared by two elements, sorted.
std::vector<EdgeKey> interior_edges(const TriMesh& mesh);

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double min_edge = 0.0;
  double max_edge = 0.0;
  double min_signed_area = 0.0;
  double total_area = 0.0;
  std::size_t element_count = 0;
  std::size_t node_count = 0;
};

QualityReport mesh_quality(const TriMesh& mesh);

// Plain-text mesh format:
//   <nodes> <elements> <tags>
//   x y            one line per node
//   i j k          one line per element
//   i j contour|fixture
//   <load node>
// Floats use the shortest round-trip representation, so write/read is
// bit-exact.
void write_mesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in);

}  // namespace femgraph
