#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "femgraph/geometry.hpp"

namespace femgraph::detail {

// Incremental Bowyer-Watson Delaunay triangulation inside a large enclosing
// triangle. Triangles are never deleted in place: replaced ones are marked
// dead and new ones appended, so ids handed out stay valid handles.
class Triangulation {
 public:
  struct Tri {
    std::array<int, 3> v;    // counter-clockwise
    std::array<int, 3> nbr;  // nbr[i] is across the edge opposite v[i]; -1 on the hull
    bool alive = true;
  };

  // Encloses the box [lo, hi] with three far-away vertices (ids 0, 1, 2).
  Triangulation(const Vec2& lo, const Vec2& hi);

  // Returns the vertex id; an existing id when p coincides with a vertex.
  int insert(const Vec2& p);

  bool is_super(int v) const { return v < 3; }
  bool has_edge(int a, int b) const;

  // Apex vertices of the (at most two) triangles sharing edge (a, b).
  // Requires has_edge(a, b).
  std::array<int, 2> edge_apexes(int a, int b) const;

  const std::vector<Vec2>& vertices() const { return verts_; }
  const std::vector<Tri>& triangles() const { return tris_; }
  const Vec2& vertex(int v) const { return verts_[static_cast<std::size_t>(v)]; }
  const Tri& tri(int t) const { return tris_[static_cast<std::size_t>(t)]; }

 private:
  int locate(const Vec2& p) const;
  bool contains(int t, const Vec2& p) const;

  std::vector<Vec2> verts_;
  std::vector<Tri> tris_;
  std::vector<int> vertex_tri_;
  int last_ = 0;
};

}  // namespace femgraph::detail
