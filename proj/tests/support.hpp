#pragma once

#include <cmath>
#include <random>

#include "femgraph/beamgen.hpp"
#include "femgraph/fea.hpp"
#include "femgraph/mesher.hpp"

namespace femgraph::testing {

// nx x ny cells over [0, w] x [0, h], each split along a diagonal whose
// direction alternates like a checkerboard. Left edge tagged Fixture, the
// rest of the boundary Contour; the load node is the right-edge node
// closest to mid-height. Built without the mesher.
inline TriMesh grid_mesh(double w, double h, int nx, int ny) {
  TriMesh m;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) m.nodes.emplace_back(w * i / nx, h * j / ny);
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.elements.push_back({a, b, c});
        m.elements.push_back({a, c, d});
      } else {
        m.elements.push_back({a, b, d});
        m.elements.push_back({b, c, d});
      }
    }
  }
  for (int j = 0; j < ny; ++j) m.edge_tags[make_edge(id(0, j), id(0, j + 1))] = EdgeTag::Fixture;
  for (int j = 0; j < ny; ++j) m.edge_tags[make_edge(id(nx, j), id(nx, j + 1))] = EdgeTag::Contour;
  for (int i = 0; i < nx; ++i) {
    m.edge_tags[make_edge(id(i, 0), id(i + 1, 0))] = EdgeTag::Contour;
    m.edge_tags[make_edge(id(i, ny), id(i + 1, ny))] = EdgeTag::Contour;
  }
  m.load_node = id(nx, ny / 2);
  return m;
}

inline BeamDesign rectangle_design(double w, double h, double magnitude = 1000.0,
                                   double angle = 1.5 * 3.14159265358979323846) {
  BeamDesign d;
  d.family = 1;
  d.width = w;
  d.height = h;
  d.tip_height = h;
  d.load.anchor_fraction = 0.5;
  d.load.magnitude = magnitude;
  d.load.angle = angle;
  return d;
}

// Random counter-clockwise triangle with area bounded away from zero.
inline Eigen::Matrix<double, 3, 2> random_triangle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (;;) {
    Eigen::Matrix<double, 3, 2> xy;
    for (int r = 0; r < 3; ++r) xy.row(r) << u(rng), u(rng);
    const double twice = (xy(1, 0) - xy(0, 0)) * (xy(2, 1) - xy(0, 1)) -
                         (xy(2, 0) - xy(0, 0)) * (xy(1, 1) - xy(0, 1));
    if (std::abs(twice) < 1.0) continue;
    if (twice < 0) xy.row(1).swap(xy.row(2));
    return xy;
  }
}

// Left edge on rollers (x fixed, plus y at the origin), uniform traction p
// on the right edge x = width lumped to its nodes.
inline FeaProblem tension_patch(const TriMesh& mesh, double width, double p) {
  FeaProblem prob;
  prob.mesh = mesh;
  int corner = -1;
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const Vec2& x = mesh.nodes[n];
    if (x.x() == 0.0) prob.fixed_dofs.insert({static_cast<int>(n), 0});
    if (x.x() == 0.0 && x.y() == 0.0) corner = static_cast<int>(n);
  }
  prob.fixed_dofs.insert({corner, 1});
  for (const auto& [edge, tag] : mesh.edge_tags) {
    const Vec2& a = mesh.nodes[edge.first];
    const Vec2& b = mesh.nodes[edge.second];
    if (a.x() != width || b.x() != width) continue;
    const double half = 0.5 * p * prob.material.thickness * (b - a).norm();
    for (int n : {edge.first, edge.second}) {
      prob.nodal_loads.try_emplace(n, Vec2::Zero()).first->second += Vec2(half, 0.0);
    }
  }
  return prob;
}

}  // namespace femgraph::testing
