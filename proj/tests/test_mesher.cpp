#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "femgraph/beamgen.hpp"
#include "femgraph/error.hpp"
#include "femgraph/mesher.hpp"
#include "femgraph/seed.hpp"
#include "support.hpp"

using namespace femgraph;

namespace {

std::map<EdgeKey, std::vector<int>> edge_owners(const TriMesh& m) {
  std::map<EdgeKey, std::vector<int>> owners;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& t = m.elements[e];
    for (int k = 0; k < 3; ++k) owners[make_edge(t[k], t[(k + 1) % 3])].push_back(static_cast<int>(e));
  }
  return owners;
}

int opposite(const TriMesh& m, int e, const EdgeKey& edge) {
  for (int v : m.elements[static_cast<std::size_t>(e)]) {
    if (v != edge.first && v != edge.second) return v;
  }
  return -1;
}

double angle_at(const Vec2& apex, const Vec2& a, const Vec2& b) {
  const Vec2 u = a - apex, v = b - apex;
  return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
}

bool on_loop(const Vec2& p, const Loop& loop, double tol) {
  for (std::size_t i = 0; i < loop.size(); ++i) {
    if (point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]) < tol) return true;
  }
  return false;
}

struct Case {
  BeamDesign design;
  PlanarDomain domain;
  TriMesh mesh;
};

const std::vector<Case>& family_cases() {
  static const std::vector<Case> cases = [] {
    std::vector<Case> out;
    for (int f = 1; f <= kFamilyCount; ++f) {
      for (int i = 0; i < 3; ++i) {
        Case c;
        c.design = sample_design(f, sample_seed(21, f, i));
        c.domain = design_to_polygon(c.design);
        c.mesh = triangulate(c.domain, 1.0);
        out.push_back(std::move(c));
      }
    }
    return out;
  }();
  return cases;
}

}  // namespace

TEST(Mesher, ElementsArePositiveAndTileTheDomain) {
  for (const Case& c : family_cases()) {
    double total = 0.0;
    for (std::size_t e = 0; e < c.mesh.elements.size(); ++e) {
      const auto xy = c.mesh.element_coords(e);
      const double a = 0.5 * ((xy(1, 0) - xy(0, 0)) * (xy(2, 1) - xy(0, 1)) - (xy(2, 0) - xy(0, 0)) * (xy(1, 1) - xy(0, 1)));
      ASSERT_GT(a, 0.0);
      total += a;
    }
    EXPECT_NEAR(total, c.domain.area(), 1e-9 * c.domain.area());
  }
}

TEST(Mesher, ConformingTopologyAndEulerCharacteristic) {
  for (const Case& c : family_cases()) {
    const auto owners = edge_owners(c.mesh);
    std::size_t boundary = 0;
    for (const auto& [edge, elems] : owners) {
      ASSERT_LE(elems.size(), 2u);
      if (elems.size() == 1) {
        ++boundary;
        EXPECT_TRUE(c.mesh.edge_tags.count(edge));
        const Vec2 mid = 0.5 * (c.mesh.nodes[edge.first] + c.mesh.nodes[edge.second]);
        bool found = on_loop(mid, c.domain.outer_loop, 1e-9);
        for (const Loop& h : c.domain.hole_loops) found = found || on_loop(mid, h, 1e-9);
        EXPECT_TRUE(found);
      } else {
        EXPECT_FALSE(c.mesh.edge_tags.count(edge));
      }
    }
    EXPECT_EQ(boundary, c.mesh.edge_tags.size());
    const long v = static_cast<long>(c.mesh.nodes.size());
    const long e = static_cast<long>(owners.size());
    const long f = static_cast<long>(c.mesh.elements.size());
    EXPECT_EQ(v - e + f, 1 - static_cast<long>(c.domain.hole_loops.size()));
    EXPECT_EQ(boundary_edges(c.mesh).size() + interior_edges(c.mesh).size(), owners.size());
  }
}

TEST(Mesher, QualityBoundsHold) {
  for (const Case& c : family_cases()) {
    const QualityReport q = mesh_quality(c.mesh);
    EXPECT_GE(q.min_angle_deg, 20.0 - 1e-9) << c.design.family;
    EXPECT_LE(q.max_edge, 1.5 + 1e-9) << c.design.family;
    EXPECT_GT(q.min_signed_area, 0.0);
    EXPECT_EQ(q.element_count, c.mesh.elements.size());
  }
}

TEST(Mesher, InteriorEdgesAreLocallyDelaunay) {
  for (const Case& c : family_cases()) {
    for (const auto& [edge, elems] : edge_owners(c.mesh)) {
      if (elems.size() != 2) continue;
      const Vec2& a = c.mesh.nodes[edge.first];
      const Vec2& b = c.mesh.nodes[edge.second];
      const Vec2& p = c.mesh.nodes[opposite(c.mesh, elems[0], edge)];
      const Vec2& q = c.mesh.nodes[opposite(c.mesh, elems[1], edge)];
      EXPECT_LE(angle_at(p, a, b) + angle_at(q, a, b), std::numbers::pi + 1e-9);
    }
  }
}

TEST(Mesher, FixtureTagsCoverTheLeftEdgeAndLoadNodeIsNearestToAnchor) {
  for (const Case& c : family_cases()) {
    double fixture_length = 0.0;
    for (const auto& [edge, tag] : c.mesh.edge_tags) {
      const Vec2& a = c.mesh.nodes[edge.first];
      const Vec2& b = c.mesh.nodes[edge.second];
      const bool on_fixture = a.x() == 0.0 && b.x() == 0.0;
      EXPECT_EQ(tag == EdgeTag::Fixture, on_fixture);
      if (on_fixture) fixture_length += (b - a).norm();
    }
    EXPECT_NEAR(fixture_length, c.design.height, 1e-12);
    ASSERT_GE(c.mesh.load_node, 0);
    const double d = (c.mesh.nodes[c.mesh.load_node] - c.domain.load_anchor).norm();
    for (const Vec2& n : c.mesh.nodes) EXPECT_LE(d, (n - c.domain.load_anchor).norm());
    EXPECT_DOUBLE_EQ(c.mesh.nodes[c.mesh.load_node].x(), c.design.width);
  }
}

TEST(Mesher, TargetSizeControlsDensity) {
  const PlanarDomain dom = design_to_polygon(femgraph::testing::rectangle_design(40, 20));
  const TriMesh coarse = triangulate(dom, 2.0);
  const TriMesh fine = triangulate(dom, 1.0);
  const double ratio = static_cast<double>(fine.elements.size()) / coarse.elements.size();
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
  for (std::size_t e = 0; e < fine.elements.size(); ++e) EXPECT_LE(fine.element_area(e), 1.0 + 1e-12);
}

TEST(Mesher, DeterministicAndRoundTripsThroughText) {
  const Case& c = family_cases()[4];
  const TriMesh again = triangulate(c.domain, 1.0);
  std::ostringstream a, b;
  write_mesh(a, c.mesh);
  write_mesh(b, again);
  EXPECT_EQ(a.str(), b.str());

  std::istringstream in(a.str());
  const TriMesh back = read_mesh(in);
  EXPECT_EQ(back.nodes, c.mesh.nodes);
  EXPECT_EQ(back.elements, c.mesh.elements);
  EXPECT_EQ(back.edge_tags, c.mesh.edge_tags);
  EXPECT_EQ(back.load_node, c.mesh.load_node);
}

TEST(Mesher, RejectsBadInput) {
  const PlanarDomain dom = design_to_polygon(femgraph::testing::rectangle_design(40, 20));
  EXPECT_THROW(triangulate(dom, 0.0), MeshError);
  EXPECT_THROW(triangulate(dom, -1.0), MeshError);
  std::istringstream truncated("3 1 0\n0 0\n1 0\n");
  EXPECT_THROW(read_mesh(truncated), DataError);
  std::istringstream bad_index("3 1 0\n0 0\n1 0\n0 1\n0 1 7\n0\n");
  EXPECT_THROW(read_mesh(bad_index), DataError);
}
