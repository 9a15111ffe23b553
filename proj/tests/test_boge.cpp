#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "femgraph/beamgen.hpp"
#include "femgraph/boge.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace femgraph;
namespace ft = femgraph::testing;

namespace {

using PairSet = std::set<std::pair<int, int>>;

}  // namespace

TEST(Boge, HandComputedFeaturesOfAUnitSquare) {
  const TriMesh mesh = ft::grid_mesh(1, 1, 1, 1);
  ASSERT_EQ(mesh.load_node, 1);
  const VertexFeatures f = vertex_features(mesh, 0, mesh.load_node, Vec2(0, -500));
  EXPECT_NEAR(f.center.x(), 2.0 / 3, 1e-15);
  EXPECT_NEAR(f.center.y(), 1.0 / 3, 1e-15);
  // Sorted by midpoint angle: bottom (-116.6 deg), right (26.6), diagonal (135).
  EXPECT_NEAR(f.edges[0].distance, 1.0 / 3, 1e-15);
  EXPECT_EQ(f.edges[0].normal, Vec2(0, -1));
  EXPECT_EQ(f.edges[0].state, EdgeState::Contour);
  EXPECT_NEAR(f.edges[1].distance, 1.0 / 3, 1e-15);
  EXPECT_EQ(f.edges[1].normal, Vec2(1, 0));
  EXPECT_EQ(f.edges[1].state, EdgeState::Contour);
  EXPECT_NEAR(f.edges[2].distance, 1.0 / (3 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(f.edges[2].normal.x(), -1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(f.edges[2].normal.y(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(f.edges[2].state, EdgeState::Interior);
  EXPECT_NEAR(f.force_position.x(), 1.0 / 3, 1e-15);
  EXPECT_NEAR(f.force_position.y(), -1.0 / 3, 1e-15);
  EXPECT_EQ(f.force, Vec2(0, -500));

  const VertexFeatures g = vertex_features(mesh, 1, mesh.load_node, Vec2(0, -500));
  EXPECT_FALSE(g.carries_load());
  EXPECT_EQ(g.force_position, Vec2::Zero());
  EXPECT_EQ(g.force, Vec2::Zero());
  int fixture = 0;
  for (const EdgeFeature& e : g.edges) fixture += e.state == EdgeState::Fixture;
  EXPECT_EQ(fixture, 1);
}

TEST(Boge, FeaturePropertiesOnMeshedDesigns) {
  for (int f = 1; f <= kFamilyCount; ++f) {
    const BeamDesign d = sample_design(f, sample_seed(2, f, 0));
    const TriMesh mesh = triangulate(design_to_polygon(d), 1.0);
    const auto feats = all_vertex_features(mesh, mesh.load_node, d.load.vector());
    ASSERT_EQ(feats.size(), mesh.elements.size());
    int loaded = 0;
    for (std::size_t e = 0; e < feats.size(); ++e) {
      const VertexFeatures& v = feats[e];
      const auto& el = mesh.elements[e];
      const Vec2 c = (mesh.nodes[el[0]] + mesh.nodes[el[1]] + mesh.nodes[el[2]]) / 3.0;
      EXPECT_LE((v.center - c).norm(), 1e-12);
      double prev = -10;
      for (const EdgeFeature& k : v.edges) {
        const Vec2& a = mesh.nodes[k.edge.first];
        const Vec2& b = mesh.nodes[k.edge.second];
        EXPECT_NEAR(k.normal.norm(), 1.0, 1e-9);
        EXPECT_NEAR(k.normal.dot(b - a), 0.0, 1e-9 * (b - a).norm());
        EXPECT_GT(k.normal.dot(0.5 * (a + b) - c), 0.0);
        EXPECT_GE(k.distance, 0.0);
        EXPECT_NEAR(k.distance, oracle::point_to_segment(c, a, b), 1e-9);
        const double ang = std::atan2((0.5 * (a + b) - c).y(), (0.5 * (a + b) - c).x());
        EXPECT_GT(ang, prev);
        prev = ang;
        const auto tag = mesh.edge_tags.find(k.edge);
        const EdgeState want = tag == mesh.edge_tags.end() ? EdgeState::Interior
                               : tag->second == EdgeTag::Fixture ? EdgeState::Fixture
                                                                 : EdgeState::Contour;
        EXPECT_EQ(k.state, want);
      }
      const bool has_load = std::find(el.begin(), el.end(), mesh.load_node) != el.end();
      loaded += has_load;
      EXPECT_EQ(v.carries_load(), has_load);
      if (!has_load) {
        const auto flat = v.flatten();
        ASSERT_EQ(flat.size(), 18u);
        for (int i = 14; i < 18; ++i) EXPECT_EQ(flat[i], 0.0);
      }
    }
    EXPECT_GE(loaded, 1);
  }
}

TEST(Boge, FlattenOrderAndMaterialBlock) {
  const TriMesh mesh = ft::grid_mesh(1, 1, 1, 1);
  const Material mat;
  const VertexFeatures f = vertex_features(mesh, 0, mesh.load_node, Vec2(100, 0), mat);
  const auto flat = f.flatten();
  ASSERT_EQ(flat.size(), 20u);
  EXPECT_EQ(flat[2], mat.youngs_modulus);
  EXPECT_EQ(flat[3], mat.poisson_ratio);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(flat[4 + 4 * k], f.edges[k].distance);
    EXPECT_EQ(flat[5 + 4 * k], f.edges[k].normal.x());
    EXPECT_EQ(flat[6 + 4 * k], f.edges[k].normal.y());
    EXPECT_EQ(flat[7 + 4 * k], static_cast<double>(f.edges[k].state));
  }
  EXPECT_EQ(flat[18], 100.0);
  EXPECT_EQ(flat[19], 0.0);
}

TEST(Boge, LocalAdjacencyMatchesFloydWarshallOracle) {
  for (int trial = 0; trial < 10; ++trial) {
    const TriMesh mesh = oracle::small_mesh(1 + trial % kFamilyCount, sample_seed(31, trial, 0));
    ASSERT_LE(mesh.elements.size(), 200u);
    for (int hops = 1; hops <= 3; ++hops) {
      const GraphEdges got = local_adjacency(mesh, hops);
      const auto want = oracle::hop_pairs(mesh, hops);
      EXPECT_EQ(PairSet(got.begin(), got.end()), want) << trial << " hops " << hops;
      EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
      EXPECT_EQ(got.size(), want.size());
    }
  }
  EXPECT_THROW(local_adjacency(ft::grid_mesh(2, 2, 2, 2), 0), ConfigError);
}

TEST(Boge, GraphEdgeCountsPerMode) {
  const BeamDesign d = sample_design(2, 99);
  const TriMesh mesh = triangulate(design_to_polygon(d), 1.5);
  const std::vector<double> target(mesh.elements.size(), 1.0);

  GraphOptions conv;
  conv.mode = EmbeddingMode::Conventional;
  conv.max_hops = 3;
  const GraphSample c = build_graph(mesh, d.load.vector(), target, conv);
  EXPECT_EQ(c.edges.size(), interior_edges(mesh).size());
  EXPECT_EQ(c.max_hops, 1);

  const GraphSample b = build_graph(mesh, d.load.vector(), target, GraphOptions{});
  std::size_t boundary = 0;
  for (const VertexFeatures& v : b.vertices) boundary += v.has_boundary_info();
  const std::size_t internal = b.vertices.size() - boundary;
  const GraphEdges shortcuts = boundary_shortcuts(b.vertices);
  EXPECT_EQ(shortcuts.size(), boundary * internal);
  for (const auto& [i, j] : shortcuts) {
    EXPECT_NE(b.vertices[i].has_boundary_info(), b.vertices[j].has_boundary_info());
  }
  const GraphEdges local = local_adjacency(mesh, 3);
  PairSet expect(local.begin(), local.end());
  expect.insert(shortcuts.begin(), shortcuts.end());
  EXPECT_EQ(b.edges.size(), expect.size());
  EXPECT_EQ(PairSet(b.edges.begin(), b.edges.end()), expect);
}

TEST(Boge, FeatureMatrixIsNormalized) {
  const TriMesh mesh = ft::grid_mesh(4, 2, 4, 2);
  const std::vector<double> target(mesh.elements.size(), 3.0);
  GraphOptions opt;
  opt.material = Material{};
  const GraphSample g = build_graph(mesh, Vec2(0, -1000), target, opt);
  const Eigen::MatrixXd f = g.feature_matrix();
  ASSERT_EQ(f.cols(), 20);
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    const auto raw = g.vertices[v].flatten();
    const Eigen::Index r = static_cast<Eigen::Index>(v);
    EXPECT_DOUBLE_EQ(f(r, 0), raw[0] / 64.0);
    EXPECT_DOUBLE_EQ(f(r, 2), raw[2] / 200000.0);
    EXPECT_DOUBLE_EQ(f(r, 3), raw[3]);
    EXPECT_DOUBLE_EQ(f(r, 4), raw[4] / 64.0);
    EXPECT_DOUBLE_EQ(f(r, 5), raw[5]);
    EXPECT_DOUBLE_EQ(f(r, 7), raw[7]);
    EXPECT_DOUBLE_EQ(f(r, 16), raw[16] / 64.0);
    EXPECT_DOUBLE_EQ(f(r, 19), raw[19] / 1000.0);
  }
}

TEST(Boge, JsonlRecordRoundTrip) {
  const TriMesh mesh = ft::grid_mesh(3, 2, 3, 2);
  std::vector<double> target(mesh.elements.size());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = 0.5 * static_cast<double>(i);
  GraphSample g = build_graph(mesh, Vec2(0, -1000), target);
  g.id = "f1-0007";
  g.family = 1;
  const std::string line = to_jsonl_line(g);
  ASSERT_EQ(line.back(), '\n');
  EXPECT_EQ(line.find('\n'), line.size() - 1);
  const auto j = nlohmann::ordered_json::parse(line);
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "family", "num_vertices", "features", "edges", "target", "norm"}));

  const GraphRecord r = parse_graph_record(line);
  EXPECT_EQ(r.id, "f1-0007");
  EXPECT_EQ(r.family, 1);
  EXPECT_EQ(r.features, g.feature_matrix());
  EXPECT_EQ(r.edges, g.edges);
  EXPECT_EQ(r.target, g.target);
  EXPECT_EQ(r.norm["length"], 64.0);
  EXPECT_EQ(r.norm["force"], 1000.0);
}

TEST(Boge, MalformedInputsAreRejected) {
  EXPECT_THROW(parse_graph_record("{not json"), DataError);
  EXPECT_THROW(parse_graph_record(R"({"id":"a","family":1,"num_vertices":2,"features":[[0],[0]],"edges":[],"target":[1],"norm":{}})"),
               DataError);
  EXPECT_THROW(parse_graph_record(R"({"id":"a","family":1,"num_vertices":2,"features":[[0],[0]],"edges":[[1,0]],"target":[1,2],"norm":{}})"),
               DataError);
  EXPECT_THROW(parse_graph_record(R"({"id":"a","family":1,"num_vertices":1,"features":[[0]],"edges":[],"target":[1]})"),
               DataError);
  EXPECT_THROW(parse_embedding_mode("hybrid"), ConfigError);
  EXPECT_EQ(parse_embedding_mode("boge"), EmbeddingMode::Boge);
  EXPECT_EQ(parse_embedding_mode(to_string(EmbeddingMode::Conventional)), EmbeddingMode::Conventional);
  const TriMesh mesh = ft::grid_mesh(2, 1, 2, 1);
  const std::vector<double> short_target(2, 0.0);
  EXPECT_THROW(build_graph(mesh, Vec2(0, -1), short_target), DataError);
}
