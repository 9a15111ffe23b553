#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "femgraph/fea.hpp"
#include "femgraph/mesher.hpp"

namespace femgraph {

enum class EdgeState { Interior = 0, Contour = 1, Fixture = 2 };

struct EdgeFeature {
  double distance = 0.0;             // centroid to edge line
  Vec2 normal = Vec2::Zero();        // unit, outward
  EdgeState state = EdgeState::Interior;
  EdgeKey edge{-1, -1};
};

struct VertexFeatures {
  Vec2 center = Vec2::Zero();
  std::optional<Eigen::Vector2d> material;  // (E, nu)
  std::array<EdgeFeature, 3> edges;         // ascending midpoint angle about center
  Vec2 force_position = Vec2::Zero();       // load node relative to center
  Vec2 force = Vec2::Zero();

  static constexpr int kChannels = 18;
  static constexpr int kChannelsWithMaterial = 20;

  int channel_count() const { return material ? kChannelsWithMaterial : kChannels; }
  std::vector<double> flatten() const;
  bool carries_load() const;
  // Any contour or fixture edge, or the applied load.
  bool has_boundary_info() const;
};

// Throws MeshError for a degenerate element.
VertexFeatures vertex_features(const TriMesh& mesh, std::size_t element, int load_node,
                               const Vec2& load, const std::optional<Material>& material = std::nullopt);

std::vector<VertexFeatures> all_vertex_features(const TriMesh& mesh, int load_node, const Vec2& load,
                                                const std::optional<Material>& material = std::nullopt);

// Undirected graph links, each stored (i, j) with i < j, sorted, unique.
using GraphEdges = std::vector<std::pair<int, int>>;

// Elements sharing a full edge, per element, ascending.
std::vector<std::vector<int>> element_neighbors(const TriMesh& mesh);

// All pairs within max_hops steps of the shared-edge element graph.
GraphEdges local_adjacency(const TriMesh& mesh, int max_hops);

// Each boundary-info element linked to each internal element, B * I pairs;
// no boundary-to-boundary pairs.
GraphEdges boundary_shortcuts(const std::vector<VertexFeatures>& features);

GraphEdges merge_edges(const GraphEdges& a, const GraphEdges& b);

enum class EmbeddingMode { Conventional, Boge };

std::string to_string(EmbeddingMode mode);
EmbeddingMode parse_embedding_mode(const std::string& text);

// Divisors applied to the exported feature channels.
struct Normalization {
  double length = 64.0;               // mm; coordinates and distances
  double force = 1000.0;              // N
  double youngs_modulus = 200000.0;   // MPa; only used with a material block

  nlohmann::ordered_json to_json(bool with_material) const;
};

struct GraphSample {
  std::string id;
  int family = 0;
  EmbeddingMode mode = EmbeddingMode::Boge;
  int max_hops = 3;
  std::vector<VertexFeatures> vertices;
  GraphEdges edges;
  Eigen::VectorXd target;
  Normalization norm;

  std::size_t num_vertices() const { return vertices.size(); }
  // V x channels, normalized for export.
  Eigen::MatrixXd feature_matrix() const;
};

struct GraphOptions {
  EmbeddingMode mode = EmbeddingMode::Boge;
  int max_hops = 3;  // local links in boge mode; conventional mode always uses 1
  std::optional<Material> material;  // emits the (E, nu) block when set
  Normalization norm;
};

// Throws DataError when the target length differs from the element count.
GraphSample build_graph(const TriMesh& mesh, const Vec2& load, std::span<const double> target,
                        const GraphOptions& options = {});

// One JSON object, fields in the order
// id, family, num_vertices, features, edges, target, norm.
nlohmann::ordered_json to_json(const GraphSample& sample);
std::string to_jsonl_line(const GraphSample& sample);

// Parsed view of an exported line; features stay normalized.
struct GraphRecord {
  std::string id;
  int family = 0;
  Eigen::MatrixXd features;
  GraphEdges edges;
  Eigen::VectorXd target;
  nlohmann::ordered_json norm;
};

// Throws DataError on malformed records or inconsistent sizes.
GraphRecord parse_graph_record(const std::string& line);

}  // namespace femgraph
