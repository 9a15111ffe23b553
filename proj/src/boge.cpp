#include "femgraph/boge.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace femgraph {
namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

int state_code(EdgeState s) { return static_cast<int>(s); }

}  // namespace

std::vector<double> VertexFeatures::flatten() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(channel_count()));
  out.push_back(center.x());
  out.push_back(center.y());
  if (material) {
    out.push_back((*material)(0));
    out.push_back((*material)(1));
  }
  for (const EdgeFeature& e : edges) {
    out.push_back(e.distance);
    out.push_back(e.normal.x());
    out.push_back(e.normal.y());
    out.push_back(static_cast<double>(state_code(e.state)));
  }
  out.push_back(force_position.x());
  out.push_back(force_position.y());
  out.push_back(force.x());
  out.push_back(force.y());
  return out;
}

bool VertexFeatures::carries_load() const {
  return force_position.x() != 0.0 || force_position.y() != 0.0 || force.x() != 0.0 || force.y() != 0.0;
}

bool VertexFeatures::has_boundary_info() const {
  if (carries_load()) return true;
  return std::any_of(edges.begin(), edges.end(), [](const EdgeFeature& e) { return e.state != EdgeState::Interior; });
}

VertexFeatures vertex_features(const TriMesh& mesh, std::size_t element, int load_node, const Vec2& load,
                               const std::optional<Material>& material) {
  if (element >= mesh.elements.size()) throw MeshError("element index out of range");
  const auto& el = mesh.elements[element];
  VertexFeatures f;
  const Vec2 p[3] = {mesh.nodes[at(el[0])], mesh.nodes[at(el[1])], mesh.nodes[at(el[2])]};
  if (!(cross(p[0], p[1], p[2]) > 0.0)) {
    throw MeshError("degenerate element " + std::to_string(element));
  }
  f.center = (p[0] + p[1] + p[2]) / 3.0;
  if (material) f.material = Eigen::Vector2d(material->youngs_modulus, material->poisson_ratio);

  std::array<std::pair<double, EdgeFeature>, 3> sorted;
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = p[k];
    const Vec2& b = p[(k + 1) % 3];
    const Vec2 d = b - a;
    const double len = d.norm();
    EdgeFeature e;
    e.normal = Vec2(d.y(), -d.x()) / len + Vec2::Zero();  // outward for CCW; + 0 clears -0.0
    e.distance = std::abs(cross(a, b, f.center)) / len;
    e.edge = make_edge(el[at(k)], el[at((k + 1) % 3)]);
    const auto tag = mesh.edge_tags.find(e.edge);
    if (tag != mesh.edge_tags.end()) {
      e.state = tag->second == EdgeTag::Fixture ? EdgeState::Fixture : EdgeState::Contour;
    }
    const Vec2 mid = 0.5 * (a + b) - f.center;
    sorted[static_cast<std::size_t>(k)] = {std::atan2(mid.y(), mid.x()), e};
  }
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t k = 0; k < 3; ++k) f.edges[k] = sorted[k].second;

  if (load_node >= 0 && std::find(el.begin(), el.end(), load_node) != el.end()) {
    f.force_position = mesh.nodes[at(load_node)] - f.center;
    f.force = load;
  }
  return f;
}

std::vector<VertexFeatures> all_vertex_features(const TriMesh& mesh, int load_node, const Vec2& load,
                                                const std::optional<Material>& material) {
  std::vector<VertexFeatures> out;
  out.reserve(mesh.elements.size());
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    out.push_back(vertex_features(mesh, e, load_node, load, material));
  }
  return out;
}

std::vector<std::vector<int>> element_neighbors(const TriMesh& mesh) {
  std::map<EdgeKey, std::vector<int>> owners;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    for (int k = 0; k < 3; ++k) {
      owners[make_edge(el[at(k)], el[at((k + 1) % 3)])].push_back(static_cast<int>(e));
    }
  }
  std::vector<std::vector<int>> nbr(mesh.elements.size());
  for (const auto& [edge, elems] : owners) {
    if (elems.size() > 2) throw MeshError("edge shared by more than two elements");
    if (elems.size() == 2) {
      nbr[at(elems[0])].push_back(elems[1]);
      nbr[at(elems[1])].push_back(elems[0]);
    }
  }
  for (auto& n : nbr) std::sort(n.begin(), n.end());
  return nbr;
}

GraphEdges local_adjacency(const TriMesh& mesh, int max_hops) {
  if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
  const auto nbr = element_neighbors(mesh);
  const int m = static_cast<int>(nbr.size());
  GraphEdges out;
  std::vector<int> depth(at(m), -1);
  std::vector<int> visited;
  for (int s = 0; s < m; ++s) {
    visited.assign(1, s);
    depth[at(s)] = 0;
    for (std::size_t q = 0; q < visited.size(); ++q) {
      const int v = visited[q];
      if (depth[at(v)] == max_hops) continue;
      for (int w : nbr[at(v)]) {
        if (depth[at(w)] >= 0) continue;
        depth[at(w)] = depth[at(v)] + 1;
        visited.push_back(w);
      }
    }
    for (int v : visited) {
      if (v > s) out.emplace_back(s, v);
      depth[at(v)] = -1;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

GraphEdges boundary_shortcuts(const std::vector<VertexFeatures>& features) {
  std::vector<int> boundary, internal;
  for (std::size_t i = 0; i < features.size(); ++i) {
    (features[i].has_boundary_info() ? boundary : internal).push_back(static_cast<int>(i));
  }
  GraphEdges out;
  out.reserve(boundary.size() * internal.size());
  for (int b : boundary) {
    for (int i : internal) out.emplace_back(std::min(b, i), std::max(b, i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

GraphEdges merge_edges(const GraphEdges& a, const GraphEdges& b) {
  GraphEdges out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(EmbeddingMode mode) { return mode == EmbeddingMode::Boge ? "boge" : "conventional"; }

EmbeddingMode parse_embedding_mode(const std::string& text) {
  if (text == "boge") return EmbeddingMode::Boge;
  if (text == "conventional") return EmbeddingMode::Conventional;
  throw ConfigError("unknown embedding mode '" + text + "' (expected boge or conventional)");
}

nlohmann::ordered_json Normalization::to_json(bool with_material) const {
  nlohmann::ordered_json j;
  j["length"] = length;
  j["force"] = force;
  if (with_material) j["youngs_modulus"] = youngs_modulus;
  j["target"] = "raw";
  return j;
}

Eigen::MatrixXd GraphSample::feature_matrix() const {
  if (vertices.empty()) return Eigen::MatrixXd(0, VertexFeatures::kChannels);
  const bool with_material = vertices.front().material.has_value();
  const int channels = vertices.front().channel_count();
  Eigen::MatrixXd f(static_cast<Eigen::Index>(vertices.size()), channels);
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const std::vector<double> row = vertices[v].flatten();
    for (int c = 0; c < channels; ++c) f(static_cast<Eigen::Index>(v), c) = row[at(c)];
  }
  // Column layout: center(2) [material(2)] 3 x (d, nx, ny, S) force(4).
  const int base = with_material ? 4 : 2;
  f.col(0) /= norm.length;
  f.col(1) /= norm.length;
  if (with_material) f.col(2) /= norm.youngs_modulus;
  for (int k = 0; k < 3; ++k) f.col(base + 4 * k) /= norm.length;
  f.col(base + 12) /= norm.length;
  f.col(base + 13) /= norm.length;
  f.col(base + 14) /= norm.force;
  f.col(base + 15) /= norm.force;
  return f;
}

GraphSample build_graph(const TriMesh& mesh, const Vec2& load, std::span<const double> target,
                        const GraphOptions& options) {
  if (target.size() != mesh.elements.size()) {
    throw DataError("target length " + std::to_string(target.size()) + " does not match element count " +
                    std::to_string(mesh.elements.size()));
  }
  GraphSample g;
  g.mode = options.mode;
  g.max_hops = options.mode == EmbeddingMode::Boge ? options.max_hops : 1;
  g.norm = options.norm;
  g.vertices = all_vertex_features(mesh, mesh.load_node, load, options.material);
  g.target = Eigen::Map<const Eigen::VectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));
  const GraphEdges local = local_adjacency(mesh, g.max_hops);
  g.edges = options.mode == EmbeddingMode::Boge ? merge_edges(local, boundary_shortcuts(g.vertices)) : local;
  return g;
}

nlohmann::ordered_json to_json(const GraphSample& sample) {
  const Eigen::MatrixXd f = sample.feature_matrix();
  nlohmann::ordered_json j;
  j["id"] = sample.id;
  j["family"] = sample.family;
  j["num_vertices"] = sample.num_vertices();
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < f.cols(); ++c) row.push_back(f(r, c));
    features.push_back(std::move(row));
  }
  j["features"] = std::move(features);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : sample.edges) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  nlohmann::ordered_json target = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < sample.target.size(); ++i) target.push_back(sample.target(i));
  j["target"] = std::move(target);
  const bool with_material = !sample.vertices.empty() && sample.vertices.front().material.has_value();
  j["norm"] = sample.norm.to_json(with_material);
  return j;
}

std::string to_jsonl_line(const GraphSample& sample) { return to_json(sample).dump() + "\n"; }

GraphRecord parse_graph_record(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph record: ") + e.what());
  }
  GraphRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.family = j.at("family").get<int>();
    const auto n = j.at("num_vertices").get<std::size_t>();
    const auto& features = j.at("features");
    if (features.size() != n) throw DataError("feature rows do not match num_vertices");
    const std::size_t channels = n ? features.at(0).size() : VertexFeatures::kChannels;
    r.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(channels));
    for (std::size_t v = 0; v < n; ++v) {
      if (features[v].size() != channels) throw DataError("ragged feature matrix");
      for (std::size_t c = 0; c < channels; ++c) {
        r.features(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c)) = features[v][c].get<double>();
      }
    }
    for (const auto& e : j.at("edges")) {
      const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
      if (a < 0 || b < 0 || static_cast<std::size_t>(std::max(a, b)) >= n || a >= b) {
        throw DataError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range or unordered");
      }
      r.edges.emplace_back(a, b);
    }
    const auto& target = j.at("target");
    if (target.size() != n) throw DataError("target length does not match num_vertices");
    r.target.resize(static_cast<Eigen::Index>(n));
    for (std::size_t v = 0; v < n; ++v) r.target(static_cast<Eigen::Index>(v)) = target[v].get<double>();
    r.norm = j.at("norm");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed graph record: ") + e.what());
  }
  return r;
}

}  // namespace femgraph
