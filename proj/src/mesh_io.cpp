#include <istream>
#include <ostream>

#include "femgraph/error.hpp"
#include "femgraph/mesher.hpp"
#include "femgraph/text_io.hpp"

namespace femgraph {

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  out << mesh.nodes.size() << ' ' << mesh.elements.size() << ' ' << mesh.edge_tags.size() << '\n';
  for (const Vec2& p : mesh.nodes) {
    out << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  }
  for (const auto& el : mesh.elements) out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
  for (const auto& [e, tag] : mesh.edge_tags) {
    out << e.first << ' ' << e.second << ' ' << (tag == EdgeTag::Fixture ? "fixture" : "contour")
        << '\n';
  }
  out << mesh.load_node << '\n';
}

TriMesh read_mesh(std::istream& in) {
  TriMesh mesh;
  const long long n = read_int(in, "node count");
  const long long m = read_int(in, "element count");
  const long long t = read_int(in, "tag count");
  if (n < 0 || m < 0 || t < 0) throw DataError("negative count in mesh header");
  auto node_index = [n](long long v) {
    if (v < 0 || v >= n) throw DataError("node index " + std::to_string(v) + " out of range");
    return static_cast<int>(v);
  };
  mesh.nodes.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double x = read_double(in, "node x");
    const double y = read_double(in, "node y");
    mesh.nodes.emplace_back(x, y);
  }
  mesh.elements.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    std::array<int, 3> el{};
    for (int& v : el) v = node_index(read_int(in, "element node"));
    mesh.elements.push_back(el);
  }
  for (long long i = 0; i < t; ++i) {
    const int a = node_index(read_int(in, "tag node"));
    const int b = node_index(read_int(in, "tag node"));
    const std::string tag = next_token(in, "tag name");
    if (tag == "fixture") {
      mesh.edge_tags[make_edge(a, b)] = EdgeTag::Fixture;
    } else if (tag == "contour") {
      mesh.edge_tags[make_edge(a, b)] = EdgeTag::Contour;
    } else {
      throw DataError("unknown edge tag '" + tag + "'");
    }
  }
  const long long load = read_int(in, "load node");
  mesh.load_node = load < 0 ? -1 : node_index(load);
  return mesh;
}

}  // namespace femgraph
