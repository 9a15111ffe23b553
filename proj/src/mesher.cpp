#include "femgraph/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

#include "delaunay.hpp"
#include "femgraph/error.hpp"

namespace femgraph {
namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

struct Segment {
  int a, b;
  bool alive = true;
};

std::string point_text(const Vec2& p) {
  return "(" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")";
}

void check_loop(const Loop& loop, const std::string& name) {
  if (loop.size() < 3) throw MeshError(name + " has fewer than 3 vertices");
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[(i + 1) % loop.size()];
    if ((b - a).norm() == 0.0) {
      throw MeshError(name + ": degenerate segment " + std::to_string(i) + " at " + point_text(a));
    }
  }
  if (std::abs(signed_area(loop)) == 0.0) throw MeshError(name + " encloses zero area");
  if (int s = first_self_intersection(loop); s >= 0) {
    const Vec2& a = loop[at(s)];
    const Vec2& b = loop[(at(s) + 1) % loop.size()];
    throw MeshError(name + ": sliver or self-intersecting segment " + std::to_string(s) + " " +
                    point_text(a) + "-" + point_text(b));
  }
}

class Refiner {
 public:
  Refiner(const PlanarDomain& domain, const MeshOptions& opt)
      : domain_(domain), opt_(opt), dt_(bbox_lo(domain), bbox_hi(domain)) {
    const double h = opt.target_size;
    max_area_ = h * h;
    max_edge_ = opt.max_edge_factor * h;
    min_ratio_ = 2.0 * std::sin(opt.min_angle_deg * std::numbers::pi / 180.0);
    const double area = std::abs(domain.area());
    max_vertices_ = static_cast<std::size_t>(50.0 * area / (h * h)) + 20000;
  }

  void build() {
    auto add_loop = [this](const Loop& loop) {
      std::vector<int> ids;
      const std::size_t n = loop.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = loop[i];
        const Vec2& q = loop[(i + 1) % n];
        const int pieces = std::max(1, static_cast<int>(std::ceil((q - p).norm() / opt_.target_size - 1e-9)));
        for (int k = 0; k < pieces; ++k) {
          ids.push_back(insert(p + (q - p) * (static_cast<double>(k) / pieces)));
        }
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        segments_.push_back({ids[i], ids[(i + 1) % ids.size()]});
      }
    };
    add_loop(domain_.outer_loop);
    for (const Loop& h : domain_.hole_loops) add_loop(h);

    for (std::size_t s = 0; s < segments_.size(); ++s) {
      for (std::size_t v = 3; v < dt_.vertices().size(); ++v) {
        if (encroaches(dt_.vertices()[v], segments_[s])) {
          seg_queue_.push_back(s);
          break;
        }
      }
    }
  }

  void refine() {
    while (true) {
      split_encroached();
      if (tri_queue_.empty()) break;
      const int t = tri_queue_.front();
      tri_queue_.pop_front();
      const auto& tr = dt_.tri(t);
      if (!tr.alive || !inside(t) || !is_bad(t)) continue;

      const Vec2 c = circumcenter(dt_.vertex(tr.v[0]), dt_.vertex(tr.v[1]), dt_.vertex(tr.v[2]));
      std::vector<std::size_t> hit;
      for (std::size_t s = 0; s < segments_.size(); ++s) {
        if (segments_[s].alive && encroaches(c, segments_[s]) && splittable(s)) hit.push_back(s);
      }
      if (hit.empty() && !inside_domain(c)) {
        const std::size_t s = nearest_segment(c);
        if (splittable(s)) hit.push_back(s);
      }
      if (!hit.empty()) {
        for (std::size_t s : hit) split(s);
        tri_queue_.push_back(t);
        continue;
      }
      if (!inside_domain(c)) continue;  // bounded by unsplittable tiny segments
      insert(c);
    }
  }

  TriMesh extract() const {
    for (const Segment& s : segments_) {
      if (s.alive && !dt_.has_edge(s.a, s.b)) {
        throw MeshError("boundary segment " + point_text(dt_.vertex(s.a)) + "-" +
                        point_text(dt_.vertex(s.b)) + " missing after refinement");
      }
    }
    TriMesh mesh;
    std::vector<int> remap(dt_.vertices().size(), -1);
    for (std::size_t t = 0; t < dt_.triangles().size(); ++t) {
      if (!dt_.triangles()[t].alive || !inside(static_cast<int>(t))) continue;
      std::array<int, 3> el{};
      for (int k = 0; k < 3; ++k) {
        const int v = dt_.triangles()[t].v[at(k)];
        if (remap[at(v)] < 0) {
          remap[at(v)] = static_cast<int>(mesh.nodes.size());
          mesh.nodes.push_back(dt_.vertex(v));
        }
        el[at(k)] = remap[at(v)];
      }
      mesh.elements.push_back(el);
    }
    if (mesh.elements.empty()) throw MeshError("triangulation produced no interior elements");
    return mesh;
  }

 private:
  static Vec2 bbox_lo(const PlanarDomain& d) {
    Vec2 lo = d.outer_loop.front();
    for (const Vec2& p : d.outer_loop) lo = lo.cwiseMin(p);
    return lo;
  }
  static Vec2 bbox_hi(const PlanarDomain& d) {
    Vec2 hi = d.outer_loop.front();
    for (const Vec2& p : d.outer_loop) hi = hi.cwiseMax(p);
    return hi;
  }

  int insert(const Vec2& p) {
    if (dt_.vertices().size() >= max_vertices_) {
      throw MeshError("refinement did not converge (vertex budget exhausted near " +
                      point_text(p) + ")");
    }
    const std::size_t before = dt_.triangles().size();
    const std::size_t nverts = dt_.vertices().size();
    const int id = dt_.insert(p);
    inside_cache_.resize(dt_.triangles().size(), -1);
    for (std::size_t t = before; t < dt_.triangles().size(); ++t) tri_queue_.push_back(static_cast<int>(t));
    if (dt_.vertices().size() > nverts) {
      for (std::size_t s = 0; s < segments_.size(); ++s) {
        if (segments_[s].alive && encroaches(p, segments_[s])) seg_queue_.push_back(s);
      }
    }
    return id;
  }

  bool encroaches(const Vec2& p, const Segment& s) const {
    const Vec2& a = dt_.vertex(s.a);
    const Vec2& b = dt_.vertex(s.b);
    if (p == a || p == b) return false;
    return (a - p).dot(b - p) < 0.0;
  }

  bool splittable(std::size_t s) const {
    const Segment& seg = segments_[s];
    return (dt_.vertex(seg.a) - dt_.vertex(seg.b)).norm() >= 2.0 * opt_.min_edge;
  }

  bool still_encroached(std::size_t s) const {
    const Segment& seg = segments_[s];
    if (!dt_.has_edge(seg.a, seg.b)) return true;
    for (int apex : dt_.edge_apexes(seg.a, seg.b)) {
      if (apex >= 0 && !dt_.is_super(apex) && encroaches(dt_.vertex(apex), seg)) return true;
    }
    return false;
  }

  void split(std::size_t s) {
    const Segment seg = segments_[s];
    segments_[s].alive = false;
    const Vec2 mid = 0.5 * (dt_.vertex(seg.a) + dt_.vertex(seg.b));
    const int m = insert(mid);
    const std::size_t first = segments_.size();
    segments_.push_back({seg.a, m});
    segments_.push_back({m, seg.b});
    seg_queue_.push_back(first);
    seg_queue_.push_back(first + 1);
  }

  void split_encroached() {
    while (!seg_queue_.empty()) {
      const std::size_t s = seg_queue_.front();
      seg_queue_.pop_front();
      if (!segments_[s].alive) continue;
      if (!still_encroached(s)) continue;
      if (!splittable(s)) {
        if (!dt_.has_edge(segments_[s].a, segments_[s].b)) {
          throw MeshError("cannot recover boundary segment " + point_text(dt_.vertex(segments_[s].a)) +
                          "-" + point_text(dt_.vertex(segments_[s].b)) + " (below minimum edge)");
        }
        continue;
      }
      split(s);
    }
  }

  bool inside_domain(const Vec2& p) const {
    if (!point_in_loop(p, domain_.outer_loop)) return false;
    for (const Loop& h : domain_.hole_loops) {
      if (point_in_loop(p, h)) return false;
    }
    return true;
  }

  bool inside(int t) const {
    signed char& cached = inside_cache_[at(t)];
    if (cached < 0) {
      const auto& tr = dt_.tri(t);
      bool in = !dt_.is_super(tr.v[0]) && !dt_.is_super(tr.v[1]) && !dt_.is_super(tr.v[2]);
      if (in) {
        const Vec2 c = (dt_.vertex(tr.v[0]) + dt_.vertex(tr.v[1]) + dt_.vertex(tr.v[2])) / 3.0;
        in = inside_domain(c);
      }
      cached = in ? 1 : 0;
    }
    return cached == 1;
  }

  bool is_bad(int t) const {
    const auto& tr = dt_.tri(t);
    const Vec2& a = dt_.vertex(tr.v[0]);
    const Vec2& b = dt_.vertex(tr.v[1]);
    const Vec2& c = dt_.vertex(tr.v[2]);
    const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    const double shortest = std::min({la, lb, lc});
    const double longest = std::max({la, lb, lc});
    const double area = 0.5 * std::abs(cross(a, b, c));
    if (area > max_area_ || longest > max_edge_) return true;
    const double radius = la * lb * lc / (4.0 * area);
    return shortest < min_ratio_ * radius;
  }

  std::size_t nearest_segment(const Vec2& p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      if (!segments_[s].alive) continue;
      const double d = point_segment_distance(p, dt_.vertex(segments_[s].a), dt_.vertex(segments_[s].b));
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    return best;
  }

  const PlanarDomain& domain_;
  MeshOptions opt_;
  detail::Triangulation dt_;
  std::vector<Segment> segments_;
  std::deque<std::size_t> seg_queue_;
  std::deque<int> tri_queue_;
  mutable std::vector<signed char> inside_cache_ = std::vector<signed char>(1, -1);
  double max_area_ = 0.0;
  double max_edge_ = 0.0;
  double min_ratio_ = 0.0;
  std::size_t max_vertices_ = 0;
};

}  // namespace

Eigen::Matrix<double, 3, 2> TriMesh::element_coords(std::size_t e) const {
  Eigen::Matrix<double, 3, 2> xy;
  for (int k = 0; k < 3; ++k) xy.row(k) = nodes[at(elements[e][at(k)])].transpose();
  return xy;
}

Vec2 TriMesh::centroid(std::size_t e) const {
  const auto& el = elements[e];
  return (nodes[at(el[0])] + nodes[at(el[1])] + nodes[at(el[2])]) / 3.0;
}

double TriMesh::element_area(std::size_t e) const {
  const auto& el = elements[e];
  return 0.5 * cross(nodes[at(el[0])], nodes[at(el[1])], nodes[at(el[2])]);
}

double TriMesh::area() const {
  double a = 0.0;
  for (std::size_t e = 0; e < elements.size(); ++e) a += element_area(e);
  return a;
}

TriMesh triangulate(const PlanarDomain& domain, const MeshOptions& options) {
  if (!(options.target_size > 0.0)) throw MeshError("target size must be positive");
  check_loop(domain.outer_loop, "outer loop");
  for (std::size_t h = 0; h < domain.hole_loops.size(); ++h) {
    check_loop(domain.hole_loops[h], "hole loop " + std::to_string(h));
  }
  Refiner refiner(domain, options);
  refiner.build();
  refiner.refine();
  return classify_boundary(refiner.extract(), domain);
}

TriMesh triangulate(const PlanarDomain& domain, double target_size) {
  MeshOptions opt;
  opt.target_size = target_size;
  return triangulate(domain, opt);
}

namespace {

std::map<EdgeKey, int> edge_incidence(const TriMesh& mesh) {
  std::map<EdgeKey, int> count;
  for (const auto& el : mesh.elements) {
    for (int k = 0; k < 3; ++k) ++count[make_edge(el[at(k)], el[at((k + 1) % 3)])];
  }
  return count;
}

}  // namespace

std::vector<EdgeKey> boundary_edges(const TriMesh& mesh) {
  std::vector<EdgeKey> out;
  for (const auto& [e, n] : edge_incidence(mesh)) {
    if (n == 1) out.push_back(e);
  }
  return out;
}

std::vector<EdgeKey> interior_edges(const TriMesh& mesh) {
  std::vector<EdgeKey> out;
  for (const auto& [e, n] : edge_incidence(mesh)) {
    if (n == 2) out.push_back(e);
  }
  return out;
}

TriMesh classify_boundary(TriMesh mesh, const PlanarDomain& domain) {
  Vec2 lo = domain.outer_loop.front(), hi = lo;
  for (const Vec2& p : domain.outer_loop) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double tol = 1e-9 * std::max(1.0, (hi - lo).norm());

  auto on_loop = [tol](const Vec2& p, const Loop& loop) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]) <= tol) return true;
    }
    return false;
  };
  auto on_any_loop = [&](const Vec2& p) {
    if (on_loop(p, domain.outer_loop)) return true;
    return std::any_of(domain.hole_loops.begin(), domain.hole_loops.end(),
                       [&](const Loop& h) { return on_loop(p, h); });
  };
  auto on_fixture = [&](const Vec2& p) {
    return point_segment_distance(p, domain.fixture_start, domain.fixture_end) <= tol;
  };

  mesh.edge_tags.clear();
  for (const EdgeKey& e : boundary_edges(mesh)) {
    const Vec2& a = mesh.nodes[at(e.first)];
    const Vec2& b = mesh.nodes[at(e.second)];
    const Vec2 mid = 0.5 * (a + b);
    if (on_fixture(a) && on_fixture(b) && on_fixture(mid)) {
      mesh.edge_tags[e] = EdgeTag::Fixture;
    } else if (on_any_loop(a) && on_any_loop(b) && on_any_loop(mid)) {
      mesh.edge_tags[e] = EdgeTag::Contour;
    } else {
      throw MeshError("untagged boundary edge " + point_text(a) + "-" + point_text(b) +
                      ": mesh does not conform to the domain");
    }
  }

  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const double d = (mesh.nodes[i] - domain.load_anchor).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  mesh.load_node = best;
  return mesh;
}

QualityReport mesh_quality(const TriMesh& mesh) {
  QualityReport q;
  q.element_count = mesh.elements.size();
  q.node_count = mesh.nodes.size();
  q.min_angle_deg = std::numeric_limits<double>::infinity();
  q.min_edge = std::numeric_limits<double>::infinity();
  q.min_signed_area = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    const Vec2& a = mesh.nodes[at(el[0])];
    const Vec2& b = mesh.nodes[at(el[1])];
    const Vec2& c = mesh.nodes[at(el[2])];
    const Eigen::Vector3d ang = triangle_angles(a, b, c) * (180.0 / std::numbers::pi);
    q.min_angle_deg = std::min(q.min_angle_deg, ang.minCoeff());
    q.max_angle_deg = std::max(q.max_angle_deg, ang.maxCoeff());
    for (double len : {(b - a).norm(), (c - b).norm(), (a - c).norm()}) {
      q.min_edge = std::min(q.min_edge, len);
      q.max_edge = std::max(q.max_edge, len);
    }
    const double area = mesh.element_area(e);
    q.min_signed_area = std::min(q.min_signed_area, area);
    q.total_area += area;
  }
  if (mesh.elements.empty()) {
    q.min_angle_deg = q.min_edge = q.min_signed_area = 0.0;
  }
  return q;
}

}  // namespace femgraph
