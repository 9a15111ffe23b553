#include "delaunay.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "femgraph/error.hpp"
#include "femgraph/predicates.hpp"

namespace femgraph::detail {
namespace {

int index_of(const Triangulation::Tri& t, int v) {
  for (int i = 0; i < 3; ++i) {
    if (t.v[static_cast<std::size_t>(i)] == v) return i;
  }
  return -1;
}

std::size_t at(int i) { return static_cast<std::size_t>(i); }

}  // namespace

Triangulation::Triangulation(const Vec2& lo, const Vec2& hi) {
  const Vec2 c = 0.5 * (lo + hi);
  const double r = std::max(1.0, (hi - lo).norm()) * 1e3;
  verts_ = {c + Vec2(-2.0 * r, -r), c + Vec2(2.0 * r, -r), c + Vec2(0.0, 2.0 * r)};
  tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}, true});
  vertex_tri_ = {0, 0, 0};
}

bool Triangulation::contains(int t, const Vec2& p) const {
  const Tri& tr = tris_[at(t)];
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = verts_[at(tr.v[at((i + 1) % 3)])];
    const Vec2& b = verts_[at(tr.v[at((i + 2) % 3)])];
    if (predicates::orient2d(a, b, p) < 0.0) return false;
  }
  return true;
}

int Triangulation::locate(const Vec2& p) const {
  int t = tris_[at(last_)].alive ? last_ : -1;
  if (t < 0) {
    for (std::size_t i = tris_.size(); i-- > 0;) {
      if (tris_[i].alive) {
        t = static_cast<int>(i);
        break;
      }
    }
  }
  // Visibility walk; Delaunay triangulations guarantee it terminates, the
  // step cap only guards against misuse.
  const std::size_t cap = 4 * tris_.size() + 16;
  for (std::size_t step = 0; step < cap; ++step) {
    const Tri& tr = tris_[at(t)];
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = (k + static_cast<int>(step)) % 3;
      const Vec2& a = verts_[at(tr.v[at((i + 1) % 3)])];
      const Vec2& b = verts_[at(tr.v[at((i + 2) % 3)])];
      if (predicates::orient2d(a, b, p) < 0.0) {
        next = tr.nbr[at(i)];
        break;
      }
    }
    if (next < 0) return t;
    t = next;
  }
  for (std::size_t i = 0; i < tris_.size(); ++i) {
    if (tris_[i].alive && contains(static_cast<int>(i), p)) return static_cast<int>(i);
  }
  throw MeshError("point location failed");
}

int Triangulation::insert(const Vec2& p) {
  const int t0 = locate(p);
  for (int v : tris_[at(t0)].v) {
    if (verts_[at(v)] == p) return v;
  }

  const int pid = static_cast<int>(verts_.size());
  verts_.push_back(p);

  std::vector<char> in_cavity(tris_.size(), 0);
  std::vector<int> cavity{t0};
  in_cavity[at(t0)] = 1;
  for (std::size_t k = 0; k < cavity.size(); ++k) {
    for (int n : tris_[at(cavity[k])].nbr) {
      if (n < 0 || in_cavity[at(n)]) continue;
      const Tri& nt = tris_[at(n)];
      if (predicates::incircle(verts_[at(nt.v[0])], verts_[at(nt.v[1])], verts_[at(nt.v[2])], p) >
          0.0) {
        in_cavity[at(n)] = 1;
        cavity.push_back(n);
      }
    }
  }

  struct Boundary {
    int a, b, outside;
  };
  std::vector<Boundary> boundary;
  // Grow the cavity until it is star-shaped from p.
  for (bool repaired = true; repaired;) {
    repaired = false;
    boundary.clear();
    for (int t : cavity) {
      const Tri& tr = tris_[at(t)];
      for (int i = 0; i < 3; ++i) {
        const int n = tr.nbr[at(i)];
        if (n >= 0 && in_cavity[at(n)]) continue;
        const int a = tr.v[at((i + 1) % 3)];
        const int b = tr.v[at((i + 2) % 3)];
        if (predicates::orient2d(verts_[at(a)], verts_[at(b)], p) <= 0.0) {
          if (n < 0) throw MeshError("inserted point outside the enclosing triangle");
          in_cavity[at(n)] = 1;
          cavity.push_back(n);
          repaired = true;
          break;
        }
        boundary.push_back({a, b, n});
      }
      if (repaired) break;
    }
  }

  for (int t : cavity) tris_[at(t)].alive = false;

  const int first = static_cast<int>(tris_.size());
  std::unordered_map<int, int> starting_at;
  starting_at.reserve(boundary.size() * 2);
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const Boundary& e = boundary[k];
    const int id = first + static_cast<int>(k);
    tris_.push_back(Tri{{e.a, e.b, pid}, {-1, -1, e.outside}, true});
    starting_at[e.a] = id;
    if (e.outside >= 0) {
      Tri& out = tris_[at(e.outside)];
      for (int i = 0; i < 3; ++i) {
        const int oa = out.v[at((i + 1) % 3)];
        const int ob = out.v[at((i + 2) % 3)];
        if (oa == e.b && ob == e.a) out.nbr[at(i)] = id;
      }
    }
  }
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    Tri& tr = tris_[at(first + static_cast<int>(k))];
    tr.nbr[0] = starting_at.at(tr.v[1]);  // edge (b, p)
    // edge (p, a): the new triangle ending at a
    for (std::size_t m = 0; m < boundary.size(); ++m) {
      if (boundary[m].b == tr.v[0]) {
        tr.nbr[1] = first + static_cast<int>(m);
        break;
      }
    }
    vertex_tri_[at(tr.v[0])] = first + static_cast<int>(k);
    vertex_tri_[at(tr.v[1])] = first + static_cast<int>(k);
  }
  vertex_tri_.push_back(first);
  last_ = first;
  return pid;
}

bool Triangulation::has_edge(int a, int b) const {
  if (a == b) return false;
  const int start = vertex_tri_[at(a)];
  // Rotate around a in both directions until the fan closes or hits the hull.
  for (int dir = 1; dir <= 2; ++dir) {
    int t = start;
    do {
      const Tri& tr = tris_[at(t)];
      const int i = index_of(tr, a);
      if (tr.v[at((i + 1) % 3)] == b || tr.v[at((i + 2) % 3)] == b) return true;
      t = tr.nbr[at((i + dir) % 3)];
    } while (t >= 0 && t != start);
    if (t == start) return false;
  }
  return false;
}

std::array<int, 2> Triangulation::edge_apexes(int a, int b) const {
  std::array<int, 2> out{-1, -1};
  const int start = vertex_tri_[at(a)];
  for (int dir = 1; dir <= 2; ++dir) {
    int t = start;
    do {
      const Tri& tr = tris_[at(t)];
      const int i = index_of(tr, a);
      const int j = index_of(tr, b);
      if (j >= 0) {
        const int apex = tr.v[at(3 - i - j)];
        if (out[0] < 0) {
          out[0] = apex;
        } else if (out[0] != apex) {
          out[1] = apex;
          return out;
        }
      }
      t = tr.nbr[at((i + dir) % 3)];
    } while (t >= 0 && t != start);
    if (t == start) break;
  }
  return out;
}

}  // namespace femgraph::detail
