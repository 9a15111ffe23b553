#include "femgraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "femgraph/predicates.hpp"

namespace femgraph {

double signed_area(std::span<const Vec2> loop) {
  const std::size_t n = loop.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = loop[i];
    const Vec2& q = loop[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool point_in_loop(const Vec2& p, std::span<const Vec2> loop) {
  bool inside = false;
  const std::size_t n = loop.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double loop_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  double best = std::numeric_limits<double>::infinity();
  auto scan = [&best](std::span<const Vec2> pts, std::span<const Vec2> loop) {
    const std::size_t n = loop.size();
    for (const Vec2& p : pts) {
      for (std::size_t i = 0; i < n; ++i) {
        best = std::min(best, point_segment_distance(p, loop[i], loop[(i + 1) % n]));
      }
    }
  };
  scan(a, b);
  scan(b, a);
  return best;
}

namespace {

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  const int o1 = sgn(predicates::orient2d(a, b, c));
  const int o2 = sgn(predicates::orient2d(a, b, d));
  const int o3 = sgn(predicates::orient2d(c, d, a));
  const int o4 = sgn(predicates::orient2d(c, d, b));
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  if (o4 == 0 && on_segment(b, c, d)) return true;
  return false;
}

int first_self_intersection(std::span<const Vec2> loop) {
  const std::size_t n = loop.size();
  if (n < 3) return 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[(i + 1) % n];
    if (a == b) return static_cast<int>(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent segments may only share their common vertex: reject
        // folded-back (collinear overlapping) pairs.
        const std::size_t shared = (j == i + 1) ? j : i;
        const Vec2& s = loop[shared];
        const Vec2& u = loop[(shared + n - 1) % n];
        const Vec2& v = loop[(shared + 1) % n];
        if (predicates::orient2d(u, s, v) == 0.0 && (u - s).dot(v - s) > 0.0) {
          return static_cast<int>(i);
        }
        continue;
      }
      if (segments_intersect(a, b, loop[j], loop[(j + 1) % n])) {
        return static_cast<int>(i);
      }
    }
  }
  return -1;
}

bool loops_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j],
                             b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  return false;
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  const double ab2 = ab.squaredNorm();
  const double ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

Eigen::Vector3d triangle_angles(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p;
    const Vec2 v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return {angle(a, b, c), angle(b, c, a), angle(c, a, b)};
}

}  // namespace femgraph
