#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace femgraph {

using Vec2 = Eigen::Vector2d;
using Loop = std::vector<Vec2>;

// Shoelace area; positive for counter-clockwise loops.
double signed_area(std::span<const Vec2> loop);

// Twice the signed area of triangle (a, b, c).
inline double cross(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Even-odd rule. Points exactly on the boundary may go either way.
bool point_in_loop(const Vec2& p, std::span<const Vec2> loop);

// Minimum distance from any point of one closed polyline to the other.
// Assumes the loops do not intersect.
double loop_distance(std::span<const Vec2> a, std::span<const Vec2> b);

// True if closed segments [a, b] and [c, d] share a point.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d);

// Returns the index of the first segment of `loop` that intersects a
// non-adjacent segment, or -1 when the loop is simple.
int first_self_intersection(std::span<const Vec2> loop);

bool loops_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c);

// Interior angles in radians, ordered as the vertices.
Eigen::Vector3d triangle_angles(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace femgraph
