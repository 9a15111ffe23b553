#pragma once

#include <Eigen/Core>

namespace femgraph::predicates {

// Sign-exact geometric predicates. A floating-point filter answers the easy
// cases; uncertain cases fall back to exact expansion arithmetic.

// > 0 if (a, b, c) is counter-clockwise, < 0 if clockwise, 0 if collinear.
double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                const Eigen::Vector2d& c);

// > 0 if d lies strictly inside the circle through counter-clockwise (a, b, c),
// < 0 if outside, 0 if cocircular.
double incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                const Eigen::Vector2d& c, const Eigen::Vector2d& d);

}  // namespace femgraph::predicates
