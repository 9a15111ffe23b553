#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "femgraph/geometry.hpp"

namespace femgraph {

enum class HoleKind { Circle, Ellipse, Rectangle, Slot };
enum class Profile { Prismatic, Tapered, Stepped };

// Circle: rx is the radius (ry == rx). Ellipse: semi-axes. Rectangle:
// half-extents. Slot: rx is the half-length of the straight part, ry the cap
// radius, so the slot spans [cx - rx - ry, cx + rx + ry] horizontally.
struct HoleSpec {
  HoleKind kind = HoleKind::Circle;
  Vec2 center = Vec2::Zero();
  double rx = 0.0;
  double ry = 0.0;
};

struct LoadSpec {
  double anchor_fraction = 0.5;  // along the right edge, from the bottom
  double magnitude = 0.0;        // N
  double angle = 0.0;            // radians, multiple of pi/6

  Vec2 vector() const;
};

struct BeamDesign {
  int family = 1;
  double width = 0.0;       // mm
  double height = 0.0;      // mm, at the fixed (left) edge
  double tip_height = 0.0;  // mm, right edge; equals height for prismatic beams
  double step_x = 0.0;      // mm, where a stepped beam drops to tip_height
  std::optional<HoleSpec> hole;
  LoadSpec load;
  std::uint64_t seed = 0;
};

struct FamilySpec {
  Profile profile;
  std::optional<HoleKind> hole;
  const char* name;
};

inline constexpr int kFamilyCount = 9;

// Throws DesignError for ids outside 1..9.
const FamilySpec& family_spec(int family);

struct Range {
  double min = 0.0;
  double max = 0.0;
  double step = 0.1;
};

// Sampling ranges keyed by parameter name, with optional per-family
// overrides written as "<family>.<key>" in the config text.
//
// Keys: width, height, tip_height, step_x, hole_rx, hole_ry, load_magnitude.
class ParamRanges {
 public:
  static ParamRanges defaults();
  // Plain text: one "key = min max step" per line, '#' starts a comment.
  // Unknown keys and malformed ranges raise ConfigError.
  static ParamRanges parse(std::istream& in);
  static ParamRanges load(const std::string& path);

  // `key` may carry a "<family>." prefix; `value` is "min max step".
  void apply(const std::string& key, const std::string& value);
  static bool is_range_key(const std::string& key);

  const Range& get(int family, const std::string& key) const;
  void set(const std::string& key, Range r, int family = 0);
  nlohmann::json to_json() const;

 private:
  std::map<std::string, Range> global_;
  std::map<int, std::map<std::string, Range>> per_family_;
};

struct PlanarDomain {
  Loop outer_loop;               // counter-clockwise
  std::vector<Loop> hole_loops;  // clockwise
  Vec2 fixture_start = Vec2::Zero();
  Vec2 fixture_end = Vec2::Zero();
  Vec2 load_anchor = Vec2::Zero();

  double area() const;
};

inline constexpr double kMinWall = 1.0;        // mm
inline constexpr double kChordTolerance = 0.05;  // mm
inline constexpr int kHoleAttempts = 1000;

// Deterministic in (family, seed, ranges). Throws DesignError when no
// valid hole placement is found within kHoleAttempts draws.
BeamDesign sample_design(int family, std::uint64_t seed,
                         const ParamRanges& ranges = ParamRanges::defaults());

// Throws DesignError describing the first violated invariant.
void validate_design(const BeamDesign& design);

// Smallest distance between the exact hole boundary and the outer contour,
// evaluated on a dense sampling of the hole curve. Negative if the hole
// leaves the outer contour; +inf without a hole.
double wall_thickness(const BeamDesign& design);

Loop outer_contour(const BeamDesign& design);

// Point on the exact hole boundary at parameter t in [0, 1).
Vec2 hole_point(const HoleSpec& hole, double t);

PlanarDomain design_to_polygon(const BeamDesign& design);

// Throws DesignError if loops are non-simple, holes leave the outer loop,
// or a wall is thinner than kMinWall.
void validate_domain(const PlanarDomain& domain);

nlohmann::json to_json(const BeamDesign& design);
BeamDesign design_from_json(const nlohmann::json& j);

}  // namespace femgraph
