#include "femgraph/beamgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "femgraph/error.hpp"
#include "femgraph/seed.hpp"

namespace femgraph {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kWallSamples = 8192;
constexpr int kAngleSteps = 12;

const std::array<FamilySpec, kFamilyCount> kFamilies = {{
    {Profile::Prismatic, std::nullopt, "rectangle"},
    {Profile::Prismatic, HoleKind::Circle, "rectangle-circle-hole"},
    {Profile::Prismatic, HoleKind::Ellipse, "rectangle-ellipse-hole"},
    {Profile::Prismatic, HoleKind::Rectangle, "rectangle-rect-hole"},
    {Profile::Prismatic, HoleKind::Slot, "rectangle-slot-hole"},
    {Profile::Tapered, std::nullopt, "tapered"},
    {Profile::Tapered, HoleKind::Circle, "tapered-circle-hole"},
    {Profile::Stepped, std::nullopt, "stepped"},
    {Profile::Stepped, HoleKind::Circle, "stepped-circle-hole"},
}};

const std::array<const char*, 7> kRangeKeys = {
    "width", "height", "tip_height", "step_x", "hole_rx", "hole_ry", "load_magnitude"};

bool is_known_key(const std::string& key) {
  return std::find(kRangeKeys.begin(), kRangeKeys.end(), key) != kRangeKeys.end();
}

double snap_tenth(double v) { return std::round(v * 10.0) / 10.0; }

bool on_tenth_grid(double v) {
  return std::abs(v * 10.0 - std::round(v * 10.0)) < 1e-6;
}

class GridSampler {
 public:
  explicit GridSampler(std::uint64_t seed) : rng_(seed) {}

  // Uniform over {lo, lo + step, ..., <= hi}; values snapped to the 0.1 grid.
  double draw(double lo, double hi, double step) {
    if (hi < lo - 1e-9) throw DesignError("empty sampling interval");
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    return snap_tenth(lo + static_cast<double>(bounded(static_cast<std::uint64_t>(n) + 1)) * step);
  }
  double draw(const Range& r) { return draw(r.min, r.max, r.step); }

  int draw_index(int count) { return static_cast<int>(bounded(static_cast<std::uint64_t>(count))); }

 private:
  // Uniform in [0, n) by rejection; identical across standard libraries.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = rng_();
    while (x >= limit) x = rng_();
    return x % n;
  }

  std::mt19937_64 rng_;
};

Vec2 polyline_point(std::span<const Vec2> corners, double t) {
  const std::size_t n = corners.size();
  double perimeter = 0.0;
  for (std::size_t i = 0; i < n; ++i) perimeter += (corners[(i + 1) % n] - corners[i]).norm();
  double s = t * perimeter;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = corners[i];
    const Vec2& b = corners[(i + 1) % n];
    const double len = (b - a).norm();
    if (s <= len || i + 1 == n) return a + (b - a) * std::min(1.0, s / len);
    s -= len;
  }
  return corners.front();
}

int circle_segments(double radius, double arc) {
  const double step = std::acos(1.0 - kChordTolerance / radius);
  return std::max(2, static_cast<int>(std::ceil(arc / (2.0 * step))));
}

void append_arc(Loop& loop, const Vec2& c, double r, double from, double to, int n,
                bool include_last) {
  const int last = include_last ? n : n - 1;
  for (int k = 0; k <= last; ++k) {
    const double a = from + (to - from) * k / n;
    loop.emplace_back(c.x() + r * std::cos(a), c.y() + r * std::sin(a));
  }
}

double max_sagitta(const HoleSpec& hole, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = hole_point(hole, static_cast<double>(i) / n);
    const Vec2 b = hole_point(hole, static_cast<double>(i + 1) / n);
    for (int s = 1; s < 8; ++s) {
      const Vec2 p = hole_point(hole, (i + s / 8.0) / n);
      worst = std::max(worst, point_segment_distance(p, a, b));
    }
  }
  return worst;
}

Loop hole_polygon_ccw(const HoleSpec& hole) {
  Loop loop;
  const Vec2& c = hole.center;
  switch (hole.kind) {
    case HoleKind::Circle: {
      const int n = std::max(8, circle_segments(hole.rx, 2.0 * kPi));
      append_arc(loop, c, hole.rx, 0.0, 2.0 * kPi, n, false);
      break;
    }
    case HoleKind::Ellipse: {
      int n = std::max(8, circle_segments(std::max(hole.rx, hole.ry), 2.0 * kPi));
      while (max_sagitta(hole, n) > kChordTolerance) n = n + n / 5 + 1;
      for (int i = 0; i < n; ++i) loop.push_back(hole_point(hole, static_cast<double>(i) / n));
      break;
    }
    case HoleKind::Rectangle:
      loop = {c + Vec2(hole.rx, -hole.ry), c + Vec2(hole.rx, hole.ry),
              c + Vec2(-hole.rx, hole.ry), c + Vec2(-hole.rx, -hole.ry)};
      break;
    case HoleKind::Slot: {
      const int n = std::max(4, circle_segments(hole.ry, kPi));
      append_arc(loop, c + Vec2(hole.rx, 0.0), hole.ry, -kPi / 2, kPi / 2, n, true);
      append_arc(loop, c - Vec2(hole.rx, 0.0), hole.ry, kPi / 2, 3 * kPi / 2, n, true);
      break;
    }
  }
  return loop;
}

Vec2 hole_half_extent(const HoleSpec& hole) {
  if (hole.kind == HoleKind::Slot) return {hole.rx + hole.ry, hole.ry};
  return {hole.rx, hole.ry};
}

HoleSpec draw_hole(GridSampler& rng, HoleKind kind, const BeamDesign& d,
                   const ParamRanges& ranges) {
  HoleSpec h;
  h.kind = kind;
  h.rx = rng.draw(ranges.get(d.family, "hole_rx"));
  h.ry = kind == HoleKind::Circle ? h.rx : rng.draw(ranges.get(d.family, "hole_ry"));
  h.center = Vec2(rng.draw(0.1, d.width - 0.1, 0.1), rng.draw(0.1, d.height - 0.1, 0.1));
  return h;
}

std::string range_text(const Range& r) {
  std::ostringstream os;
  os << r.min << ' ' << r.max << ' ' << r.step;
  return os.str();
}

}  // namespace

Vec2 LoadSpec::vector() const {
  return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

const FamilySpec& family_spec(int family) {
  if (family < 1 || family > kFamilyCount) {
    throw DesignError("family id " + std::to_string(family) + " outside 1..9");
  }
  return kFamilies[static_cast<std::size_t>(family - 1)];
}

ParamRanges ParamRanges::defaults() {
  ParamRanges r;
  r.set("width", {20.0, 44.0, 0.1});
  r.set("height", {8.0, 20.0, 0.1});
  r.set("tip_height", {4.0, 14.0, 0.1});
  r.set("step_x", {8.0, 34.0, 0.1});
  r.set("hole_rx", {1.5, 5.0, 0.1});
  r.set("hole_ry", {1.5, 5.0, 0.1});
  r.set("load_magnitude", {100.0, 1000.0, 100.0});
  return r;
}

void ParamRanges::set(const std::string& key, Range r, int family) {
  if (!is_known_key(key)) throw ConfigError("unknown range key '" + key + "'");
  if (!(r.step > 0.0) || r.max < r.min) {
    throw ConfigError("malformed range for '" + key + "': " + range_text(r));
  }
  if (key == "load_magnitude") {
    const bool ok = std::fmod(r.min, 100.0) == 0.0 && std::fmod(r.step, 100.0) == 0.0 &&
                    r.min >= 100.0 && r.max <= 1000.0;
    if (!ok) throw ConfigError("load_magnitude must stay on the 100 N grid within [100, 1000]");
  } else if (!on_tenth_grid(r.min) || !on_tenth_grid(r.max) || !on_tenth_grid(r.step) ||
             r.min <= 0.0) {
    throw ConfigError("range for '" + key + "' must use positive multiples of 0.1 mm");
  }
  if (family == 0) {
    global_[key] = r;
  } else {
    family_spec(family);
    per_family_[family][key] = r;
  }
}

const Range& ParamRanges::get(int family, const std::string& key) const {
  if (auto f = per_family_.find(family); f != per_family_.end()) {
    if (auto it = f->second.find(key); it != f->second.end()) return it->second;
  }
  if (auto it = global_.find(key); it != global_.end()) return it->second;
  throw ConfigError("no range configured for '" + key + "'");
}

ParamRanges ParamRanges::parse(std::istream& in) {
  ParamRanges r = defaults();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = min max step'");
      }
      continue;
    }
    try {
      r.apply(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return r;
}

bool ParamRanges::is_range_key(const std::string& key) {
  const auto dot = key.find('.');
  return is_known_key(dot == std::string::npos ? key : key.substr(dot + 1));
}

void ParamRanges::apply(const std::string& key_text, const std::string& value_text) {
  std::istringstream key_in(key_text);
  std::string key;
  key_in >> key;
  int family = 0;
  if (auto dot = key.find('.'); dot != std::string::npos) {
    try {
      family = std::stoi(key.substr(0, dot));
    } catch (const std::exception&) {
      throw ConfigError("bad family prefix in '" + key + "'");
    }
    key = key.substr(dot + 1);
  }
  std::istringstream values(value_text);
  Range range;
  std::string extra;
  if (!(values >> range.min >> range.max >> range.step) || (values >> extra)) {
    throw ConfigError("'" + key + "' expects three numbers: min max step");
  }
  try {
    set(key, range, family);
  } catch (const DesignError& e) {
    throw ConfigError(e.what());
  }
}

ParamRanges ParamRanges::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ranges file '" + path + "'");
  return parse(in);
}

nlohmann::json ParamRanges::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, r] : global_) j[k] = {r.min, r.max, r.step};
  for (const auto& [f, m] : per_family_) {
    for (const auto& [k, r] : m) j[std::to_string(f) + "." + k] = {r.min, r.max, r.step};
  }
  return j;
}

double PlanarDomain::area() const {
  double a = signed_area(outer_loop);
  for (const Loop& h : hole_loops) a += signed_area(h);
  return a;
}

Loop outer_contour(const BeamDesign& d) {
  const double w = d.width, h = d.height, t = d.tip_height;
  switch (family_spec(d.family).profile) {
    case Profile::Prismatic:
      return {Vec2(0, 0), Vec2(w, 0), Vec2(w, h), Vec2(0, h)};
    case Profile::Tapered:
      return {Vec2(0, 0), Vec2(w, 0), Vec2(w, t), Vec2(0, h)};
    case Profile::Stepped:
      return {Vec2(0, 0), Vec2(w, 0), Vec2(w, t), Vec2(d.step_x, t), Vec2(d.step_x, h),
              Vec2(0, h)};
  }
  return {};
}

Vec2 hole_point(const HoleSpec& hole, double t) {
  const Vec2& c = hole.center;
  const double a = 2.0 * kPi * t;
  switch (hole.kind) {
    case HoleKind::Circle:
    case HoleKind::Ellipse:
      return {c.x() + hole.rx * std::cos(a), c.y() + hole.ry * std::sin(a)};
    case HoleKind::Rectangle: {
      const std::array<Vec2, 5> corners = {
          c + Vec2(hole.rx, 0.0), c + Vec2(hole.rx, hole.ry), c + Vec2(-hole.rx, hole.ry),
          c + Vec2(-hole.rx, -hole.ry), c + Vec2(hole.rx, -hole.ry)};
      return polyline_point(corners, t);
    }
    case HoleKind::Slot: {
      const double r = hole.ry, l = 2.0 * hole.rx;
      const double quarter = 0.5 * kPi * r;
      double s = t * (2.0 * l + 2.0 * kPi * r);
      const Vec2 right = c + Vec2(hole.rx, 0.0), left = c - Vec2(hole.rx, 0.0);
      if (s < quarter) return right + r * Vec2(std::cos(s / r), std::sin(s / r));
      s -= quarter;
      if (s < l) return Vec2(right.x() - s, c.y() + r);
      s -= l;
      if (s < 2.0 * quarter) {
        const double phi = kPi / 2 + s / r;
        return left + r * Vec2(std::cos(phi), std::sin(phi));
      }
      s -= 2.0 * quarter;
      if (s < l) return Vec2(left.x() + s, c.y() - r);
      s -= l;
      const double phi = 1.5 * kPi + s / r;
      return right + r * Vec2(std::cos(phi), std::sin(phi));
    }
  }
  return c;
}

double wall_thickness(const BeamDesign& d) {
  if (!d.hole) return std::numeric_limits<double>::infinity();
  const Loop outer = outer_contour(d);
  std::vector<Vec2> samples;
  samples.reserve(kWallSamples + 64);
  for (int i = 0; i < kWallSamples; ++i) {
    samples.push_back(hole_point(*d.hole, static_cast<double>(i) / kWallSamples));
  }
  for (const Vec2& v : hole_polygon_ccw(*d.hole)) samples.push_back(v);

  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : samples) {
    if (!point_in_loop(p, outer)) return -1.0;
    for (std::size_t i = 0; i < outer.size(); ++i) {
      best = std::min(best, point_segment_distance(p, outer[i], outer[(i + 1) % outer.size()]));
    }
  }
  return best;
}

BeamDesign sample_design(int family, std::uint64_t seed, const ParamRanges& ranges) {
  const FamilySpec& spec = family_spec(family);
  GridSampler rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(family))));

  BeamDesign d;
  d.family = family;
  d.seed = seed;
  d.width = rng.draw(ranges.get(family, "width"));
  d.height = rng.draw(ranges.get(family, "height"));
  d.tip_height = d.height;
  if (spec.profile != Profile::Prismatic) {
    const Range& tip = ranges.get(family, "tip_height");
    const double hi = std::min(tip.max, d.height - kMinWall);
    if (hi < tip.min) throw DesignError("tip_height range incompatible with sampled height");
    d.tip_height = rng.draw(tip.min, hi, tip.step);
  }
  if (spec.profile == Profile::Stepped) {
    const Range& sx = ranges.get(family, "step_x");
    const double hi = std::min(sx.max, d.width - 5.0);
    if (hi < sx.min) throw DesignError("step_x range incompatible with sampled width");
    d.step_x = rng.draw(sx.min, hi, sx.step);
  }

  d.load.magnitude = rng.draw(ranges.get(family, "load_magnitude"));
  d.load.angle = rng.draw_index(kAngleSteps) * kPi / 6.0;
  d.load.anchor_fraction = rng.draw(0.0, d.tip_height, 0.1) / d.tip_height;

  if (spec.hole) {
    for (int attempt = 0; attempt < kHoleAttempts; ++attempt) {
      const HoleSpec h = draw_hole(rng, *spec.hole, d, ranges);
      const Vec2 ext = hole_half_extent(h);
      const bool box_ok = h.center.x() - ext.x() >= kMinWall &&
                          h.center.x() + ext.x() <= d.width - kMinWall &&
                          h.center.y() - ext.y() >= kMinWall &&
                          h.center.y() + ext.y() <= d.height - kMinWall;
      if (!box_ok) continue;
      d.hole = h;
      if (wall_thickness(d) >= kMinWall - 1e-9) return d;
      d.hole.reset();
    }
    throw DesignError("no hole placement satisfies the " + std::to_string(kMinWall) +
                      " mm wall rule after " + std::to_string(kHoleAttempts) +
                      " attempts (family " + std::to_string(family) +
                      "); ranges are over-constrained");
  }
  return d;
}

void validate_design(const BeamDesign& d) {
  const FamilySpec& spec = family_spec(d.family);
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw DesignError(what);
  };
  auto length = [&](double v, const char* name) {
    require(v > 0.0 && on_tenth_grid(v),
            std::string(name) + " must be a positive multiple of 0.1 mm");
  };
  length(d.width, "width");
  length(d.height, "height");
  length(d.tip_height, "tip_height");
  require(d.tip_height <= d.height, "tip_height exceeds height");
  if (spec.profile == Profile::Prismatic) require(d.tip_height == d.height, "prismatic beam with taper");
  if (spec.profile == Profile::Stepped) {
    length(d.step_x, "step_x");
    require(d.step_x < d.width, "step_x beyond the free end");
  }
  const double mag = d.load.magnitude;
  require(mag >= 100.0 && mag <= 1000.0 && std::fmod(mag, 100.0) == 0.0,
          "load magnitude must be one of 100, 200, ..., 1000 N");
  const double k = d.load.angle / (kPi / 6.0);
  require(d.load.angle >= 0.0 && d.load.angle < 2.0 * kPi && std::abs(k - std::round(k)) < 1e-9,
          "load angle must be a multiple of pi/6 in [0, 2pi)");
  require(d.load.anchor_fraction >= 0.0 && d.load.anchor_fraction <= 1.0,
          "load anchor must lie on the right edge");
  require(spec.hole.has_value() == d.hole.has_value(), "hole presence does not match family");
  if (d.hole) {
    require(d.hole->kind == *spec.hole, "hole kind does not match family");
    length(d.hole->rx, "hole rx");
    length(d.hole->ry, "hole ry");
    length(d.hole->center.x(), "hole center x");
    length(d.hole->center.y(), "hole center y");
    if (d.hole->kind == HoleKind::Circle) require(d.hole->rx == d.hole->ry, "circle with rx != ry");
    require(wall_thickness(d) >= kMinWall - 1e-9, "wall thinner than 1.0 mm");
  }
}

PlanarDomain design_to_polygon(const BeamDesign& d) {
  validate_design(d);
  PlanarDomain dom;
  dom.outer_loop = outer_contour(d);
  if (d.hole) {
    Loop h = hole_polygon_ccw(*d.hole);
    std::reverse(h.begin(), h.end());
    dom.hole_loops.push_back(std::move(h));
  }
  dom.fixture_start = Vec2(0.0, 0.0);
  dom.fixture_end = Vec2(0.0, d.height);
  dom.load_anchor = Vec2(d.width, d.load.anchor_fraction * d.tip_height);
  return dom;
}

void validate_domain(const PlanarDomain& dom) {
  if (dom.outer_loop.size() < 3) throw DesignError("outer loop has fewer than 3 vertices");
  if (signed_area(dom.outer_loop) <= 0.0) throw DesignError("outer loop is not counter-clockwise");
  if (int s = first_self_intersection(dom.outer_loop); s >= 0) {
    throw DesignError("outer loop self-intersects at segment " + std::to_string(s));
  }
  for (std::size_t h = 0; h < dom.hole_loops.size(); ++h) {
    const Loop& hole = dom.hole_loops[h];
    const std::string tag = "hole loop " + std::to_string(h);
    if (hole.size() < 3) throw DesignError(tag + " has fewer than 3 vertices");
    if (signed_area(hole) >= 0.0) throw DesignError(tag + " is not clockwise");
    if (int s = first_self_intersection(hole); s >= 0) {
      throw DesignError(tag + " self-intersects at segment " + std::to_string(s));
    }
    for (const Vec2& p : hole) {
      if (!point_in_loop(p, dom.outer_loop)) throw DesignError(tag + " leaves the outer loop");
    }
    if (loops_intersect(hole, dom.outer_loop)) throw DesignError(tag + " crosses the outer loop");
    if (loop_distance(hole, dom.outer_loop) < kMinWall - 1e-9) {
      throw DesignError(tag + " leaves a wall thinner than 1.0 mm");
    }
    for (std::size_t o = 0; o < h; ++o) {
      if (loops_intersect(hole, dom.hole_loops[o])) {
        throw DesignError(tag + " intersects hole loop " + std::to_string(o));
      }
    }
  }
  const double xmin = std::min_element(dom.outer_loop.begin(), dom.outer_loop.end(),
                                       [](const Vec2& a, const Vec2& b) { return a.x() < b.x(); })
                          ->x();
  if (dom.fixture_start.x() != xmin || dom.fixture_end.x() != xmin) {
    throw DesignError("fixture segment is not the leftmost edge");
  }
}

nlohmann::json to_json(const BeamDesign& d) {
  nlohmann::json j;
  j["family"] = d.family;
  j["width"] = d.width;
  j["height"] = d.height;
  j["tip_height"] = d.tip_height;
  j["step_x"] = d.step_x;
  if (d.hole) {
    static const char* kinds[] = {"circle", "ellipse", "rectangle", "slot"};
    j["hole"] = {{"kind", kinds[static_cast<int>(d.hole->kind)]},
                 {"center", {d.hole->center.x(), d.hole->center.y()}},
                 {"rx", d.hole->rx},
                 {"ry", d.hole->ry}};
  } else {
    j["hole"] = nullptr;
  }
  j["load"] = {{"anchor_fraction", d.load.anchor_fraction},
               {"magnitude", d.load.magnitude},
               {"angle", d.load.angle}};
  j["seed"] = d.seed;
  return j;
}

BeamDesign design_from_json(const nlohmann::json& j) {
  try {
    BeamDesign d;
    d.family = j.at("family").get<int>();
    d.width = j.at("width").get<double>();
    d.height = j.at("height").get<double>();
    d.tip_height = j.at("tip_height").get<double>();
    d.step_x = j.at("step_x").get<double>();
    if (!j.at("hole").is_null()) {
      const auto& h = j.at("hole");
      const std::string kind = h.at("kind").get<std::string>();
      HoleSpec hs;
      if (kind == "circle") hs.kind = HoleKind::Circle;
      else if (kind == "ellipse") hs.kind = HoleKind::Ellipse;
      else if (kind == "rectangle") hs.kind = HoleKind::Rectangle;
      else if (kind == "slot") hs.kind = HoleKind::Slot;
      else throw DesignError("unknown hole kind '" + kind + "'");
      hs.center = Vec2(h.at("center").at(0).get<double>(), h.at("center").at(1).get<double>());
      hs.rx = h.at("rx").get<double>();
      hs.ry = h.at("ry").get<double>();
      d.hole = hs;
    }
    const auto& l = j.at("load");
    d.load.anchor_fraction = l.at("anchor_fraction").get<double>();
    d.load.magnitude = l.at("magnitude").get<double>();
    d.load.angle = l.at("angle").get<double>();
    d.seed = j.at("seed").get<std::uint64_t>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed design JSON: ") + e.what());
  }
}

}  // namespace femgraph
