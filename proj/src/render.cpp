#include "femgraph/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "femgraph/error.hpp"

namespace femgraph {
namespace {

constexpr std::array<Rgb, 5> kStops{{{0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}}};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace

Rgb color_map(double t) {
  if (std::isnan(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * static_cast<double>(kStops.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(s), kStops.size() - 2);
  const double f = s - static_cast<double>(i);
  Rgb out{};
  for (std::size_t c = 0; c < 3; ++c) {
    const double v = (1.0 - f) * kStops[i][c] + f * kStops[i + 1][c];
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

std::string render_svg(const TriMesh& mesh, std::span<const double> field, const RenderOptions& options) {
  if (field.size() != mesh.elements.size()) {
    throw DataError("field length " + std::to_string(field.size()) + " does not match element count " +
                    std::to_string(mesh.elements.size()));
  }
  if (!(options.pixels_per_mm > 0.0)) throw ConfigError("pixels_per_mm must be positive");
  ColorRange range;
  if (options.range) {
    range = *options.range;
  } else if (!field.empty()) {
    const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
    range = {*lo, *hi};
  }

  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const Vec2& p : mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (mesh.nodes.empty()) lo = hi = Vec2::Zero();
  const double s = options.pixels_per_mm;
  const double margin = 2.0;
  const double width = (hi.x() - lo.x()) * s + 2 * margin;
  const double height = (hi.y() - lo.y()) * s + 2 * margin;
  auto px = [&](const Vec2& p) { return fixed((p.x() - lo.x()) * s + margin) + "," + fixed((hi.y() - p.y()) * s + margin); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
         "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\">\n";
  out += "<desc>range " + fixed(range.min) + " " + fixed(range.max) + "</desc>\n";
  const double span = range.max - range.min;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    const double t = span > 0.0 ? (field[e] - range.min) / span : 0.5;
    const std::string color = hex(color_map(t));
    out += "<polygon points=\"";
    for (int k = 0; k < 3; ++k) {
      if (k) out += ' ';
      out += px(mesh.nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(k)])]);
    }
    out += "\" fill=\"" + color + "\" stroke=\"" + (options.outline ? std::string("#808080") : color) +
           "\" stroke-width=\"" + (options.outline ? "0.2" : "0.5") + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

void render_field(const std::string& path, const TriMesh& mesh, std::span<const double> field,
                  const RenderOptions& options) {
  const std::string svg = render_svg(mesh, field, options);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << svg;
  if (!f) throw DataError("failed writing " + path);
}

}  // namespace femgraph
