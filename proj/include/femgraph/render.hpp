#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "femgraph/mesher.hpp"

namespace femgraph {

using Rgb = std::array<std::uint8_t, 3>;

// Piecewise-linear scale through blue (0, 0, 255), cyan (0, 255, 255),
// green (0, 255, 0), yellow (255, 255, 0), red (255, 0, 0) at t = 0, 0.25,
// 0.5, 0.75, 1. t is clamped to [0, 1]; each channel is rounded to nearest.
Rgb color_map(double t);

struct ColorRange {
  double min = 0.0;
  double max = 1.0;
};

struct RenderOptions {
  std::optional<ColorRange> range;  // defaults to the field's min and max
  double pixels_per_mm = 10.0;
  bool outline = false;             // thin grey element edges
};

// SVG with one filled polygon per element, y axis pointing up. Identical
// inputs give identical bytes. Throws DataError on a length mismatch.
std::string render_svg(const TriMesh& mesh, std::span<const double> field, const RenderOptions& options = {});

void render_field(const std::string& path, const TriMesh& mesh, std::span<const double> field,
                  const RenderOptions& options = {});

}  // namespace femgraph
