#pragma once

#include "crashnav/world/floorplan.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace crashnav::world {

/// Grayscale image stored as 8-bit levels; intensity(x, y) maps a level to
/// [0, 1]. The 8-bit storage is the same representation archives and the
/// wire protocol use, so frames round-trip exactly.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  Frame() = default;
  Frame(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Frame: dimensions must be positive");
  }

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float intensity(int x, int y) const { return at(x, y) / 255.0f; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline std::uint8_t to_level(double intensity) {
  const double c = std::clamp(intensity, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

struct Camera {
  double fov = 92.0 * std::numbers::pi / 180.0;
  int width = 64;
  int height = 64;
};

/// Rendering constants. Exposed so tests can derive expected column extents.
struct RenderModel {
  static constexpr double kEyeHeight = 1.0;    // m above floor
  static constexpr double kWallHeight = 2.4;   // m
  static constexpr double kMaxRange = 30.0;    // m
  static constexpr double kGlassTint = 0.06;   // intensity offset per glass layer
  static constexpr double kGlassEdgeBand = 0.02;    // fraction of panel extent
  static constexpr double kGlassEdgeHighlight = 0.15;

  /// Focal length in pixels for a camera (square pixels).
  static double focal(const Camera& cam);
  /// Rows [top, bottom) covered by a surface at perpendicular depth `perp`,
  /// before clipping to the image.
  static double top_row(const Camera& cam, double perp);
  static double bottom_row(const Camera& cam, double perp);
  /// Multiplicative fog factor for a surface at perpendicular depth.
  static double shade(double perp);
};

/// First-person column renderer. Pure: identical inputs give identical
/// frames. Requires camera dimensions >= 8x8.
Frame render(const FloorPlan& plan, const Pose& pose, const Camera& camera = {});

/// Per-column extent of the opaque surface drawn by render(); used by tests
/// to verify raycast/render consistency.
struct ColumnGeometry {
  double perp_depth = 0.0;  // of the first opaque surface, or kMaxRange
  int top = 0;              // first wall row (clipped)
  int bottom = 0;           // one past the last wall row (clipped)
};
std::vector<ColumnGeometry> column_geometry(const FloorPlan& plan, const Pose& pose, const Camera& camera = {});

}  // namespace crashnav::world
