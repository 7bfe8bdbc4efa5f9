#pragma once

#include "crashnav/world/geometry.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crashnav::world {

enum class MaterialKind : std::uint8_t { Wall = 0, Glass = 1, Furniture = 2 };

std::string_view to_string(MaterialKind kind);
MaterialKind material_kind_from_string(std::string_view name);

/// Number of entries in the procedural texture table (see texture.hpp).
inline constexpr int kTextureCount = 6;

struct Material {
  MaterialKind kind = MaterialKind::Wall;
  int texture_id = 0;

  /// Depth sensing sees through glass; nothing else is transparent.
  bool depth_transparent() const { return kind == MaterialKind::Glass; }

  friend bool operator==(const Material&, const Material&) = default;
};

struct Segment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  Material material;

  double length() const { return (b - a).norm(); }
};

struct Rect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  Vec2 center() const { return 0.5 * (min + max); }
  double area() const { return (max - min).prod(); }
  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

/// Distance from a segment to a closed rectangle (0 if they touch).
double segment_rect_distance(const Vec2& a, const Vec2& b, const Rect& r);

struct FloorPlan {
  std::string name;
  std::vector<Segment> segments;
  std::vector<Rect> spawn_regions;
};

class FloorPlanError : public std::runtime_error {
 public:
  enum class Kind { Parse, ZeroLengthSegment, SpawnTouchesGeometry, OpenBoundary, BadField };
  FloorPlanError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Drone hull radius used when checking that spawn regions are clear.
inline constexpr double kDefaultDroneRadius = 0.25;

/// Throws FloorPlanError on the first violated invariant.
///
/// Enclosure is checked by casting `escape_rays` unbounded rays from every
/// spawn-region center; any ray that hits nothing means the plan leaks.
void validate(const FloorPlan& plan, double drone_radius = kDefaultDroneRadius, int escape_rays = 3600);

/// Axis-aligned bounding box of all segments.
Rect bounds(const FloorPlan& plan);

}  // namespace crashnav::world
