#include "crashnav/world/floorplan.hpp"

#include "crashnav/world/raycast.hpp"

#include <limits>
#include <sstream>

namespace crashnav::world {

std::string_view to_string(MaterialKind kind) {
  switch (kind) {
    case MaterialKind::Wall: return "wall";
    case MaterialKind::Glass: return "glass";
    case MaterialKind::Furniture: return "furniture";
  }
  return "wall";
}

MaterialKind material_kind_from_string(std::string_view name) {
  if (name == "wall") return MaterialKind::Wall;
  if (name == "glass") return MaterialKind::Glass;
  if (name == "furniture") return MaterialKind::Furniture;
  throw FloorPlanError(FloorPlanError::Kind::BadField, "unknown material '" + std::string(name) + "'");
}

double segment_rect_distance(const Vec2& a, const Vec2& b, const Rect& r) {
  if (r.contains(a) || r.contains(b)) return 0.0;
  const Vec2 c0 = r.min, c1{r.max.x(), r.min.y()}, c2 = r.max, c3{r.min.x(), r.max.y()};
  return std::min({segment_segment_distance(a, b, c0, c1), segment_segment_distance(a, b, c1, c2),
                   segment_segment_distance(a, b, c2, c3), segment_segment_distance(a, b, c3, c0)});
}

void validate(const FloorPlan& plan, double drone_radius, int escape_rays) {
  using K = FloorPlanError::Kind;
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const auto& s = plan.segments[i];
    if (!s.a.allFinite() || !s.b.allFinite())
      throw FloorPlanError(K::BadField, "segment " + std::to_string(i) + " has non-finite endpoints");
    if (s.length() <= 0.0)
      throw FloorPlanError(K::ZeroLengthSegment, "segment " + std::to_string(i) + " has zero length");
    if (s.material.texture_id < 0 || s.material.texture_id >= kTextureCount)
      throw FloorPlanError(K::BadField, "segment " + std::to_string(i) + " has texture_id out of range");
  }
  if (plan.spawn_regions.empty()) throw FloorPlanError(K::BadField, "plan has no spawn regions");

  for (std::size_t r = 0; r < plan.spawn_regions.size(); ++r) {
    const Rect& rect = plan.spawn_regions[r];
    if (!(rect.min.x() <= rect.max.x() && rect.min.y() <= rect.max.y()))
      throw FloorPlanError(K::BadField, "spawn region " + std::to_string(r) + " is inverted");
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
      const auto& s = plan.segments[i];
      if (segment_rect_distance(s.a, s.b, rect) < drone_radius) {
        std::ostringstream msg;
        msg << "spawn region " << r << " touches segment " << i << " (within drone radius " << drone_radius
            << ")";
        throw FloorPlanError(K::SpawnTouchesGeometry, msg.str());
      }
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < plan.spawn_regions.size(); ++r) {
    const Vec2 origin = plan.spawn_regions[r].center();
    for (int k = 0; k < escape_rays; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / escape_rays;
      if (cast_ray(plan, origin, direction(angle), inf).segment_index < 0) {
        std::ostringstream msg;
        msg << "open boundary: ray from spawn region " << r << " at " << angle << " rad escapes";
        throw FloorPlanError(K::OpenBoundary, msg.str());
      }
    }
  }
}

Rect bounds(const FloorPlan& plan) {
  Rect r;
  if (plan.segments.empty()) return r;
  r.min = r.max = plan.segments.front().a;
  for (const auto& s : plan.segments) {
    r.min = r.min.cwiseMin(s.a).cwiseMin(s.b);
    r.max = r.max.cwiseMax(s.a).cwiseMax(s.b);
  }
  return r;
}

}  // namespace crashnav::world
