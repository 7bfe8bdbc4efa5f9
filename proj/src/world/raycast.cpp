#include "crashnav/world/raycast.hpp"

#include <stdexcept>

namespace crashnav::world {

double ray_angle_offset(int index, int n_rays, double fov) {
  return 0.5 * fov - (index + 0.5) * fov / n_rays;
}

RayHit cast_ray(const FloorPlan& plan, const Vec2& origin, const Vec2& dir, double max_range,
                bool skip_transparent) {
  RayHit best{max_range, -1};
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const Segment& s = plan.segments[i];
    if (skip_transparent && s.material.depth_transparent()) continue;
    const Vec2 e = s.b - s.a;
    const double denom = cross(dir, e);
    if (std::abs(denom) < 1e-15) continue;  // parallel: grazing hits are ignored
    const Vec2 ao = s.a - origin;
    const double t = cross(ao, e) / denom;
    const double u = cross(ao, dir) / denom;
    if (t <= 1e-12 || u < 0.0 || u > 1.0) continue;
    if (t < best.distance) best = {t, static_cast<int>(i)};
  }
  return best;
}

DepthScan raycast(const FloorPlan& plan, const Pose& pose, double fov, int n_rays, double max_range) {
  if (n_rays < 1) throw std::invalid_argument("raycast: n_rays must be >= 1");
  if (!(fov > 0.0 && fov <= std::numbers::pi)) throw std::invalid_argument("raycast: fov must be in (0, pi]");
  DepthScan scan;
  scan.n_rays = n_rays;
  scan.fov = fov;
  scan.max_range = max_range;
  scan.depths.resize(n_rays);
  scan.first_opaque_depths.resize(n_rays);
  scan.hit_materials.resize(n_rays);
  const Vec2 origin = pose.position();
  for (int i = 0; i < n_rays; ++i) {
    const Vec2 dir = direction(pose.heading + ray_angle_offset(i, n_rays, fov));
    const RayHit nearest = cast_ray(plan, origin, dir, max_range, false);
    scan.depths[i] = nearest.distance;
    if (nearest.segment_index < 0) {
      scan.first_opaque_depths[i] = max_range;
      continue;
    }
    const Material& m = plan.segments[nearest.segment_index].material;
    scan.hit_materials[i] = m;
    scan.first_opaque_depths[i] =
        m.depth_transparent() ? cast_ray(plan, origin, dir, max_range, true).distance : nearest.distance;
  }
  return scan;
}

std::optional<Contact> collision_check(const FloorPlan& plan, const Vec2& p, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("collision_check: radius must be positive");
  std::optional<Contact> best;
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const Segment& s = plan.segments[i];
    const Vec2 q = closest_point_on_segment(p, s.a, s.b);
    const double d = (p - q).norm();
    if (d >= radius) continue;
    // Near-equal distances count as ties so the lower index wins.
    if (best && d >= best->distance - 1e-12) continue;
    Vec2 normal;
    if (d > 0.0) {
      normal = (p - q) / d;
    } else {
      const Vec2 e = (s.b - s.a).normalized();
      normal = Vec2(-e.y(), e.x());
    }
    best = Contact{normal, static_cast<int>(i), d};
  }
  return best;
}

std::optional<Contact> collision_check(const FloorPlan& plan, const Pose& pose, double radius) {
  return collision_check(plan, pose.position(), radius);
}

}  // namespace crashnav::world
