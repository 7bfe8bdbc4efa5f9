#pragma once

#include "crashnav/world/floorplan.hpp"

#include <optional>
#include <vector>

namespace crashnav::world {

/// Rays are ordered left to right as seen by the drone: ray 0 points at
/// heading + fov/2, the last ray at heading - fov/2. Ray i sits at the
/// center of its angular bin, so a single ray points straight ahead.
double ray_angle_offset(int index, int n_rays, double fov);

struct RayHit {
  double distance = 0.0;
  int segment_index = -1;  // -1 when nothing was hit within range
};

/// Nearest hit of one ray. `skip_transparent` ignores glass. Exact ties
/// between segments resolve to the lowest index.
RayHit cast_ray(const FloorPlan& plan, const Vec2& origin, const Vec2& dir, double max_range,
                bool skip_transparent = false);

struct DepthScan {
  int n_rays = 0;
  double fov = 0.0;
  double max_range = 0.0;
  std::vector<double> depths;
  std::vector<double> first_opaque_depths;
  /// Material of the nearest surface; nullopt when the ray reached max_range.
  std::vector<std::optional<Material>> hit_materials;
};

/// Requires n_rays >= 1 and 0 < fov <= pi (throws std::invalid_argument).
DepthScan raycast(const FloorPlan& plan, const Pose& pose, double fov, int n_rays, double max_range);

struct Contact {
  Vec2 normal = Vec2::Zero();  // unit vector from the wall toward the drone
  int segment_index = -1;
  double distance = 0.0;
};

/// Contact iff some segment lies strictly closer than `radius`. Reports the
/// nearest segment; equal distances resolve to the lowest index. Glass is
/// solid here.
std::optional<Contact> collision_check(const FloorPlan& plan, const Pose& pose, double radius);
std::optional<Contact> collision_check(const FloorPlan& plan, const Vec2& position, double radius);

}  // namespace crashnav::world
