#include "crashnav/world/render.hpp"

#include "crashnav/world/raycast.hpp"
#include "crashnav/world/texture.hpp"

#include <stdexcept>

namespace crashnav::world {
namespace {

struct SurfaceHit {
  double t = 0.0;
  int segment = -1;
  double u = 0.0;  // meters from endpoint a
};

struct ColumnHits {
  SurfaceHit opaque{RenderModel::kMaxRange, -1, 0.0};
  std::vector<SurfaceHit> glass;  // strictly nearer than `opaque`
};

void trace_column(const FloorPlan& plan, const Vec2& origin, const Vec2& dir, ColumnHits& out) {
  out.opaque = {RenderModel::kMaxRange, -1, 0.0};
  out.glass.clear();
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const Segment& s = plan.segments[i];
    const Vec2 e = s.b - s.a;
    const double denom = cross(dir, e);
    if (std::abs(denom) < 1e-15) continue;
    const Vec2 ao = s.a - origin;
    const double t = cross(ao, e) / denom;
    const double w = cross(ao, dir) / denom;
    if (t <= 1e-12 || w < 0.0 || w > 1.0 || t >= RenderModel::kMaxRange) continue;
    SurfaceHit hit{t, static_cast<int>(i), w * e.norm()};
    if (s.material.depth_transparent()) {
      out.glass.push_back(hit);
    } else if (t < out.opaque.t) {
      out.opaque = hit;
    }
  }
  std::erase_if(out.glass, [&](const SurfaceHit& g) { return g.t >= out.opaque.t; });
}

double background(int y, int height) {
  const double half = 0.5 * height;
  const double yc = y + 0.5;
  if (yc < half) return 0.80 - 0.25 * yc / half;  // ceiling
  return 0.30 + 0.25 * (yc - half) / half;        // floor
}

int clip_row(double row, int height) {
  return static_cast<int>(std::clamp(std::ceil(row - 0.5), 0.0, static_cast<double>(height)));
}

void check_camera(const Camera& camera) {
  if (camera.width < 8 || camera.height < 8) throw std::invalid_argument("render: camera must be at least 8x8");
  if (!(camera.fov > 0.0 && camera.fov < std::numbers::pi)) throw std::invalid_argument("render: fov out of range");
}

}  // namespace

double RenderModel::focal(const Camera& cam) { return 0.5 * cam.width / std::tan(0.5 * cam.fov); }

double RenderModel::top_row(const Camera& cam, double perp) {
  return 0.5 * cam.height - focal(cam) * (kWallHeight - kEyeHeight) / perp;
}

double RenderModel::bottom_row(const Camera& cam, double perp) {
  return 0.5 * cam.height + focal(cam) * kEyeHeight / perp;
}

double RenderModel::shade(double perp) { return 0.3 + 0.7 * std::exp(-perp / 8.0); }

std::vector<ColumnGeometry> column_geometry(const FloorPlan& plan, const Pose& pose, const Camera& camera) {
  check_camera(camera);
  std::vector<ColumnGeometry> cols(camera.width);
  ColumnHits hits;
  for (int c = 0; c < camera.width; ++c) {
    const double offset = ray_angle_offset(c, camera.width, camera.fov);
    trace_column(plan, pose.position(), direction(pose.heading + offset), hits);
    const double perp = hits.opaque.t * std::cos(offset);
    cols[c].perp_depth = perp;
    if (hits.opaque.segment < 0) continue;
    cols[c].top = clip_row(RenderModel::top_row(camera, perp), camera.height);
    cols[c].bottom = clip_row(RenderModel::bottom_row(camera, perp), camera.height);
  }
  return cols;
}

Frame render(const FloorPlan& plan, const Pose& pose, const Camera& camera) {
  check_camera(camera);
  Frame frame(camera.width, camera.height);
  const double f = RenderModel::focal(camera);
  const double half = 0.5 * camera.height;
  std::vector<double> column(camera.height);
  ColumnHits hits;

  for (int c = 0; c < camera.width; ++c) {
    const double offset = ray_angle_offset(c, camera.width, camera.fov);
    const double cos_off = std::cos(offset);
    trace_column(plan, pose.position(), direction(pose.heading + offset), hits);

    for (int y = 0; y < camera.height; ++y) column[y] = background(y, camera.height);

    if (hits.opaque.segment >= 0) {
      const double perp = hits.opaque.t * cos_off;
      const int top = clip_row(RenderModel::top_row(camera, perp), camera.height);
      const int bottom = clip_row(RenderModel::bottom_row(camera, perp), camera.height);
      const Material& m = plan.segments[hits.opaque.segment].material;
      const double fog = RenderModel::shade(perp);
      for (int y = top; y < bottom; ++y) {
        const double v = RenderModel::kEyeHeight + (half - (y + 0.5)) * perp / f;
        column[y] = sample_texture(m.texture_id, hits.opaque.u, v) * fog;
      }
    }

    for (const SurfaceHit& g : hits.glass) {
      const double perp = g.t * cos_off;
      const int top = clip_row(RenderModel::top_row(camera, perp), camera.height);
      const int bottom = clip_row(RenderModel::bottom_row(camera, perp), camera.height);
      const double len = plan.segments[g.segment].length();
      const double band_u = RenderModel::kGlassEdgeBand * len;
      const bool side_edge = g.u < band_u || g.u > len - band_u;
      const double band_v = RenderModel::kGlassEdgeBand * RenderModel::kWallHeight;
      for (int y = top; y < bottom; ++y) {
        const double v = RenderModel::kEyeHeight + (half - (y + 0.5)) * perp / f;
        const bool edge = side_edge || v < band_v || v > RenderModel::kWallHeight - band_v;
        column[y] += RenderModel::kGlassTint + (edge ? RenderModel::kGlassEdgeHighlight : 0.0);
      }
    }

    for (int y = 0; y < camera.height; ++y) frame.at(c, y) = to_level(column[y]);
  }
  return frame;
}

}  // namespace crashnav::world
