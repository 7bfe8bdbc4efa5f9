#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crashnav::oracle {
namespace {

using world::Vec2;

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Closed-segment crossing by orientation signs.
bool crosses(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
  const double d1 = orient(a, b, p), d2 = orient(a, b, q);
  const double d3 = orient(p, q, a), d4 = orient(p, q, b);
  return ((d1 <= 0 && d2 >= 0) || (d1 >= 0 && d2 <= 0)) && ((d3 <= 0 && d4 >= 0) || (d3 >= 0 && d4 <= 0)) &&
         !(d1 == 0 && d2 == 0);
}

// Smallest t >= 0 with |o + t d - c| = r, d unit.
double ray_circle(const Vec2& o, const Vec2& d, const Vec2& c, double r) {
  const Vec2 m = o - c;
  const double b = m.dot(d);
  const double disc = b * b - (m.squaredNorm() - r * r);
  if (disc < 0) return std::numeric_limits<double>::infinity();
  const double s = std::sqrt(disc);
  if (-b - s >= 0) return -b - s;
  if (-b + s >= 0) return 0.0;  // starts inside
  return std::numeric_limits<double>::infinity();
}

}  // namespace

MarchedDepths march_both(const world::FloorPlan& plan, const Vec2& origin, const Vec2& dir, double max_range,
                         double step) {
  MarchedDepths out{max_range, max_range};
  bool found_any = false;
  const Vec2 u = dir.normalized();
  const auto n = static_cast<long>(std::ceil(max_range / step));
  for (long k = 0; k < n; ++k) {
    const Vec2 p = origin + (k * step) * u;
    const Vec2 q = origin + ((k + 1) * step) * u;
    for (const auto& s : plan.segments) {
      if (!crosses(p, q, s.a, s.b)) continue;
      const double here = std::min((k + 0.5) * step, max_range);
      if (!found_any) {
        out.any = here;
        found_any = true;
      }
      if (s.material.kind != world::MaterialKind::Glass) {
        out.opaque = here;
        return out;
      }
    }
  }
  return out;
}

double march_ray(const world::FloorPlan& plan, const Vec2& origin, const Vec2& dir, double max_range,
                 bool skip_glass, double step) {
  const MarchedDepths d = march_both(plan, origin, dir, max_range, step);
  return skip_glass ? d.opaque : d.any;
}

double disc_contact_distance(const world::FloorPlan& plan, const Vec2& origin, const Vec2& dir, double radius) {
  const Vec2 u = dir.normalized();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : plan.segments) {
    best = std::min({best, ray_circle(origin, u, s.a, radius), ray_circle(origin, u, s.b, radius)});
    const Vec2 ab = s.b - s.a;
    const double len = ab.norm();
    if (len == 0) continue;
    const Vec2 t = ab / len;
    const Vec2 nrm(-t.y(), t.x());
    for (double side : {-1.0, 1.0}) {
      // Line through a + side*r*n parallel to the segment.
      const Vec2 a = s.a + side * radius * nrm;
      const double denom = u.dot(nrm);
      if (denom == 0) continue;
      const double hit = (a - origin).dot(nrm) / denom;
      if (hit < 0) continue;
      const double along = (origin + hit * u - a).dot(t);
      if (along >= 0 && along <= len) best = std::min(best, hit);
    }
  }
  return best;
}

world::FloorPlan random_plan(std::mt19937_64& rng, int n_segments, double half) {
  world::FloorPlan plan;
  plan.name = "random";
  const Vec2 c[4] = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
  for (int i = 0; i < 4; ++i) plan.segments.push_back({c[i], c[(i + 1) % 4], {}});
  std::uniform_real_distribution<double> coord(-half, half);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(plan.segments.size()) < n_segments) {
    world::Segment s;
    s.a = {coord(rng), coord(rng)};
    s.b = {coord(rng), coord(rng)};
    if ((s.b - s.a).norm() < 0.05) continue;
    s.material.kind = unit(rng) < 0.2 ? world::MaterialKind::Glass : world::MaterialKind::Wall;
    plan.segments.push_back(s);
  }
  plan.spawn_regions.push_back({Vec2(-0.1, -0.1), Vec2(0.1, 0.1)});
  return plan;
}

world::FloorPlan box_plan(double width, double height, double spawn_half) {
  world::FloorPlan plan;
  plan.name = "box";
  const Vec2 c[4] = {{0, 0}, {width, 0}, {width, height}, {0, height}};
  for (int i = 0; i < 4; ++i) plan.segments.push_back({c[i], c[(i + 1) % 4], {}});
  const Vec2 mid(width / 2, height / 2);
  plan.spawn_regions.push_back({mid - Vec2::Constant(spawn_half), mid + Vec2::Constant(spawn_half)});
  return plan;
}

std::vector<double> reference_logits(const learn::NetworkParams<double>& params, const std::vector<double>& input) {
  using Kind = learn::LayerSpec::Kind;
  // act[c][y][x] flattened as (c * h + y) * w + x
  int ch = 1, h = params.spec.input_height, w = params.spec.input_width;
  std::vector<double> act = input;
  for (std::size_t li = 0; li < params.spec.layers.size(); ++li) {
    const auto& l = params.spec.layers[li];
    std::vector<double> next;
    switch (l.kind) {
      case Kind::Conv: {
        const int oh = (h - l.kernel) / l.stride + 1, ow = (w - l.kernel) / l.stride + 1;
        next.assign(static_cast<std::size_t>(l.out) * oh * ow, 0.0);
        for (int oc = 0; oc < l.out; ++oc)
          for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
              double acc = params.biases[li](oc);
              for (int ic = 0; ic < ch; ++ic)
                for (int ky = 0; ky < l.kernel; ++ky)
                  for (int kx = 0; kx < l.kernel; ++kx)
                    acc += params.weights[li](oc, (ic * l.kernel + ky) * l.kernel + kx) *
                           act[(static_cast<std::size_t>(ic) * h + y * l.stride + ky) * w + x * l.stride + kx];
              next[(static_cast<std::size_t>(oc) * oh + y) * ow + x] = acc;
            }
        ch = l.out;
        h = oh;
        w = ow;
        break;
      }
      case Kind::ReLU:
        next = act;
        for (double& v : next) v = v > 0 ? v : 0.0;
        break;
      case Kind::MaxPool: {
        const int oh = (h - l.kernel) / l.stride + 1, ow = (w - l.kernel) / l.stride + 1;
        next.assign(static_cast<std::size_t>(ch) * oh * ow, 0.0);
        for (int c = 0; c < ch; ++c)
          for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
              double m = -std::numeric_limits<double>::infinity();
              for (int ky = 0; ky < l.kernel; ++ky)
                for (int kx = 0; kx < l.kernel; ++kx)
                  m = std::max(m, act[(static_cast<std::size_t>(c) * h + y * l.stride + ky) * w + x * l.stride + kx]);
              next[(static_cast<std::size_t>(c) * oh + y) * ow + x] = m;
            }
        h = oh;
        w = ow;
        break;
      }
      case Kind::Flatten:
        next = act;
        ch = ch * h * w;
        h = w = 1;
        break;
      case Kind::Dense: {
        next.assign(static_cast<std::size_t>(l.out), 0.0);
        for (int o = 0; o < l.out; ++o) {
          double acc = params.biases[li](o);
          for (int i = 0; i < ch; ++i) acc += params.weights[li](o, i) * act[static_cast<std::size_t>(i)];
          next[static_cast<std::size_t>(o)] = acc;
        }
        ch = l.out;
        break;
      }
    }
    act = std::move(next);
  }
  return act;
}

}  // namespace crashnav::oracle
