#include "crashnav/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace crashnav::baselines {

void DepthPolicyConfig::validate() const {
  if (n_sectors < 3 || n_sectors % 2 == 0) throw std::invalid_argument("DepthPolicyConfig: n_sectors must be odd and >= 3");
  if (n_rays < n_sectors) throw std::invalid_argument("DepthPolicyConfig: need at least one ray per sector");
  if (!(stop_threshold > 0.0)) throw std::invalid_argument("DepthPolicyConfig: stop_threshold must be positive");
  if (!(fov > 0.0 && fov <= std::numbers::pi)) throw std::invalid_argument("DepthPolicyConfig: fov must be in (0, pi]");
  if (!(body_radius >= 0.0)) throw std::invalid_argument("DepthPolicyConfig: body_radius must be >= 0");
  if (!(max_range > 0.0)) throw std::invalid_argument("DepthPolicyConfig: max_range must be positive");
}

std::vector<double> sector_depths(const world::DepthScan& scan, const DepthPolicyConfig& cfg) {
  const auto& d = cfg.use_first_opaque ? scan.first_opaque_depths : scan.depths;
  if (scan.n_rays < cfg.n_sectors) throw std::invalid_argument("sector_depths: fewer rays than sectors");
  const int n = scan.n_rays;
  std::vector<double> ray_depth(d.begin(), d.end());
  if (cfg.body_radius > 0.0) {
    // Free travel of the body disc along each ray, against every scanned
    // surface point: obstacles inflated by the radius.
    const double r = cfg.body_radius;
    std::vector<double> px(n), py(n);
    for (int j = 0; j < n; ++j) {
      const double a = world::ray_angle_offset(j, n, scan.fov);
      px[j] = d[j] * std::cos(a);
      py[j] = d[j] * std::sin(a);
    }
    for (int i = 0; i < n; ++i) {
      const double a = world::ray_angle_offset(i, n, scan.fov);
      const double ux = std::cos(a), uy = std::sin(a);
      double free = d[i];
      for (int j = 0; j < n; ++j) {
        if (d[j] >= scan.max_range) continue;
        const double along = ux * px[j] + uy * py[j];
        const double across = std::abs(ux * py[j] - uy * px[j]);
        if (along <= 0.0 || across >= r) continue;
        free = std::min(free, std::max(0.0, along - std::sqrt(r * r - across * across)));
      }
      ray_depth[i] = free;
    }
  }
  std::vector<double> sectors(cfg.n_sectors, std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    const int s = static_cast<int>(static_cast<long long>(i) * cfg.n_sectors / n);
    sectors[s] = std::min(sectors[s], ray_depth[i]);
  }
  return sectors;
}

int deepest_sector(const std::vector<double>& sectors) {
  const int n = static_cast<int>(sectors.size());
  const int center = n / 2;
  int best = center;
  // Depths within a nanometre are rounding noise from the clearance sums.
  constexpr double kTie = 1e-9;
  for (int offset = 1; offset <= center; ++offset)
    for (int s : {center - offset, center + offset})
      if (sectors[s] > sectors[best] + kTie) best = s;
  return best;
}

Command depth_policy_decide(const world::DepthScan& scan, const DepthPolicyConfig& cfg) {
  const auto sectors = sector_depths(scan, cfg);
  const int center = cfg.n_sectors / 2;
  const int deepest = deepest_sector(sectors);
  if (sectors[center] > cfg.stop_threshold) {
    const double offset = static_cast<double>(center - deepest) / center;
    return Command(cfg.cruise_speed, cfg.steer_gain * offset);
  }
  return Command(0.0, deepest > center ? -cfg.turn_rate : cfg.turn_rate);
}

world::DepthScan depth_scan(const world::FloorPlan& plan, const world::Pose& pose, const DepthPolicyConfig& cfg) {
  return world::raycast(plan, pose, cfg.fov, cfg.n_rays, cfg.max_range);
}

double straight_rollout_distance(const world::FloorPlan& plan, const world::Pose& start,
                                 const vehicle::NoiseModel& noise, double speed, double max_time, vehicle::Rng& rng) {
  vehicle::VehicleState s;
  s.pose = start;
  const Command cmd(speed, 0.0);
  const int cap = static_cast<int>(std::llround(max_time / vehicle::kTickSeconds));
  double distance = 0.0;
  for (int t = 0; t < cap && !s.collided; ++t) {
    const world::Vec2 before = s.pose.position();
    s = vehicle::step(s, cmd, plan, noise, vehicle::kTickSeconds, rng).state;
    distance += (s.pose.position() - before).norm();
  }
  return distance;
}

StraightOracleResult best_straight_heading(const world::FloorPlan& plan, const world::Vec2& start,
                                           const vehicle::NoiseModel& noise, const StraightOracleConfig& cfg) {
  if (cfg.k_headings < 8) throw std::invalid_argument("best_straight_heading: k_headings must be >= 8");
  if (cfg.runs_per_heading < 1) throw std::invalid_argument("best_straight_heading: runs_per_heading must be >= 1");
  StraightOracleResult r;
  r.mean_distances.resize(cfg.k_headings);
  for (int k = 0; k < cfg.k_headings; ++k) {
    const double heading = 2.0 * std::numbers::pi * k / cfg.k_headings;
    double sum = 0.0;
    for (int run = 0; run < cfg.runs_per_heading; ++run) {
      std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(run)};
      vehicle::Rng rng(seq);
      sum += straight_rollout_distance(plan, {start.x(), start.y(), heading}, noise, cfg.speed, cfg.max_time, rng);
    }
    r.mean_distances[k] = sum / cfg.runs_per_heading;
  }
  for (int k = 1; k < cfg.k_headings; ++k)
    if (r.mean_distances[k] > r.mean_distances[r.index] + 1e-9) r.index = k;
  r.heading = world::wrap_angle(2.0 * std::numbers::pi * r.index / cfg.k_headings);
  return r;
}

ExternalCommand::ExternalCommand(double linear_axis, double angular_axis, double timestamp)
    : linear_(std::isfinite(linear_axis) ? std::clamp(linear_axis, 0.0, 1.0) : 0.0),
      angular_(std::isfinite(angular_axis) ? std::clamp(angular_axis, -1.0, 1.0) : 0.0),
      timestamp_(timestamp) {}

void CommandChannel::push(const ExternalCommand& cmd) {
  std::lock_guard lock(mu_);
  latest_ = cmd;
}

std::optional<ExternalCommand> CommandChannel::latest() const {
  std::lock_guard lock(mu_);
  return latest_;
}

Command ExternalPolicy::next() {
  if (channel_->disconnected()) return Command(0.0, 0.0);
  const auto cmd = channel_->latest();
  return cmd ? cmd->to_command() : Command(0.0, 0.0);
}

}  // namespace crashnav::baselines
