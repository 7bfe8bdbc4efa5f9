#include "crashnav/vehicle/vehicle.hpp"

#include "crashnav/world/raycast.hpp"

#include <algorithm>
#include <stdexcept>

namespace crashnav::vehicle {

void NoiseModel::validate() const {
  if (heading_drift_std < 0 || speed_jitter_std < 0 || odom_drift_std < 0 || accel_noise_std < 0)
    throw std::invalid_argument("NoiseModel: standard deviations must be non-negative");
  if (!(accel_spike_mean > 6.0 * accel_noise_std))
    throw std::invalid_argument("NoiseModel: accel_spike_mean must exceed 6 * accel_noise_std");
}

namespace {

// Fraction of the motion [0, 1] that can be travelled before the hull
// touches geometry. Sub-steps are at most half a radius long, so a
// zero-thickness wall crossed by the path always puts some sample point
// well inside the hull radius; bisection then refines the contact.
struct Sweep {
  double free_fraction = 1.0;
  std::optional<world::Contact> contact;
};

Sweep sweep(const world::FloorPlan& plan, const Vec2& p0, const Vec2& delta, double radius) {
  if (auto c = world::collision_check(plan, p0, radius)) return {0.0, c};
  const double len = delta.norm();
  if (len == 0.0) return {};
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.5 * radius))));
  double lo = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    if (!world::collision_check(plan, p0 + t * delta, radius)) {
      lo = t;
      continue;
    }
    double hi = t;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (world::collision_check(plan, p0 + mid * delta, radius))
        hi = mid;
      else
        lo = mid;
    }
    return {lo, world::collision_check(plan, p0 + hi * delta, radius)};
  }
  return {};
}

}  // namespace

StepResult step(const VehicleState& state, const Command& cmd, const world::FloorPlan& plan,
                const NoiseModel& noise, double dt, Rng& rng, const world::Camera* camera) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (state.collided) throw std::logic_error("step: vehicle already collided; reset before stepping");

  std::normal_distribution<double> gauss(0.0, 1.0);
  // Fixed draw order keeps trajectories reproducible for a given seed.
  const double n_speed = gauss(rng);
  const double n_heading = gauss(rng);
  const double n_odom_x = gauss(rng);
  const double n_odom_y = gauss(rng);
  const double n_accel = gauss(rng);

  const double sqrt_dt = std::sqrt(dt);
  const double v = std::clamp(cmd.linear() * (1.0 + noise.speed_jitter_std * n_speed), 0.0, kMaxLinear);
  const double w = cmd.angular();

  StepResult out;
  VehicleState& next = out.state;
  next = state;

  const Vec2 p0 = state.pose.position();
  const Vec2 delta = v * dt * state.pose.forward();
  const Sweep sw = sweep(plan, p0, delta, kDroneRadius);
  const Vec2 p1 = p0 + sw.free_fraction * delta;
  const double heading = state.pose.heading + w * dt + noise.heading_drift_std * sqrt_dt * n_heading;
  next.pose = Pose(p1.x(), p1.y(), heading);
  next.odom_drift = state.odom_drift + noise.odom_drift_std * sqrt_dt * Vec2(n_odom_x, n_odom_y);

  if (sw.contact) {
    next.collided = true;
    next.linear_velocity = 0.0;
    next.angular_velocity = 0.0;
    next.last_contact_normal = sw.contact->normal;
    next.contact_segment = sw.contact->segment_index;
    out.reading.accel_magnitude = std::abs(noise.accel_spike_mean + noise.accel_noise_std * n_accel);
  } else {
    next.linear_velocity = v;
    next.angular_velocity = std::clamp(w, -kMaxAngular, kMaxAngular);
    out.reading.accel_magnitude = std::abs(noise.accel_noise_std * n_accel);
  }

  out.reading.odom_pose_estimate = next.odom_pose();
  if (camera) out.reading.frame = world::render(plan, next.pose, *camera);
  return out;
}

Sim::Sim(const world::FloorPlan& plan, const Pose& start, const NoiseModel& noise, std::uint64_t seed,
         const world::Camera& camera, double dt)
    : plan_(&plan), noise_(noise), camera_(camera), dt_(dt), rng_(seed), frame_(world::render(plan, start, camera)) {
  noise.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("Sim: dt must be positive");
  state_.pose = start;
}

const VehicleState& Sim::advance(const Command& cmd) {
  StepResult r = step(state_, cmd, *plan_, noise_, dt_, rng_, &camera_);
  state_ = std::move(r.state);
  last_accel_ = r.reading.accel_magnitude;
  frame_ = std::move(*r.reading.frame);
  ++tick_;
  return state_;
}

DriftStats straight_line_drift(double distance, const NoiseModel& noise, int n_runs, std::uint64_t seed,
                               double speed, double dt) {
  if (!(distance > 0.0)) throw std::invalid_argument("straight_line_drift: distance must be positive");
  if (n_runs < 1) throw std::invalid_argument("straight_line_drift: n_runs must be >= 1");
  const world::FloorPlan open_space;
  const Command straight(speed, 0.0);
  const int cap = static_cast<int>(std::ceil(10.0 * distance / (speed * dt)));

  DriftStats stats;
  for (int run = 0; run < n_runs; ++run) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(run)};
    Rng rng(seq);
    VehicleState s;
    double lateral = 0.0;
    for (int t = 0; t < cap; ++t) {
      const Vec2 before = s.pose.position();
      s = step(s, straight, open_space, noise, dt, rng).state;
      const Vec2 after = s.pose.position();
      lateral = after.y();
      if (after.x() >= distance) {
        const double span = after.x() - before.x();
        const double f = span > 0.0 ? (distance - before.x()) / span : 1.0;
        lateral = before.y() + f * (after.y() - before.y());
        break;
      }
    }
    stats.deviations.push_back(lateral);
  }
  std::vector<double> abs_dev(stats.deviations.size());
  std::transform(stats.deviations.begin(), stats.deviations.end(), abs_dev.begin(),
                 [](double d) { return std::abs(d); });
  std::sort(abs_dev.begin(), abs_dev.end());
  const std::size_t n = abs_dev.size();
  stats.median_abs = n % 2 ? abs_dev[n / 2] : 0.5 * (abs_dev[n / 2 - 1] + abs_dev[n / 2]);
  stats.max_abs = abs_dev.back();
  for (double d : abs_dev) stats.mean_abs += d / n;
  return stats;
}

}  // namespace crashnav::vehicle
