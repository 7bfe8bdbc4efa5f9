#include "crashnav/collect/collect.hpp"

#include "crashnav/world/geometry.hpp"

#include <limits>
#include <numbers>

namespace crashnav::collect {

void CollectConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("CollectConfig: epsilon must be positive");
  if (n_env_trial < 1) throw std::invalid_argument("CollectConfig: n_env_trial must be >= 1");
  if (max_trajectory_ticks < 1) throw std::invalid_argument("CollectConfig: max_trajectory_ticks must be >= 1");
  if (!(flight_speed > 0.0 && flight_speed <= vehicle::kMaxLinear))
    throw std::invalid_argument("CollectConfig: flight_speed must be in (0, v_max]");
  if (stall_window < 1) throw std::invalid_argument("CollectConfig: stall_window must be >= 1");
  noise.validate();
}

namespace {

using vehicle::Rng;
using vehicle::VehicleState;
using world::Vec2;

constexpr double kDt = vehicle::kTickSeconds;

Pose sample_spawn(const world::FloorPlan& plan, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, plan.spawn_regions.size() - 1);
  const world::Rect& r = plan.spawn_regions[pick(rng)];
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double x = r.min.x() + unit(rng) * (r.max.x() - r.min.x());
  const double y = r.min.y() + unit(rng) * (r.max.y() - r.min.y());
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  return {x, y, angle(rng)};
}

class Collector {
 public:
  Collector(const world::FloorPlan& plan, const CollectConfig& cfg, CollectionMode mode, FramePolicy* policy,
            const TrajectorySink& sink)
      : plan_(plan), cfg_(cfg), mode_(mode), policy_(policy), sink_(sink) {
    std::seed_seq decisions{cfg.seed, std::uint64_t{0xC011EC7}};
    std::seed_seq motion{cfg.seed, std::uint64_t{0x5E2503}};
    decision_rng_.seed(decisions);
    noise_rng_.seed(motion);
  }

  CollectStats run() {
    cfg_.validate();
    if (plan_.spawn_regions.empty()) throw CollectError("plan has no spawn regions");
    const long long max_attempts = static_cast<long long>(cfg_.n_env_trial) * cfg_.max_attempts_factor;
    long long attempts = 0;
    while (stats_.recorded < cfg_.n_env_trial) {
      spawn();
      // Inner loop is the "no unrecoverable crash" loop of one take-off.
      while (stats_.recorded < cfg_.n_env_trial) {
        if (++attempts > max_attempts)
          throw CollectError("collection on '" + plan_.name + "' exhausted " + std::to_string(max_attempts) +
                             " attempts (" + std::to_string(stats_.discarded_timeouts) +
                             " no-collision timeouts); plan degenerate or max_trajectory_ticks too low");
        std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
        yaw_to(angle(decision_rng_));
        fly();
        if (!backtrack()) break;
      }
    }
    return stats_;
  }

 private:
  void spawn() {
    ++stats_.spawns;
    state_ = VehicleState{};
    state_.pose = sample_spawn(plan_, decision_rng_);
    origin_ = state_.odom_pose().position();
  }

  vehicle::StepResult advance(const Command& cmd, bool with_frame) {
    auto r = vehicle::step(state_, cmd, plan_, cfg_.noise, kDt, noise_rng_, with_frame ? &cfg_.camera : nullptr);
    state_ = r.state;
    return r;
  }

  // Yaw in place toward `target` using the on-board heading estimate.
  void yaw_to(double target) {
    for (int t = 0; t < 200; ++t) {
      const double err = world::wrap_angle(target - state_.odom_pose().heading);
      if (std::abs(err) < 0.02) return;
      advance(Command(0.0, cfg_.heading_gain * err), false);
    }
  }

  void fly() {
    Trajectory traj;
    traj.environment_name = plan_.name;
    traj.collection_mode = mode_;
    traj.worker_seed = cfg_.seed;
    if (policy_) policy_->reset();

    Frame frame = world::render(plan_, state_.pose, cfg_.camera);
    for (int tick = 0; tick < cfg_.max_trajectory_ticks; ++tick) {
      const Command cmd = policy_ ? policy_->decide(frame) : Command(cfg_.flight_speed, 0.0);
      Record rec;
      rec.tick = tick;
      rec.true_pose = state_.pose;
      rec.odom_pose = state_.odom_pose();
      rec.command = cmd;
      auto r = advance(cmd, true);
      ++stats_.flight_ticks;
      rec.accel_magnitude = r.reading.accel_magnitude;
      rec.frame = std::move(frame);
      traj.records.push_back(std::move(rec));
      frame = std::move(*r.reading.frame);
      if (state_.collided) {
        traj.ended_in_collision = true;
        traj.contact_tick = tick;
        traj.contact_segment = state_.contact_segment;
        break;
      }
    }

    if (state_.collided) {
      // Crash handled: the hull is resting against the wall.
      state_.collided = false;
      ++stats_.crashes;
    } else {
      ++stats_.timeouts;
      if (mode_ == CollectionMode::RandomStraight) {
        ++stats_.discarded_timeouts;
        return;
      }
    }
    traj.id = cfg_.first_trajectory_id + static_cast<std::uint64_t>(stats_.recorded);
    ++stats_.recorded;
    sink_(std::move(traj));
  }

  // PID homing on odometry position error. Returns false when the episode
  // is unrecoverable (contact while homing or no progress for stall_window).
  bool backtrack() {
    double best = std::numeric_limits<double>::infinity();
    double prev = -1.0;
    double integral = 0.0;
    int since_progress = 0;
    for (int t = 0; t < cfg_.max_backtrack_ticks; ++t) {
      const Pose odom = state_.odom_pose();
      const Vec2 err = origin_ - odom.position();
      const double dist = err.norm();
      if (dist <= cfg_.epsilon) {
        ++stats_.backtrack_successes;
        return true;
      }
      if (dist < best - 1e-3) {
        best = dist;
        since_progress = 0;
      } else if (++since_progress >= cfg_.stall_window) {
        break;
      }
      integral += dist * kDt;
      const double deriv = prev < 0.0 ? 0.0 : (dist - prev) / kDt;
      prev = dist;
      const double heading_err = world::wrap_angle(std::atan2(err.y(), err.x()) - odom.heading);
      double v = cfg_.pid.kp * dist + cfg_.pid.ki * integral + cfg_.pid.kd * deriv;
      v = std::abs(heading_err) > std::numbers::pi / 4 ? 0.0 : v * std::cos(heading_err);
      advance(Command(v, cfg_.heading_gain * heading_err), false);
      if (state_.collided) break;
    }
    ++stats_.backtrack_failures;
    return false;
  }

  const world::FloorPlan& plan_;
  const CollectConfig& cfg_;
  CollectionMode mode_;
  FramePolicy* policy_;
  const TrajectorySink& sink_;
  Rng decision_rng_;
  Rng noise_rng_;
  VehicleState state_;
  Vec2 origin_ = Vec2::Zero();
  CollectStats stats_;
};

}  // namespace

CollectStats collect_random(const world::FloorPlan& plan, const CollectConfig& cfg, const TrajectorySink& sink) {
  return Collector(plan, cfg, CollectionMode::RandomStraight, nullptr, sink).run();
}

std::vector<Trajectory> collect_random(const world::FloorPlan& plan, const CollectConfig& cfg, CollectStats* stats) {
  std::vector<Trajectory> out;
  const CollectStats s = collect_random(plan, cfg, [&](Trajectory&& t) { out.push_back(std::move(t)); });
  if (stats) *stats = s;
  return out;
}

CollectStats collect_with_policy(const world::FloorPlan& plan, const CollectConfig& cfg, FramePolicy& policy,
                                 const TrajectorySink& sink) {
  return Collector(plan, cfg, CollectionMode::PolicyDriven, &policy, sink).run();
}

std::vector<Trajectory> collect_with_policy(const world::FloorPlan& plan, const CollectConfig& cfg,
                                            FramePolicy& policy, CollectStats* stats) {
  std::vector<Trajectory> out;
  const CollectStats s = collect_with_policy(plan, cfg, policy, [&](Trajectory&& t) { out.push_back(std::move(t)); });
  if (stats) *stats = s;
  return out;
}

}  // namespace crashnav::collect
