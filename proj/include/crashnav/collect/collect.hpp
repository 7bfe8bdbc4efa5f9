#pragma once

#include "crashnav/vehicle/vehicle.hpp"
#include "crashnav/world/floorplan.hpp"
#include "crashnav/world/render.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crashnav::collect {

using vehicle::Command;
using world::Frame;
using world::Pose;

enum class CollectionMode : std::uint8_t { RandomStraight = 0, PolicyDriven = 1 };

struct PidGains {
  double kp = 0.8;
  double ki = 0.0;
  double kd = 0.2;
};

struct CollectConfig {
  double epsilon = 0.25;  // backtrack tolerance on odometry position error, m
  int n_env_trial = 200;  // recorded crash trajectories per environment
  int max_trajectory_ticks = 600;
  PidGains pid;
  std::uint64_t seed = 1;

  double flight_speed = 0.4;  // m/s, straight-flight command
  int stall_window = 50;      // ticks without progress before giving up on backtracking
  int max_backtrack_ticks = 2000;
  double heading_gain = 1.5;  // rad/s per rad of heading error while homing or yawing
  int max_attempts_factor = 20;  // attempts allowed per requested trajectory
  std::uint64_t first_trajectory_id = 0;

  vehicle::NoiseModel noise;
  world::Camera camera;

  void validate() const;
};

struct Record {
  int tick = 0;
  Pose true_pose;
  Pose odom_pose;
  Frame frame;  // view at the start of the tick
  double accel_magnitude = 0.0;
  Command command;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Trajectory {
  std::uint64_t id = 0;
  std::string environment_name;
  std::vector<Record> records;
  bool ended_in_collision = false;
  CollectionMode collection_mode = CollectionMode::RandomStraight;
  std::uint64_t worker_seed = 0;
  /// Simulator ground truth: index of the record whose step made contact.
  std::optional<int> contact_tick;
  int contact_segment = -1;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct CollectStats {
  int recorded = 0;
  int crashes = 0;              // recorded trajectories that ended in collision
  int timeouts = 0;             // flights that hit max_trajectory_ticks
  int discarded_timeouts = 0;   // timeouts dropped (random mode only)
  int spawns = 0;
  int backtrack_successes = 0;
  int backtrack_failures = 0;   // collided or stalled while homing
  long long flight_ticks = 0;   // all flight-phase ticks, recorded or not

  double crashes_per_1000_ticks() const { return flight_ticks ? 1000.0 * crashes / flight_ticks : 0.0; }
};

class CollectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flight-phase controller for policy-driven collection. Frame in, command
/// out; reset() is called before every flight.
class FramePolicy {
 public:
  virtual ~FramePolicy() = default;
  virtual void reset() {}
  virtual Command decide(const Frame& frame) = 0;
};

/// Adapts a plain callable.
class LambdaPolicy final : public FramePolicy {
 public:
  explicit LambdaPolicy(std::function<Command(const Frame&)> fn) : fn_(std::move(fn)) {}
  Command decide(const Frame& frame) override { return fn_(frame); }

 private:
  std::function<Command(const Frame&)> fn_;
};

using TrajectorySink = std::function<void(Trajectory&&)>;

/// Random-direction crash collection: spawn, pick a uniform heading, fly
/// straight until contact, home back to the take-off point on odometry,
/// repeat; respawn when homing fails. Stops after n_env_trial crashes.
/// Flights that never touch anything within max_trajectory_ticks are
/// discarded and tallied. Throws CollectError when the attempt budget runs
/// out (a plan with no reachable walls).
CollectStats collect_random(const world::FloorPlan& plan, const CollectConfig& cfg, const TrajectorySink& sink);
std::vector<Trajectory> collect_random(const world::FloorPlan& plan, const CollectConfig& cfg,
                                       CollectStats* stats = nullptr);

/// Same episode structure with flight commands from `policy`. Flights that
/// survive max_trajectory_ticks are kept with ended_in_collision = false.
/// Collection ends after n_env_trial recorded trajectories of either kind.
CollectStats collect_with_policy(const world::FloorPlan& plan, const CollectConfig& cfg, FramePolicy& policy,
                                 const TrajectorySink& sink);
std::vector<Trajectory> collect_with_policy(const world::FloorPlan& plan, const CollectConfig& cfg,
                                            FramePolicy& policy, CollectStats* stats = nullptr);

}  // namespace crashnav::collect
