#pragma once

#include "crashnav/world/floorplan.hpp"
#include "crashnav/world/render.hpp"

#include <optional>
#include <random>
#include <vector>

namespace crashnav::vehicle {

using world::Pose;
using world::Vec2;

inline constexpr double kMaxLinear = 1.0;   // m/s
inline constexpr double kMaxAngular = 1.2;  // rad/s
inline constexpr double kDroneRadius = 0.25;
inline constexpr double kTickSeconds = 0.1;

using Rng = std::mt19937_64;

/// Velocity command. Positive angular turns left (counter-clockwise, heading
/// increases). Values are clamped to the vehicle limits on construction.
class Command {
 public:
  Command() = default;
  Command(double linear, double angular)
      : linear_(std::clamp(linear, 0.0, kMaxLinear)), angular_(std::clamp(angular, -kMaxAngular, kMaxAngular)) {}

  double linear() const { return linear_; }
  double angular() const { return angular_; }

  friend bool operator==(const Command&, const Command&) = default;

 private:
  double linear_ = 0.0;
  double angular_ = 0.0;
};

struct NoiseModel {
  double heading_drift_std = 0.03;  // rad / sqrt(s)
  double speed_jitter_std = 0.10;   // fraction of commanded speed
  double odom_drift_std = 0.02;     // m / sqrt(s)
  double accel_noise_std = 0.2;     // m/s^2
  double accel_spike_mean = 8.0;    // m/s^2

  static NoiseModel none() { return {0.0, 0.0, 0.0, 0.0, 8.0}; }

  /// Throws std::invalid_argument when a std is negative or the spike is not
  /// separable from noise (spike_mean must exceed 6 sigma).
  void validate() const;
};

struct VehicleState {
  Pose pose;
  double linear_velocity = 0.0;
  double angular_velocity = 0.0;
  bool collided = false;
  std::optional<Vec2> last_contact_normal;
  int contact_segment = -1;
  /// Accumulated odometry position error (random walk).
  Vec2 odom_drift = Vec2::Zero();

  Pose odom_pose() const { return {pose.x + odom_drift.x(), pose.y + odom_drift.y(), pose.heading}; }
};

struct SensorReading {
  Pose odom_pose_estimate;
  double accel_magnitude = 0.0;
  std::optional<world::Frame> frame;  // rendered at the post-step pose when a camera is given
};

struct StepResult {
  VehicleState state;
  SensorReading reading;
};

/// Advances one tick of planar unicycle kinematics.
///
/// The command is perturbed (speed jitter, heading random walk), the
/// translation is swept against the plan and stopped at first contact, and
/// sensors are sampled. Contact sets `collided`, zeroes velocities and draws
/// the accelerometer around the spike mean; free flight draws |N(0, sigma)|.
/// Precondition: !state.collided and dt > 0.
StepResult step(const VehicleState& state, const Command& cmd, const world::FloorPlan& plan,
                const NoiseModel& noise, double dt, Rng& rng, const world::Camera* camera = nullptr);

/// Single-owner simulation handle: vehicle state, rng stream, tick counter
/// and the current first-person view.
class Sim {
 public:
  Sim(const world::FloorPlan& plan, const Pose& start, const NoiseModel& noise, std::uint64_t seed,
      const world::Camera& camera = {}, double dt = kTickSeconds);

  /// Frame rendered at the current pose.
  const world::Frame& frame() const { return frame_; }
  const VehicleState& state() const { return state_; }
  const world::FloorPlan& plan() const { return *plan_; }
  const world::Camera& camera() const { return camera_; }
  int tick() const { return tick_; }
  double dt() const { return dt_; }
  double elapsed() const { return tick_ * dt_; }
  bool collided() const { return state_.collided; }
  double last_accel() const { return last_accel_; }

  /// One tick under `cmd`. Precondition: !collided().
  const VehicleState& advance(const Command& cmd);

 private:
  const world::FloorPlan* plan_;
  NoiseModel noise_;
  world::Camera camera_;
  double dt_;
  Rng rng_;
  VehicleState state_;
  world::Frame frame_;
  int tick_ = 0;
  double last_accel_ = 0.0;
};

/// Lateral deviation statistics of open-loop straight flight in free space.
struct DriftStats {
  std::vector<double> deviations;  // signed lateral offset per run, m
  double median_abs = 0.0;
  double mean_abs = 0.0;
  double max_abs = 0.0;
};

DriftStats straight_line_drift(double distance, const NoiseModel& noise, int n_runs, std::uint64_t seed,
                               double speed = kMaxLinear, double dt = kTickSeconds);

}  // namespace crashnav::vehicle
