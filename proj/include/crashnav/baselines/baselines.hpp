#pragma once

#include "crashnav/vehicle/vehicle.hpp"
#include "crashnav/world/raycast.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <vector>

namespace crashnav::baselines {

using vehicle::Command;

struct DepthPolicyConfig {
  /// True reproduces a depth estimator fooled by glass: sectors read the
  /// first opaque surface behind any panel.
  bool use_first_opaque = true;
  int n_sectors = 9;
  double steer_gain = 1.0;      // rad/s at the outermost sector
  double stop_threshold = 1.2;  // m, center-sector depth below which the drone turns in place
  double cruise_speed = 0.6;    // m/s
  double turn_rate = 0.9;       // rad/s
  int n_rays = 90;
  double max_range = 10.0;      // m
  double fov = 92.0 * 3.14159265358979323846 / 180.0;
  /// Sector depths measure how far a disc of this radius could travel
  /// along each ray before touching a scanned point; 0 uses bare ray depths.
  double body_radius = 0.25;

  /// Throws std::invalid_argument unless n_sectors is odd and >= 3 and the
  /// scan parameters are usable.
  void validate() const;
};

/// Sector depths, leftmost sector first. Rays map to sectors by
/// floor(i * n_sectors / n_rays); a sector reads the minimum over its rays.
std::vector<double> sector_depths(const world::DepthScan& scan, const DepthPolicyConfig& cfg);

/// Deepest sector; ties (within 1e-9 m) go to the sector nearest the
/// center, then to the left one.
int deepest_sector(const std::vector<double>& sectors);

/// Center sector clear of stop_threshold: cruise and steer by
/// steer_gain * (center - deepest) / center, which is positive (left) when
/// the deepest sector is left of center. Otherwise turn in place toward the
/// deepest sector, left when the center itself is deepest. Pure function.
Command depth_policy_decide(const world::DepthScan& scan, const DepthPolicyConfig& cfg);

/// Scan the depth policy consumes at `pose`.
world::DepthScan depth_scan(const world::FloorPlan& plan, const world::Pose& pose, const DepthPolicyConfig& cfg);

struct StraightOracleConfig {
  int k_headings = 36;
  int runs_per_heading = 5;
  double speed = 0.6;      // m/s
  double max_time = 300.0;  // s per rollout
  std::uint64_t seed = 1;
};

struct StraightOracleResult {
  double heading = 0.0;
  int index = 0;
  std::vector<double> mean_distances;  // per candidate heading, index k at angle 2*pi*k/k_headings
};

/// Open-loop straight rollouts from `start` for k uniformly spaced headings
/// (wrapped into [-pi, pi)); returns the heading with the largest mean
/// distance before contact. Means within 1e-9 of the best count as ties and
/// the lowest index wins. Uses ground truth geometry by design.
StraightOracleResult best_straight_heading(const world::FloorPlan& plan, const world::Vec2& start,
                                           const vehicle::NoiseModel& noise, const StraightOracleConfig& cfg = {});

/// Distance flown by one open-loop straight rollout until contact or the
/// time cap.
double straight_rollout_distance(const world::FloorPlan& plan, const world::Pose& start,
                                 const vehicle::NoiseModel& noise, double speed, double max_time,
                                 vehicle::Rng& rng);

/// One operator input sample.
class ExternalCommand {
 public:
  ExternalCommand() = default;
  ExternalCommand(double linear_axis, double angular_axis, double timestamp = 0.0);

  double linear_axis() const { return linear_; }
  double angular_axis() const { return angular_; }
  double timestamp() const { return timestamp_; }
  /// Axes scaled to vehicle limits.
  Command to_command() const { return Command(linear_ * vehicle::kMaxLinear, angular_ * vehicle::kMaxAngular); }

  friend bool operator==(const ExternalCommand&, const ExternalCommand&) = default;

 private:
  double linear_ = 0.0;   // [0, 1]
  double angular_ = 0.0;  // [-1, 1], positive turns left
  double timestamp_ = 0.0;
};

/// Single-producer single-consumer channel with last-value-wins semantics.
class CommandChannel {
 public:
  void push(const ExternalCommand& cmd);
  /// Most recent command, if any was ever pushed.
  std::optional<ExternalCommand> latest() const;
  void disconnect() { disconnected_.store(true); }
  bool disconnected() const { return disconnected_.load(); }

 private:
  mutable std::mutex mu_;
  std::optional<ExternalCommand> latest_;
  std::atomic<bool> disconnected_{false};
};

/// Per-tick decision from operator input: zero-order hold on the latest
/// command, zero before any arrives and after a disconnect.
class ExternalPolicy {
 public:
  explicit ExternalPolicy(const CommandChannel& channel) : channel_(&channel) {}
  Command next();
  bool disconnected() const { return channel_->disconnected(); }

 private:
  const CommandChannel* channel_;
};

}  // namespace crashnav::baselines
