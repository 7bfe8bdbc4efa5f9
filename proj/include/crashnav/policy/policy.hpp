#pragma once

#include "crashnav/collect/collect.hpp"
#include "crashnav/learn/network.hpp"
#include "crashnav/vehicle/vehicle.hpp"

#include <functional>
#include <optional>
#include <string>

namespace crashnav::policy {

using vehicle::Command;

/// Sign convention: the control law is written in "rightward" yaw, where a
/// positive value turns toward the right-hand view. World yaw (Command) is
/// counter-clockwise positive, so the policy negates it when issuing a
/// command. TurningRight therefore emits angular = -turn_rate.
struct PolicyConfig {
  double alpha = 0.5;          // P(S) threshold between flying and turning
  double beta = 0.6;           // cruise speed, m/s
  double k_yaw = 1.0;          // rad/s per unit of P(R) - P(L)
  double turn_rate = 0.9;      // in-place turn speed, rad/s
  double crop_fraction = 0.5;  // width fraction of each side crop
  int max_turn_ticks = 120;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class Mode : std::uint8_t { Forward = 0, TurningLeft = 1, TurningRight = 2 };
std::string to_string(Mode m);

struct PolicyState {
  Mode mode = Mode::Forward;
  int ticks_in_turn = 0;

  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

struct Probabilities {
  double left = 0.5;
  double straight = 0.5;
  double right = 0.5;

  friend bool operator==(const Probabilities&, const Probabilities&) = default;
};

struct Decision {
  Command command;
  PolicyState state;
  /// Set on the single anti-deadlock tick that leaves a turn which ran past
  /// max_turn_ticks. That tick flies forward regardless of P(S).
  bool forced_forward = false;
};

/// P(L), P(S), P(R): the classifier's go-straight probability on the left
/// crop, the full frame and the right crop.
Probabilities three_way_probabilities(const learn::NetworkParams<float>& params, const world::Frame& frame,
                                      double crop_fraction);

/// Forward mode flies at beta while P(S) > alpha and steers toward the side
/// with the higher probability; otherwise it stops and turns in place toward
/// that side (ties turn left). A turn keeps its direction until P(S) clears
/// alpha. Pure function.
Decision decide(const PolicyState& state, const Probabilities& p, const PolicyConfig& cfg);

/// Per-tick record shared by policy runs, bench trials and the live gateway.
struct Telemetry {
  int tick = 0;  // tick at which the command was issued
  world::Pose pose;  // true pose before the command
  std::optional<Probabilities> probs;
  std::optional<Mode> mode;
  Command command;
  bool forced_forward = false;
  bool collided = false;  // the step that followed made contact
};

/// Source of probability triples; the learned network or a scripted stand-in.
using ProbabilitySource = std::function<Probabilities(const world::Frame&)>;

ProbabilitySource network_source(const learn::NetworkParams<float>& params, double crop_fraction);

/// Reads the current frame, decides, and steps the simulation once. A
/// collision is reported through Telemetry::collided.
Telemetry run_policy_tick(vehicle::Sim& sim, const ProbabilitySource& source, PolicyState& state,
                          const PolicyConfig& cfg);
Telemetry run_policy_tick(vehicle::Sim& sim, const learn::NetworkParams<float>& params, PolicyState& state,
                          const PolicyConfig& cfg);

/// Adapter for policy-driven collection.
class LearnedFramePolicy final : public collect::FramePolicy {
 public:
  LearnedFramePolicy(const learn::NetworkParams<float>& params, PolicyConfig cfg);
  void reset() override { state_ = {}; }
  Command decide(const world::Frame& frame) override;

 private:
  const learn::NetworkParams<float>* params_;
  PolicyConfig cfg_;
  PolicyState state_;
};

}  // namespace crashnav::policy
