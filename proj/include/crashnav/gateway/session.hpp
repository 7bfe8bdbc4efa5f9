#pragma once

#include "crashnav/bench/bench.hpp"
#include "crashnav/gateway/protocol.hpp"

#include <filesystem>
#include <functional>
#include <memory>

namespace crashnav::gateway {

/// Realtime: the host calls tick() at tick_rate. Lockstep: the session
/// advances one tick per CommandMsg during an operator trial, and per
/// ControlMsg step otherwise; used for deterministic loopback runs.
enum class Pacing : std::uint8_t { Realtime = 0, Lockstep = 1 };

struct SessionConfig {
  std::string default_plan = "hallway";
  Pacing pacing = Pacing::Realtime;
  double tick_rate = 10.0;
  /// Operator trials are appended to <results_stem>.json / .txt; empty
  /// disables recording.
  std::filesystem::path results_stem;
  const learn::NetworkParams<float>* params = nullptr;  // needed for Spectate
  policy::PolicyConfig policy;
  vehicle::NoiseModel noise;
  world::Camera camera;
  double max_time = 300.0;
  bench::SmallLoop small_loop;
  std::uint64_t default_seed = 1;
};

/// Resolves a plan name; throws for unknown names.
using PlanProvider = std::function<const world::FloorPlan&(const std::string&)>;

/// Transport-independent session state machine. Inputs are decoded client
/// messages and host ticks; outputs are the messages to broadcast to every
/// client attached to the session. In operator modes FrameMsg carries only
/// the frame and the HUD.
class Session {
 public:
  Session(std::uint64_t id, SessionConfig cfg, PlanProvider plans, std::vector<std::string> plan_names = {});

  std::uint64_t id() const { return id_; }
  ServerHello hello() const;

  std::vector<Message> handle(const Message& in);
  /// Realtime pacing: one simulation tick (or one idle frame in the lobby).
  std::vector<Message> tick();
  /// The operating client went away: an operator trial ends as Disconnect.
  std::vector<Message> disconnect();

  bool closed() const { return closed_; }
  bool trial_active() const { return runner_ != nullptr; }
  std::optional<SessionMode> mode() const { return runner_ ? std::optional(mode_) : std::nullopt; }
  /// Results of finished trials in this session, practice included.
  const std::vector<bench::TrialResult>& finished() const { return finished_; }

 private:
  std::vector<Message> advance();
  std::vector<Message> finish();
  FrameMsg frame_msg(const world::Frame& f, const Hud& hud);
  void ensure_idle_view();

  std::uint64_t id_;
  SessionConfig cfg_;
  PlanProvider plans_;
  std::vector<std::string> plan_names_;
  std::int64_t frame_counter_ = 0;
  bool closed_ = false;

  std::optional<world::Frame> idle_frame_;
  std::string plan_name_;
  SessionMode mode_ = SessionMode::HumanTrial;
  std::uint64_t runner_seed_ = 0;
  std::unique_ptr<baselines::CommandChannel> channel_;
  std::unique_ptr<bench::TrialRunner> runner_;
  std::vector<bench::TrialResult> finished_;
};

}  // namespace crashnav::gateway
