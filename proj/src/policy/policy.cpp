#include "crashnav/policy/policy.hpp"

#include "crashnav/learn/image.hpp"

#include <array>
#include <stdexcept>

namespace crashnav::policy {

void PolicyConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("PolicyConfig: alpha must be in (0, 1)");
  if (!(beta > 0.0 && beta <= vehicle::kMaxLinear)) throw std::invalid_argument("PolicyConfig: beta must be in (0, v_max]");
  if (!(k_yaw >= 0.0)) throw std::invalid_argument("PolicyConfig: k_yaw must be >= 0");
  if (!(turn_rate > 0.0 && turn_rate <= vehicle::kMaxAngular))
    throw std::invalid_argument("PolicyConfig: turn_rate must be in (0, omega_max]");
  if (!(crop_fraction > 0.0 && crop_fraction <= 1.0))
    throw std::invalid_argument("PolicyConfig: crop_fraction must be in (0, 1]");
  if (max_turn_ticks < 1) throw std::invalid_argument("PolicyConfig: max_turn_ticks must be >= 1");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Forward: return "Forward";
    case Mode::TurningLeft: return "TurningLeft";
    case Mode::TurningRight: return "TurningRight";
  }
  return "?";
}

Probabilities three_way_probabilities(const learn::NetworkParams<float>& params, const world::Frame& frame,
                                      double crop_fraction) {
  const learn::CropRect full = learn::CropRect::full(frame);
  const learn::CropRect left = learn::left_crop(frame, crop_fraction);
  const learn::CropRect right = learn::right_crop(frame, crop_fraction);
  auto same = [](const learn::CropRect& a, const learn::CropRect& b) {
    return a.x0 == b.x0 && a.y0 == b.y0 && a.width == b.width && a.height == b.height;
  };
  if (same(left, full) && same(right, full)) {
    // Batched GEMM may round columns differently; a single pass keeps the
    // three values identical.
    const double p = learn::forward(params, frame).p_straight;
    return {p, p, p};
  }
  const std::array<const world::Frame*, 3> frames{&frame, &frame, &frame};
  const std::array<learn::CropRect, 3> crops{left, full, right};
  const auto pred = learn::forward_many(params, frames, crops);
  return {pred[0].p_straight, pred[1].p_straight, pred[2].p_straight};
}

namespace {

double turn_yaw(Mode m, double rate) { return m == Mode::TurningLeft ? rate : -rate; }

}  // namespace

Decision decide(const PolicyState& state, const Probabilities& p, const PolicyConfig& cfg) {
  Decision d;
  if (p.straight > cfg.alpha) {
    // Rightward yaw k(P(R) - P(L)) expressed as world (CCW) yaw.
    d.command = Command(cfg.beta, -cfg.k_yaw * (p.right - p.left));
    d.state = {Mode::Forward, 0};
    return d;
  }
  if (state.mode == Mode::Forward) {
    const Mode m = p.right > p.left ? Mode::TurningRight : Mode::TurningLeft;
    d.command = Command(0.0, turn_yaw(m, cfg.turn_rate));
    d.state = {m, 1};
    return d;
  }
  if (state.ticks_in_turn >= cfg.max_turn_ticks) {
    d.command = Command(cfg.beta, 0.0);
    d.state = {Mode::Forward, 0};
    d.forced_forward = true;
    return d;
  }
  d.command = Command(0.0, turn_yaw(state.mode, cfg.turn_rate));
  d.state = {state.mode, state.ticks_in_turn + 1};
  return d;
}

ProbabilitySource network_source(const learn::NetworkParams<float>& params, double crop_fraction) {
  return [&params, crop_fraction](const world::Frame& f) { return three_way_probabilities(params, f, crop_fraction); };
}

Telemetry run_policy_tick(vehicle::Sim& sim, const ProbabilitySource& source, PolicyState& state,
                          const PolicyConfig& cfg) {
  Telemetry t;
  t.tick = sim.tick();
  t.pose = sim.state().pose;
  const Probabilities p = source(sim.frame());
  const Decision d = decide(state, p, cfg);
  state = d.state;
  t.probs = p;
  t.mode = d.state.mode;
  t.command = d.command;
  t.forced_forward = d.forced_forward;
  t.collided = sim.advance(d.command).collided;
  return t;
}

Telemetry run_policy_tick(vehicle::Sim& sim, const learn::NetworkParams<float>& params, PolicyState& state,
                          const PolicyConfig& cfg) {
  return run_policy_tick(sim, network_source(params, cfg.crop_fraction), state, cfg);
}

LearnedFramePolicy::LearnedFramePolicy(const learn::NetworkParams<float>& params, PolicyConfig cfg)
    : params_(&params), cfg_(cfg) {
  cfg_.validate();
}

Command LearnedFramePolicy::decide(const world::Frame& frame) {
  const Decision d = policy::decide(state_, three_way_probabilities(*params_, frame, cfg_.crop_fraction), cfg_);
  state_ = d.state;
  return d.command;
}

}  // namespace crashnav::policy
