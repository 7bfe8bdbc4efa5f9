#include "crashnav/learn/image.hpp"
#include "crashnav/policy/policy.hpp"
#include "crashnav/world/floorplan_io.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace crashnav;
using policy::Mode;
using policy::PolicyConfig;
using policy::PolicyState;
using policy::Probabilities;

namespace {

// 16x16 net whose every weight is mirror-symmetric in x, so mirrored inputs
// give identical logits.
learn::NetworkParams<float> mirror_symmetric_net(std::uint64_t seed) {
  using L = learn::LayerSpec;
  learn::NetSpec spec;
  spec.input_height = spec.input_width = 16;
  spec.layers = {L::conv(2, 3, 1), L::relu(), L::flatten(), L::dense(2)};
  auto p = learn::NetworkParams<float>::he_init(spec, seed);
  auto& conv = p.weights[0];
  for (int oc = 0; oc < 2; ++oc)
    for (int ky = 0; ky < 3; ++ky) conv(oc, ky * 3 + 2) = conv(oc, ky * 3);
  auto& dense = p.weights[3];
  constexpr int w = 14;
  for (int o = 0; o < 2; ++o)
    for (int c = 0; c < 2; ++c)
      for (int y = 0; y < w; ++y)
        for (int x = 0; x < w / 2; ++x) dense(o, (c * w + y) * w + (w - 1 - x)) = dense(o, (c * w + y) * w + x);
  p.biases[3](0) = 0.3f;
  return p;
}

world::Frame mirrored_frame(int w, int h, std::mt19937_64& rng) {
  world::Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w / 2; ++x) f.at(x, y) = f.at(w - 1 - x, y) = static_cast<std::uint8_t>(rng() & 0xFF);
  return f;
}

// Box average of a 32x32 frame's columns [x0, x0 + cw) onto 16x16, written
// out directly for the case of integer block sizes.
std::vector<double> block_average(const world::Frame& f, int x0, int cw) {
  const int bx = cw / 16, by = f.height / 16;
  std::vector<double> out;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      double sum = 0;
      for (int j = 0; j < by; ++j)
        for (int i = 0; i < bx; ++i) sum += f.at(x0 + x * bx + i, y * by + j);
      out.push_back(sum / (bx * by) / 255.0 - 0.5);
    }
  return out;
}

double reference_p(const learn::NetworkParams<double>& params, const std::vector<double>& input) {
  const auto l = oracle::reference_logits(params, input);
  return 1.0 / (1.0 + std::exp(l[1] - l[0]));
}

}  // namespace

TEST(Decide, SymmetricConfidentFliesStraight) {
  const PolicyConfig cfg;
  const auto d = policy::decide({}, {0.4, 0.9, 0.4}, cfg);
  EXPECT_EQ(d.command, vehicle::Command(cfg.beta, 0.0));
  EXPECT_EQ(d.state.mode, Mode::Forward);
}

TEST(Decide, LowStraightWithRightPreferredTurnsRight) {
  const PolicyConfig cfg;
  const auto d = policy::decide({}, {0.2, 0.3, 0.8}, cfg);
  EXPECT_EQ(d.command, vehicle::Command(0.0, -cfg.turn_rate));
  EXPECT_EQ(d.state.mode, Mode::TurningRight);
  EXPECT_EQ(d.state.ticks_in_turn, 1);
}

TEST(Decide, TurnEndsOnFirstConfidentTick) {
  const PolicyConfig cfg;
  PolicyState s{Mode::TurningRight, 4};
  for (double ps : {0.3, 0.4, 0.5, 0.7}) {
    const auto d = policy::decide(s, {0.5, ps, 0.2}, cfg);
    if (ps > cfg.alpha) {
      EXPECT_EQ(d.state.mode, Mode::Forward);
      EXPECT_EQ(d.state.ticks_in_turn, 0);
      EXPECT_EQ(d.command.linear(), cfg.beta);
    } else {
      EXPECT_EQ(d.state.mode, Mode::TurningRight) << "direction flipped at P(S) " << ps;
      EXPECT_EQ(d.command.linear(), 0.0);
    }
    s = d.state;
  }
}

TEST(Decide, TieTurnsLeft) {
  const auto d = policy::decide({}, {0.3, 0.1, 0.3}, PolicyConfig{});
  EXPECT_EQ(d.state.mode, Mode::TurningLeft);
  EXPECT_GT(d.command.angular(), 0.0);
}

TEST(Decide, SteeringSignFollowsSaferSide) {
  const PolicyConfig cfg;
  // Positive world yaw is counter-clockwise, i.e. toward the left view.
  EXPECT_GT(policy::decide({}, {0.9, 0.8, 0.2}, cfg).command.angular(), 0.0);
  EXPECT_LT(policy::decide({}, {0.2, 0.8, 0.9}, cfg).command.angular(), 0.0);
  EXPECT_NEAR(policy::decide({}, {0.1, 0.8, 0.6}, cfg).command.angular(), -cfg.k_yaw * 0.5, 1e-12);
}

TEST(Decide, ModeSoundnessOverRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PolicyConfig cfg;
  cfg.max_turn_ticks = 7;
  PolicyState s;
  for (int t = 0; t < 20000; ++t) {
    const Probabilities p{u(rng), u(rng), u(rng)};
    const auto d = policy::decide(s, p, cfg);
    const bool flying = d.command.linear() > 0;
    if (!d.forced_forward) EXPECT_EQ(flying, p.straight > cfg.alpha);
    EXPECT_EQ(flying, d.state.mode == Mode::Forward);
    if (d.state.mode == Mode::Forward) EXPECT_EQ(d.state.ticks_in_turn, 0);
    if (s.mode != Mode::Forward && d.state.mode != Mode::Forward) EXPECT_EQ(d.state.mode, s.mode);
    EXPECT_EQ(policy::decide(s, p, cfg).command, d.command);  // pure
    s = d.state;
  }
}

TEST(Decide, LongTurnForcesOneForwardTick) {
  PolicyConfig cfg;
  cfg.max_turn_ticks = 3;
  PolicyState s;
  const Probabilities stuck{0.1, 0.1, 0.2};
  int forced_at = -1;
  for (int t = 0; t < 5; ++t) {
    const auto d = policy::decide(s, stuck, cfg);
    if (d.forced_forward) {
      forced_at = t;
      EXPECT_EQ(d.command, vehicle::Command(cfg.beta, 0.0));
      EXPECT_EQ(d.state.mode, Mode::Forward);
    }
    s = d.state;
  }
  EXPECT_EQ(forced_at, 3);
  EXPECT_EQ(s.mode, Mode::TurningRight);  // the next low tick turns again
}

TEST(Config, RejectsOutOfRangeFields) {
  for (auto mutate : std::vector<std::function<void(PolicyConfig&)>>{
           [](auto& c) { c.alpha = 1.0; }, [](auto& c) { c.beta = 0.0; },
           [](auto& c) { c.beta = vehicle::kMaxLinear + 0.1; }, [](auto& c) { c.crop_fraction = 0.0; },
           [](auto& c) { c.crop_fraction = 1.5; }, [](auto& c) { c.max_turn_ticks = 0; }}) {
    PolicyConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  }
}

TEST(ThreeWay, MirrorSymmetricInputsGiveEqualSides) {
  const auto params = mirror_symmetric_net(5);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const auto p = policy::three_way_probabilities(params, mirrored_frame(32, 32, rng), 0.5);
    EXPECT_NEAR(p.left, p.right, 1e-6);
  }
}

TEST(ThreeWay, FullWidthCropsAreTheWholeFrame) {
  const auto params = learn::NetworkParams<float>::he_init(oracle::toy_spec(), 4);
  std::mt19937_64 rng(1);
  world::Frame f(32, 24);
  for (auto& px : f.pixels) px = static_cast<std::uint8_t>(rng() & 0xFF);
  const auto p = policy::three_way_probabilities(params, f, 1.0);
  EXPECT_EQ(p.left, p.straight);
  EXPECT_EQ(p.right, p.straight);
}

TEST(ThreeWay, MatchesReferenceOnCropsAndFullFrame) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    auto dparams = learn::NetworkParams<double>::he_init(oracle::toy_spec(), rng());
    for (auto& b : dparams.biases) b.setRandom();
    const auto params = dparams.cast<float>();
    world::Frame f(32, 32);
    for (auto& px : f.pixels) px = static_cast<std::uint8_t>(rng() & 0xFF);
    const auto got = policy::three_way_probabilities(params, f, 0.5);
    const auto ref_params = params.cast<double>();
    EXPECT_NEAR(got.left, reference_p(ref_params, block_average(f, 0, 16)), 1e-6);
    EXPECT_NEAR(got.straight, reference_p(ref_params, block_average(f, 0, 32)), 1e-6);
    EXPECT_NEAR(got.right, reference_p(ref_params, block_average(f, 16, 16)), 1e-6);
  }
}

TEST(PolicyTick, ScriptedSourceIsDecideApplied) {
  const auto plan = oracle::box_plan(12, 12, 0.1);
  std::vector<Probabilities> script;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 60; ++t) script.push_back({u(rng), u(rng), u(rng)});
  std::size_t next = 0;
  const policy::ProbabilitySource source = [&](const world::Frame&) { return script[next++]; };
  const PolicyConfig cfg;
  vehicle::Sim sim(plan, world::Pose(6, 6, 0), vehicle::NoiseModel{}, 2, world::Camera{1.6, 16, 16});
  PolicyState state, expected_state;
  for (int t = 0; t < 60 && !sim.collided(); ++t) {
    const auto expected = policy::decide(expected_state, script[t], cfg);
    expected_state = expected.state;
    const auto tel = policy::run_policy_tick(sim, source, state, cfg);
    EXPECT_EQ(tel.command, expected.command);
    EXPECT_EQ(state, expected.state);
    EXPECT_EQ(*tel.probs, script[t]);
    EXPECT_EQ(tel.tick, t);
  }
}

TEST(PolicyTick, SameSeedSameTelemetry) {
  const auto plan = world::resolve_plan("office_floor");
  const auto params = learn::NetworkParams<float>::he_init(learn::NetSpec::default_spec(), 9);
  const auto run = [&] {
    vehicle::Sim sim(plan, world::Pose(3, 3, 0.4), vehicle::NoiseModel{}, 5);
    PolicyState state;
    std::vector<std::pair<world::Pose, vehicle::Command>> out;
    for (int t = 0; t < 80 && !sim.collided(); ++t) {
      const auto tel = policy::run_policy_tick(sim, params, state, PolicyConfig{});
      out.emplace_back(tel.pose, tel.command);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}
