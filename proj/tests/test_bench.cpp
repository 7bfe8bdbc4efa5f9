#include "crashnav/bench/bench.hpp"
#include "crashnav/bench/table.hpp"
#include "crashnav/world/floorplan_io.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace crashnav;
using bench::PolicyKind;
using bench::Termination;
using world::Pose;
using world::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;

// A net that ignores its input: P(S) is sigmoid(bias gap) on every crop.
learn::NetworkParams<float> constant_net(float positive_minus_negative) {
  auto p = learn::NetworkParams<float>::zeros(oracle::toy_spec());
  p.biases.back()(0) = positive_minus_negative;
  return p;
}

bench::TrialArtifacts artifacts(const world::FloorPlan& plan, const learn::NetworkParams<float>* params) {
  bench::TrialArtifacts a;
  a.plan = &plan;
  a.params = params;
  a.noise = vehicle::NoiseModel::none();
  a.camera = {1.6, 16, 16};
  return a;
}

bench::TrialSpec spec_at(const Pose& start, PolicyKind kind = PolicyKind::Learned) {
  bench::TrialSpec s;
  s.plan = "test";
  s.policy = kind;
  s.start = start;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

policy::Telemetry at(double x, double y, double heading) {
  policy::Telemetry t;
  t.pose = Pose(x, y, heading);
  return t;
}

bench::Cell cell(const std::string& env, const std::string& method, std::vector<double> distances) {
  bench::Cell c{env, method, {}, 0, 0};
  std::uint64_t seed = 1;
  for (double d : distances) c.runs.push_back({seed++, Pose(), d, d / 0.6, Termination::Collision, false});
  c.recompute();
  return c;
}

}  // namespace

TEST(Trial, ForwardIntoNearWallCollides) {
  const auto plan = oracle::box_plan(10, 10);
  const auto net = constant_net(6.0f);
  const auto r = bench::run_trial(spec_at(Pose(10 - vehicle::kDroneRadius - 0.2, 5, 0)), artifacts(plan, &net));
  EXPECT_EQ(r.termination, Termination::Collision);
  EXPECT_NEAR(r.distance_before_collision, 0.2, 1e-6);
  EXPECT_DOUBLE_EQ(r.time_before_collision, r.ticks * vehicle::kTickSeconds);
}

TEST(Trial, SpinningInPlaceEndsAtTheWindow) {
  const auto plan = oracle::box_plan(10, 10);
  const auto net = constant_net(-6.0f);
  const auto spec = spec_at(Pose(5, 5, 0));
  const auto r = bench::run_trial(spec, artifacts(plan, &net));
  EXPECT_EQ(r.termination, Termination::SmallLoop);
  EXPECT_EQ(r.ticks, static_cast<int>(spec.small_loop.window / vehicle::kTickSeconds));
  EXPECT_LT(r.distance_before_collision, 0.1);
}

TEST(Trial, StraightFlightNeverLoops) {
  const auto plan = world::resolve_plan("hallway");
  const auto net = constant_net(6.0f);
  const auto r = bench::run_trial(spec_at(Pose(1, 1, 0)), artifacts(plan, &net));
  EXPECT_EQ(r.termination, Termination::Collision);
  EXPECT_NEAR(r.distance_before_collision, 40 - 1 - vehicle::kDroneRadius, 1e-6);
}

TEST(Trial, TimeCapIsHonoured) {
  const auto plan = oracle::box_plan(10, 10);
  auto spec = spec_at(Pose(5, 5, 0), PolicyKind::External);
  spec.max_time = 3.0;
  spec.small_loop.window = 2.9;
  spec.small_loop.min_net_displacement = 0.0;  // never triggers
  baselines::CommandChannel ch;
  auto a = artifacts(plan, nullptr);
  a.channel = &ch;
  const auto r = bench::run_trial(spec, a);
  EXPECT_EQ(r.termination, Termination::TimeCap);
  EXPECT_EQ(r.ticks, 30);
  EXPECT_EQ(r.time_before_collision, 3.0);
}

TEST(Trial, MissingArtifactsAreConfigErrors) {
  const auto plan = oracle::box_plan(4, 4);
  EXPECT_THROW(bench::run_trial(spec_at(Pose(2, 2, 0)), artifacts(plan, nullptr)), bench::ConfigError);
  EXPECT_THROW(bench::run_trial(spec_at(Pose(2, 2, 0), PolicyKind::External), artifacts(plan, nullptr)),
               bench::ConfigError);
  auto bad = spec_at(Pose(2, 2, 0), PolicyKind::DepthOracle);
  bad.small_loop.window = bad.max_time;
  EXPECT_THROW(bench::run_trial(bad, artifacts(plan, nullptr)), bench::ConfigError);
}

TEST(Trial, ReplayIsDeterministic) {
  const auto plan = world::resolve_plan("office_floor");
  auto spec = spec_at(Pose(3, 3, 0.2), PolicyKind::External);
  spec.seed = 9;
  auto a = artifacts(plan, nullptr);
  a.noise = vehicle::NoiseModel{};
  std::vector<std::optional<baselines::ExternalCommand>> timeline(200);
  timeline[0] = baselines::ExternalCommand(0.8, 0.0);
  timeline[40] = baselines::ExternalCommand(0.5, 0.6);
  timeline[90] = baselines::ExternalCommand(1.0, -0.2);
  const auto r1 = bench::replay_external(spec, a, timeline);
  const auto r2 = bench::replay_external(spec, a, timeline);
  EXPECT_EQ(bench::summarize(r1, 9), bench::summarize(r2, 9));
  ASSERT_EQ(r1.telemetry.size(), r2.telemetry.size());
  for (std::size_t i = 0; i < r1.telemetry.size(); ++i) EXPECT_EQ(r1.telemetry[i].pose, r2.telemetry[i].pose);
}

TEST(SmallLoop, StayedWithinChecksEveryPosition) {
  const std::vector<Vec2> out_and_back = {{0, 0}, {0.3, 0}, {0.6, 0}, {0.3, 0}, {0.05, 0}};
  EXPECT_FALSE(bench::stayed_within(out_and_back, 0, 0.5));
  EXPECT_TRUE(bench::stayed_within(out_and_back, 3, 0.5));
  const std::vector<Vec2> jiggle = {{1, 1}, {1.2, 1}, {1, 1.3}, {0.8, 1.1}};
  EXPECT_TRUE(bench::stayed_within(jiggle, 0, 0.5));
  EXPECT_FALSE(bench::stayed_within(jiggle, 0, 0.3));
}

TEST(Turnarounds, CountsReversalsNearDeadEnds) {
  const std::vector<Vec2> ends = {{0, 1}, {40, 1}};
  std::vector<policy::Telemetry> tel;
  // Fly east into the far dead end, turn around over 3 s, fly back west
  // into the near one and turn again.
  for (double x = 30; x < 39; x += 0.06) tel.push_back(at(x, 1, 0));
  for (int k = 0; k <= 30; ++k) tel.push_back(at(39, 1, kPi * k / 30));
  for (double x = 39; x > 1; x -= 0.06) tel.push_back(at(x, 1, kPi));
  for (int k = 0; k <= 30; ++k) tel.push_back(at(1, 1, kPi - kPi * k / 30));
  EXPECT_EQ(bench::count_turnarounds(tel, ends, 1.5, 150 * kPi / 180, 10.0), 2);
  // A slow reversal that takes longer than the window does not count.
  std::vector<policy::Telemetry> slow;
  for (double x = 30; x < 39; x += 0.06) slow.push_back(at(x, 1, 0));
  for (int k = 0; k <= 300; ++k) slow.push_back(at(39, 1, kPi * k / 300));
  EXPECT_EQ(bench::count_turnarounds(slow, ends, 1.5, 150 * kPi / 180, 10.0), 0);
}

TEST(Turnarounds, WobbleOnTheZoneEdgeIsOneVisit) {
  std::vector<policy::Telemetry> tel;
  for (int k = 0; k < 6; ++k) {
    tel.push_back(at(38.4, 1, 0));    // just outside 1.5 m
    tel.push_back(at(38.6, 1, kPi));  // just inside, reversed
  }
  EXPECT_EQ(bench::count_turnarounds(tel, {{40, 1}}, 1.5, 150 * kPi / 180, 10.0), 1);
  // Leaving beyond twice the radius re-arms the zone.
  tel.push_back(at(36.0, 1, 0));
  tel.push_back(at(38.6, 1, 0));
  tel.push_back(at(38.7, 1, kPi));
  EXPECT_EQ(bench::count_turnarounds(tel, {{40, 1}}, 1.5, 150 * kPi / 180, 10.0), 2);
}

TEST(Ordering, StrictMeansPerEnvironment) {
  bench::BenchmarkTable t;
  t.cells = {cell("a", "Learned", {30}), cell("a", "DepthOracle", {20}), cell("a", "BestStraight", {10}),
             cell("b", "Learned", {20}), cell("b", "DepthOracle", {20}), cell("b", "BestStraight", {10})};
  const auto r = bench::ordering_report(t);
  ASSERT_EQ(r.environments, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.ordered, (std::vector<bool>{true, false}));
  EXPECT_EQ(r.count, 1);
  EXPECT_DOUBLE_EQ(r.learned_over_depth[0], 1.5);
  EXPECT_DOUBLE_EQ(r.median_ratio, 1.25);
  t.cells.pop_back();
  EXPECT_THROW(bench::ordering_report(t), bench::ConfigError);
}

TEST(Benchmark, SingleCellHasFiveRuns) {
  bench::BenchmarkConfig cfg;
  cfg.environments = {"glass_door"};
  cfg.methods = {PolicyKind::DepthOracle};
  cfg.max_time = 30.0;
  const auto res = bench::run_benchmark(cfg);
  ASSERT_FALSE(res.partial) << res.error;
  ASSERT_EQ(res.table.cells.size(), 1u);
  const auto& c = res.table.cells[0];
  EXPECT_EQ(c.runs.size(), 5u);
  std::set<std::pair<double, double>> starts;
  for (const auto& r : c.runs) {
    starts.insert({r.start.x, r.start.heading});
    if (r.termination == Termination::Collision) EXPECT_LE(r.time, cfg.max_time);
  }
  EXPECT_EQ(starts.size(), 5u);
}

TEST(Benchmark, MissingCheckpointGivesPartialResult) {
  bench::BenchmarkConfig cfg;
  cfg.environments = {"hallway"};
  cfg.methods = {PolicyKind::Learned};
  const auto res = bench::run_benchmark(cfg);
  EXPECT_TRUE(res.partial);
  EXPECT_FALSE(res.error.empty());
}

TEST(Benchmark, ConfigAndResultsRoundTrip) {
  bench::BenchmarkConfig cfg;
  cfg.environments = {"hallway", "wean"};
  cfg.methods = {PolicyKind::BestStraight};
  cfg.seeds = {3, 4};
  cfg.max_time = 20.0;
  cfg.small_loop.window = 5.0;
  cfg.policy.alpha = 0.55;
  cfg.depth.use_first_opaque = false;
  const auto doc = bench::config_to_json(cfg);
  EXPECT_EQ(bench::config_to_json(bench::config_from_json(doc)), doc);

  const auto res = bench::run_benchmark(cfg);
  const auto table = bench::table_from_json(bench::results_to_json(res, cfg));
  ASSERT_EQ(table.cells.size(), res.table.cells.size());
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    EXPECT_EQ(table.cells[i].runs, res.table.cells[i].runs);
    EXPECT_EQ(table.cells[i].mean_distance, res.table.cells[i].mean_distance);
  }
  nlohmann::json broken = doc;
  broken["methods"] = {"Teleporter"};
  EXPECT_THROW(bench::config_from_json(broken), bench::ConfigError);
}

TEST(Benchmark, RepeatedRunsWriteIdenticalFiles) {
  bench::BenchmarkConfig cfg;
  cfg.environments = {"office_floor", "glass_door"};
  cfg.methods = {PolicyKind::BestStraight, PolicyKind::DepthOracle};
  cfg.seeds = {1, 2};
  cfg.max_time = 20.0;
  const auto dir = std::filesystem::temp_directory_path() / "crashnav_tests";
  std::filesystem::create_directories(dir);
  std::filesystem::remove(dir / "det_a.json");
  std::filesystem::remove(dir / "det_b.json");
  bench::write_results(dir / "det_a", bench::run_benchmark(cfg), cfg);
  bench::write_results(dir / "det_b", bench::run_benchmark(cfg), cfg);
  EXPECT_EQ(slurp(dir / "det_a.json"), slurp(dir / "det_b.json"));
  EXPECT_EQ(slurp(dir / "det_a.txt"), slurp(dir / "det_b.txt"));
}

TEST(Table, RenderShowsReferenceValues) {
  bench::BenchmarkTable t;
  t.cells = {cell("glass_door", "Learned", {12.5}), cell("hallway", "Learned", {90})};
  const auto text = bench::render_table(t);
  EXPECT_NE(text.find("27.9"), std::string::npos);
  EXPECT_NE(text.find("115.2"), std::string::npos);
  const auto ref = bench::reference_value("hallway", "Learned");
  ASSERT_TRUE(ref);
  EXPECT_EQ(ref->first, 115.2);
  EXPECT_EQ(ref->second, 210.0);
  EXPECT_EQ(*bench::reference_value("glass_door", "Learned"), std::make_pair(27.9, 56.6));
}
