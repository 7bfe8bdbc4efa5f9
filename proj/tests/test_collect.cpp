#include "crashnav/collect/archive.hpp"
#include "crashnav/collect/collect.hpp"
#include "crashnav/world/floorplan_io.hpp"
#include "crashnav/world/raycast.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace crashnav;
using collect::CollectConfig;
using collect::Trajectory;
using vehicle::Command;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "crashnav_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

CollectConfig small_config(int n, std::uint64_t seed = 1) {
  CollectConfig cfg;
  cfg.n_env_trial = n;
  cfg.seed = seed;
  cfg.camera.width = cfg.camera.height = 16;
  return cfg;
}

}  // namespace

TEST(CollectRandom, UnitSquareGivesExactlyFiveCrashes) {
  const auto plan = oracle::box_plan(1.0, 1.0);
  collect::CollectStats stats;
  const auto trajs = collect::collect_random(plan, small_config(5), &stats);
  ASSERT_EQ(trajs.size(), 5u);
  for (const auto& t : trajs) {
    EXPECT_TRUE(t.ended_in_collision);
    ASSERT_TRUE(t.contact_tick);
    EXPECT_EQ(*t.contact_tick, static_cast<int>(t.records.size()) - 1);
    EXPECT_EQ(t.collection_mode, collect::CollectionMode::RandomStraight);
  }
  EXPECT_EQ(stats.crashes, 5);
}

TEST(CollectRandom, ZeroNoiseLengthMatchesDistanceToWall) {
  const auto plan = oracle::box_plan(6.0, 4.0, 0.5);
  CollectConfig cfg = small_config(20, 3);
  cfg.noise = vehicle::NoiseModel::none();
  for (const auto& t : collect::collect_random(plan, cfg)) {
    const auto& start = t.records.front().true_pose;
    const double d = oracle::disc_contact_distance(plan, start.position(), start.forward(), vehicle::kDroneRadius);
    const double ticks = d / (cfg.flight_speed * vehicle::kTickSeconds);
    EXPECT_NEAR(static_cast<double>(t.records.size()), ticks, 1.0) << "distance " << d;
    for (const auto& r : t.records) EXPECT_EQ(r.command, Command(cfg.flight_speed, 0.0));
  }
}

TEST(CollectRandom, HugeEpsilonMakesBacktrackingANoOp) {
  const auto plan = oracle::box_plan(5.0, 5.0, 0.5);
  CollectConfig cfg = small_config(6, 5);
  cfg.epsilon = 1e6;
  const auto trajs = collect::collect_random(plan, cfg);
  ASSERT_EQ(trajs.size(), 6u);
  for (std::size_t i = 1; i < trajs.size(); ++i) {
    // Each flight takes off from where the previous one hit the wall.
    const auto c = world::collision_check(plan, trajs[i].records.front().true_pose, vehicle::kDroneRadius + 1e-6);
    ASSERT_TRUE(c) << "trajectory " << i << " did not start against a wall";
    const auto& last = trajs[i - 1].records.back().true_pose;
    EXPECT_LT((trajs[i].records.front().true_pose.position() - last.position()).norm(), 0.1);
  }
}

TEST(CollectRandom, FlightCommandsAreStraight) {
  const auto plan = world::resolve_plan("glass_door");
  for (const auto& t : collect::collect_random(plan, small_config(10)))
    for (const auto& r : t.records) EXPECT_EQ(r.command.angular(), 0.0);
}

TEST(CollectRandom, SeededRunsGiveIdenticalArchives) {
  const auto plan = world::resolve_plan("office_floor");
  const auto a = temp_path("det_a.cnta"), b = temp_path("det_b.cnta");
  collect::write_trajectories(collect::collect_random(plan, small_config(8, 42)), a);
  collect::write_trajectories(collect::collect_random(plan, small_config(8, 42)), b);
  std::uint64_t ha = 0, hb = 0;
  collect::verify_archive(a, &ha);
  collect::verify_archive(b, &hb);
  EXPECT_EQ(ha, hb);
  collect::write_trajectories(collect::collect_random(plan, small_config(8, 43)), b);
  collect::verify_archive(b, &hb);
  EXPECT_NE(ha, hb);
}

TEST(CollectRandom, CrashesTouchSeveralSegmentsOnEveryShippedPlan) {
  for (const auto& name : world::shipped_plan_names()) {
    const auto plan = world::resolve_plan(name);
    std::set<int> touched;
    for (const auto& t : collect::collect_random(plan, small_config(50, 9))) touched.insert(t.contact_segment);
    EXPECT_GE(touched.size(), 3u) << name;
  }
}

TEST(CollectRandom, OpenPlanExhaustsAttemptBudget) {
  world::FloorPlan plan;
  plan.name = "open";
  plan.segments = {{world::Vec2(100, 100), world::Vec2(101, 100), {}}};
  plan.spawn_regions = {{world::Vec2(0, 0), world::Vec2(0, 0)}};
  CollectConfig cfg = small_config(2);
  cfg.max_trajectory_ticks = 20;
  EXPECT_THROW(collect::collect_random(plan, cfg), collect::CollectError);
}

TEST(CollectPolicy, AlwaysStopNeverCrashes) {
  const auto plan = oracle::box_plan(3.0, 3.0, 0.3);
  collect::LambdaPolicy stop([](const world::Frame&) { return Command(0.0, 0.0); });
  CollectConfig cfg = small_config(4);
  cfg.max_trajectory_ticks = 30;
  collect::CollectStats stats;
  const auto trajs = collect::collect_with_policy(plan, cfg, stop, &stats);
  ASSERT_EQ(trajs.size(), 4u);
  EXPECT_EQ(stats.crashes, 0);
  for (const auto& t : trajs) {
    EXPECT_FALSE(t.ended_in_collision);
    EXPECT_EQ(t.records.size(), 30u);
    EXPECT_EQ(t.collection_mode, collect::CollectionMode::PolicyDriven);
  }
}

TEST(CollectPolicy, FullForwardReducesToRandomCollection) {
  const auto plan = oracle::box_plan(4.0, 3.0, 0.4);
  const CollectConfig cfg = small_config(6, 8);
  collect::LambdaPolicy forward([&](const world::Frame&) { return Command(cfg.flight_speed, 0.0); });
  const auto random = collect::collect_random(plan, cfg);
  const auto driven = collect::collect_with_policy(plan, cfg, forward);
  ASSERT_EQ(random.size(), driven.size());
  for (std::size_t i = 0; i < random.size(); ++i) {
    EXPECT_EQ(random[i].records, driven[i].records);
    EXPECT_EQ(random[i].contact_tick, driven[i].contact_tick);
  }
}

TEST(Archive, RoundTripIsFieldForField) {
  const auto trajs = collect::collect_random(world::resolve_plan("hallway"), small_config(5, 2));
  const auto path = temp_path("round.cnta");
  collect::write_trajectories(trajs, path);
  EXPECT_EQ(collect::read_trajectories(path), trajs);
  EXPECT_EQ(collect::verify_archive(path), 5u);
}

TEST(Archive, VersionMismatchIsRejected) {
  const auto path = temp_path("version.cnta");
  collect::write_trajectories(collect::collect_random(oracle::box_plan(2, 2), small_config(1)), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const char v = 2;
    f.write(&v, 1);
  }
  try {
    collect::read_trajectories(path);
    FAIL();
  } catch (const collect::ArchiveError& e) {
    EXPECT_EQ(e.kind(), collect::ArchiveError::Kind::VersionMismatch);
  }
}

TEST(Archive, TruncationAndCorruptionAreDetected) {
  const auto path = temp_path("broken.cnta");
  collect::write_trajectories(collect::collect_random(oracle::box_plan(2, 2), small_config(2)), path);
  const auto size = std::filesystem::file_size(path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(size / 2));
    char c;
    f.seekg(static_cast<std::streamoff>(size / 2));
    f.get(c);
    f.seekp(static_cast<std::streamoff>(size / 2));
    f.put(static_cast<char>(c ^ 0x5A));
  }
  EXPECT_THROW(collect::verify_archive(path), collect::ArchiveError);
  std::filesystem::resize_file(path, size - 10);
  EXPECT_THROW(collect::verify_archive(path), collect::ArchiveError);
}

TEST(Archive, HundredTrajectoriesStreamInWriteOrder) {
  // Synthetic trajectories keep this fast; order is what is under test.
  std::vector<Trajectory> trajs(100);
  util::Fnv1a expected;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    trajs[i].id = 1000 + (i * 37) % 100;
    trajs[i].environment_name = "synthetic";
    trajs[i].ended_in_collision = i % 3 != 0;
    if (trajs[i].ended_in_collision) trajs[i].contact_tick = 1;
    for (int k = 0; k < 2; ++k) {
      collect::Record r;
      r.tick = k;
      r.accel_magnitude = static_cast<double>(i) + 0.5 * k;
      r.frame = world::Frame(4, 4);
      r.frame.at(k, k) = static_cast<std::uint8_t>(i);
      trajs[i].records.push_back(r);
    }
    expected.update(&trajs[i].id, sizeof trajs[i].id);
  }
  const auto path = temp_path("hundred.cnta");
  {
    collect::TrajectoryWriter w(path);
    for (const auto& t : trajs) w.write(t);
  }
  collect::TrajectoryReader reader(path);
  util::Fnv1a seen;
  std::size_t n = 0;
  while (auto t = reader.next()) {
    ASSERT_LT(n, trajs.size());
    EXPECT_EQ(*t, trajs[n]);
    seen.update(&t->id, sizeof t->id);
    ++n;
  }
  EXPECT_EQ(n, 100u);
  EXPECT_EQ(seen.digest(), expected.digest());
}
