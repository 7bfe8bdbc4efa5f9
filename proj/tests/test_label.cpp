#include "crashnav/collect/collect.hpp"
#include "crashnav/label/dataset_io.hpp"
#include "crashnav/label/label.hpp"
#include "support/oracles.hpp"
#include "support/segmentation_check.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace crashnav;
using label::Label;
using label::LabelConfig;
using label::LabelError;
using label::Split;

namespace {

collect::Trajectory trace(std::vector<double> accel, bool collided, std::uint64_t id = 1) {
  collect::Trajectory t;
  t.id = id;
  t.ended_in_collision = collided;
  for (std::size_t i = 0; i < accel.size(); ++i) {
    collect::Record r;
    r.tick = static_cast<int>(i);
    r.frame = world::Frame(2, 2);
    r.frame.at(0, 0) = static_cast<std::uint8_t>(i % 256);
    r.accel_magnitude = accel[i];
    t.records.push_back(r);
  }
  return t;
}

// Collision at the last record of a quiet trace.
collect::Trajectory crash_of_length(int length, std::uint64_t id) {
  std::vector<double> a(static_cast<std::size_t>(length), 0.1);
  a.back() = 9.0;
  return trace(a, true, id);
}

LabelError::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const LabelError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no LabelError thrown";
  return LabelError::Kind::BadInput;
}

}  // namespace

TEST(Detect, FirstCrossingIsReported) {
  EXPECT_EQ(label::detect_collision_tick(trace({0.1, 0.2, 9.3, 0.1}, true), 4.0), 2);
}

TEST(Detect, ConstantTraceHasNoSpike) {
  const auto t = trace(std::vector<double>(50, 0.1), true);
  EXPECT_EQ(kind_of([&] { label::detect_collision_tick(t, 4.0); }), LabelError::Kind::NoSpikeFound);
}

TEST(Detect, TimeoutIsNotACollision) {
  const auto t = trace({0.1, 9.0}, false);
  EXPECT_EQ(kind_of([&] { label::detect_collision_tick(t, 4.0); }), LabelError::Kind::NotACollision);
}

TEST(Detect, MatchesSimulatorContactOnRealCrashes) {
  collect::CollectConfig cfg;
  cfg.n_env_trial = 40;
  cfg.seed = 12;
  cfg.camera.width = cfg.camera.height = 8;
  const auto trajs = collect::collect_random(oracle::box_plan(8, 6, 1.0), cfg);
  int agree = 0;
  for (const auto& t : trajs)
    if (t.contact_tick && label::detect_collision_tick(t, 4.0) == *t.contact_tick) ++agree;
  EXPECT_GE(agree, 39);
}

TEST(Windows, SpecifiedExamples) {
  const auto full = label::label_windows(100, 30, 20, true);
  EXPECT_EQ(full.positives, 30);
  EXPECT_EQ(full.negatives, 20);
  const auto shrunk = label::label_windows(40, 30, 20, true);
  EXPECT_EQ(shrunk.positives, 24);
  EXPECT_EQ(shrunk.negatives, 16);
  const auto timeout = label::label_windows(500, 30, 20, false);
  EXPECT_EQ(timeout.positives, 30);
  EXPECT_EQ(timeout.negatives, 0);
}

TEST(Segment, HundredTickCrashLabelsBothEnds) {
  const auto samples = label::segment(crash_of_length(100, 3), LabelConfig{});
  ASSERT_EQ(samples.size(), 50u);
  for (int i = 0; i < 30; ++i) {
    EXPECT_EQ(samples[i].label, Label::Positive);
    EXPECT_EQ(samples[i].source_tick, i);
  }
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(samples[30 + i].label, Label::Negative);
    EXPECT_EQ(samples[30 + i].source_tick, 80 + i);
  }
}

TEST(Segment, RecordsAfterTheSpikeAreIgnored) {
  std::vector<double> a(60, 0.1);
  a[44] = 9.0;  // usable length 45
  const auto samples = label::segment(trace(a, true), LabelConfig{});
  ASSERT_EQ(samples.size(), 45u);
  EXPECT_EQ(samples.back().source_tick, 44);
}

TEST(Segment, ShortTrajectoriesAreSkippedWithTally) {
  label::SegmentTally tally;
  EXPECT_TRUE(label::segment(crash_of_length(4, 1), LabelConfig{}, &tally).empty());
  EXPECT_EQ(tally.skipped_short, 1);
  EXPECT_EQ(label::segment(crash_of_length(5, 2), LabelConfig{}, &tally).size(), 5u);
  EXPECT_EQ(tally.skipped_short, 1);
  EXPECT_EQ(tally.trajectories, 2);
  EXPECT_EQ(tally.collisions, 2);
}

TEST(Segment, ExhaustivePropertySweep) {
  const auto r = oracle::segmentation_check(200, 4, 300, 5);
  EXPECT_TRUE(r.ok()) << r.failures << " of " << r.cases << " failed; first: " << r.first_failure;
  EXPECT_EQ(r.cases, 2u * (200 * 5 + 300));
}

TEST(BuildDataset, TenTrajectoriesTwoInVal) {
  std::vector<collect::Trajectory> trajs;
  for (int i = 0; i < 10; ++i) trajs.push_back(crash_of_length(60 + i, 100 + i));
  const auto ds = label::build_dataset(trajs, LabelConfig{}, 0.2, 9);
  std::set<std::uint64_t> val, train;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    (ds.split[i] == Split::Val ? val : train).insert(ds.samples[i].source_trajectory_id);
  EXPECT_EQ(val.size(), 2u);
  EXPECT_EQ(train.size(), 8u);
  for (auto id : val) EXPECT_FALSE(train.count(id));
  EXPECT_EQ(ds.class_counts[0], 300u);
  EXPECT_EQ(ds.class_counts[1], 200u);
}

TEST(BuildDataset, SameSeedSameSplitAndOrder) {
  std::vector<collect::Trajectory> trajs;
  for (int i = 0; i < 12; ++i) trajs.push_back(crash_of_length(55, 50 - i));
  trajs.push_back(trace(std::vector<double>(70, 0.1), false, 99));
  const auto a = label::build_dataset(trajs, LabelConfig{}, 0.25, 4);
  const auto b = label::build_dataset(trajs, LabelConfig{}, 0.25, 4);
  EXPECT_EQ(a.split, b.split);
  EXPECT_EQ(a.content_hash(), b.content_hash());
  for (std::size_t i = 1; i < a.samples.size(); ++i) {
    const auto& p = a.samples[i - 1];
    const auto& q = a.samples[i];
    EXPECT_TRUE(p.source_trajectory_id < q.source_trajectory_id ||
                (p.source_trajectory_id == q.source_trajectory_id && p.source_tick < q.source_tick));
  }
  EXPECT_EQ(a.tally.timeouts, 1);
}

TEST(BuildDataset, OnlyTimeoutsIsDegenerate) {
  std::vector<collect::Trajectory> trajs = {trace(std::vector<double>(40, 0.1), false, 1),
                                            trace(std::vector<double>(40, 0.1), false, 2)};
  EXPECT_EQ(kind_of([&] { label::build_dataset(trajs, LabelConfig{}, 0.5, 1); }),
            LabelError::Kind::DegenerateDataset);
  EXPECT_EQ(kind_of([&] { label::build_dataset({trajs[0]}, LabelConfig{}, 0.5, 1); }), LabelError::Kind::BadInput);
}

TEST(DatasetFile, RoundTripKeepsEverything) {
  std::vector<collect::Trajectory> trajs;
  for (int i = 0; i < 6; ++i) trajs.push_back(crash_of_length(40 + 7 * i, i + 1));
  const auto ds = label::build_dataset(trajs, LabelConfig{}, 0.3, 2);
  const auto path = std::filesystem::temp_directory_path() / "crashnav_ds_round.cnds";
  label::save_dataset(ds, path);
  const auto back = label::load_dataset(path);
  EXPECT_EQ(back.samples, ds.samples);
  EXPECT_EQ(back.split, ds.split);
  EXPECT_EQ(back.class_counts, ds.class_counts);
  EXPECT_EQ(back.seed, ds.seed);
  EXPECT_EQ(back.val_fraction, ds.val_fraction);
  EXPECT_EQ(back.tally.collisions, ds.tally.collisions);
  EXPECT_EQ(back.content_hash(), ds.content_hash());

  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  EXPECT_THROW(label::load_dataset(path), label::DatasetFileError);
}
