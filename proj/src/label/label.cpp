#include "crashnav/label/label.hpp"

#include "crashnav/util/binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace crashnav::label {

using K = LabelError::Kind;

void LabelConfig::validate() const {
  if (n_plus < 1 || n_minus < 1) throw std::invalid_argument("LabelConfig: n_plus and n_minus must be >= 1");
  if (!(accel_threshold > 0.0)) throw std::invalid_argument("LabelConfig: accel_threshold must be positive");
  if (min_length < 1) throw std::invalid_argument("LabelConfig: min_length must be >= 1");
}

int detect_collision_tick(const Trajectory& trajectory, double threshold) {
  if (!trajectory.ended_in_collision)
    throw LabelError(K::NotACollision, "trajectory " + std::to_string(trajectory.id) + " did not end in a collision");
  const auto& recs = trajectory.records;
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (recs[i].accel_magnitude >= threshold) return static_cast<int>(i);
  throw LabelError(K::NoSpikeFound, "no accelerometer spike found in trajectory " + std::to_string(trajectory.id));
}

Windows label_windows(int length, int n_plus, int n_minus, bool collided) {
  if (length <= 0) return {};
  if (!collided) return {std::min(length, n_plus), 0};
  if (length >= n_plus + n_minus) return {n_plus, n_minus};
  const long long total = n_plus + n_minus;
  const auto positives = static_cast<int>((2LL * length * n_plus + total) / (2 * total));
  return {positives, length - positives};
}

std::vector<LabeledSample> segment(const Trajectory& trajectory, const LabelConfig& cfg, SegmentTally* tally) {
  cfg.validate();
  SegmentTally local;
  SegmentTally& t = tally ? *tally : local;
  ++t.trajectories;

  int length = static_cast<int>(trajectory.records.size());
  if (trajectory.ended_in_collision) {
    length = detect_collision_tick(trajectory, cfg.accel_threshold) + 1;
    ++t.collisions;
  } else {
    ++t.timeouts;
  }
  if (length < cfg.min_length) {
    ++t.skipped_short;
    return {};
  }

  const Windows w = label_windows(length, cfg.n_plus, cfg.n_minus, trajectory.ended_in_collision);
  std::vector<LabeledSample> out;
  out.reserve(w.positives + w.negatives);
  auto emit = [&](int i, Label label) {
    const auto& rec = trajectory.records[i];
    out.push_back({rec.frame, label, trajectory.id, rec.tick});
  };
  for (int i = 0; i < w.positives; ++i) emit(i, Label::Positive);
  for (int i = length - w.negatives; i < length; ++i) emit(i, Label::Negative);
  return out;
}

std::size_t Dataset::count(Split s) const { return static_cast<std::size_t>(std::count(split.begin(), split.end(), s)); }

std::size_t Dataset::count(Split s, Label l) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (split[i] == s && samples[i].label == l) ++n;
  return n;
}

std::uint64_t Dataset::content_hash() const {
  util::Fnv1a h;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::uint64_t id = s.source_trajectory_id;
    const std::int32_t tick = s.source_tick;
    const std::uint8_t meta[2] = {static_cast<std::uint8_t>(s.label), static_cast<std::uint8_t>(split[i])};
    h.update(&id, sizeof id);
    h.update(&tick, sizeof tick);
    h.update(meta, sizeof meta);
    h.update(s.frame.pixels);
  }
  return h.digest();
}

DatasetBuilder::DatasetBuilder(LabelConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void DatasetBuilder::add(const Trajectory& trajectory) {
  auto samples = segment(trajectory, cfg_, &tally_);
  if (samples.empty()) return;
  trajectory_ids_.push_back(trajectory.id);
  std::move(samples.begin(), samples.end(), std::back_inserter(samples_));
}

Dataset DatasetBuilder::finish(double val_fraction, std::uint64_t seed) && {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("build_dataset: val_fraction must be in [0, 1)");

  std::vector<std::uint64_t> ids = trajectory_ids_;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw LabelError(K::BadInput, "duplicate trajectory ids; split by trajectory would leak");

  const auto n = static_cast<long long>(ids.size());
  long long n_val = std::llround(val_fraction * static_cast<double>(n));
  if (val_fraction > 0.0 && n >= 2) n_val = std::clamp(n_val, 1LL, n - 1);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::unordered_set<std::uint64_t> val_ids(ids.begin(), ids.begin() + n_val);

  Dataset ds;
  ds.samples = std::move(samples_);
  std::stable_sort(ds.samples.begin(), ds.samples.end(), [](const LabeledSample& a, const LabeledSample& b) {
    return a.source_trajectory_id != b.source_trajectory_id ? a.source_trajectory_id < b.source_trajectory_id
                                                            : a.source_tick < b.source_tick;
  });
  ds.split.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    ds.split.push_back(val_ids.count(s.source_trajectory_id) ? Split::Val : Split::Train);
    ++ds.class_counts[static_cast<std::size_t>(s.label)];
  }
  ds.val_fraction = val_fraction;
  ds.seed = seed;
  ds.tally = tally_;
  if (ds.class_counts[0] == 0 || ds.class_counts[1] == 0)
    throw LabelError(K::DegenerateDataset, "degenerate dataset: a label class is empty");
  return ds;
}

Dataset build_dataset(const std::vector<Trajectory>& trajectories, const LabelConfig& cfg, double val_fraction,
                      std::uint64_t seed) {
  if (trajectories.size() < 2) throw LabelError(K::BadInput, "build_dataset needs at least two trajectories");
  DatasetBuilder b(cfg);
  for (const auto& t : trajectories) b.add(t);
  return std::move(b).finish(val_fraction, seed);
}

}  // namespace crashnav::label
