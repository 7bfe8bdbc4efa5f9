#pragma once

#include "crashnav/collect/collect.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace crashnav::label {

using collect::Trajectory;
using world::Frame;

/// Class index doubles as the logit index in the classifier.
enum class Label : std::uint8_t { Positive = 0, Negative = 1 };
enum class Split : std::uint8_t { Train = 0, Val = 1 };

struct LabelConfig {
  int n_plus = 30;               // positive ticks from the start
  int n_minus = 20;              // negative ticks ending at the collision
  double accel_threshold = 4.0;  // m/s^2
  int min_length = 5;            // shorter usable trajectories are skipped

  void validate() const;
};

struct LabeledSample {
  Frame frame;
  Label label = Label::Positive;
  std::uint64_t source_trajectory_id = 0;
  int source_tick = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

class LabelError : public std::runtime_error {
 public:
  enum class Kind { NoSpikeFound, NotACollision, DegenerateDataset, BadInput };
  LabelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Index of the first record whose accelerometer magnitude reaches
/// `threshold`. Throws LabelError(NotACollision) for timeout trajectories
/// and LabelError(NoSpikeFound) when no record crosses the threshold.
int detect_collision_tick(const Trajectory& trajectory, double threshold);

/// Tick windows chosen for a usable length. Positives are [0, positives);
/// negatives are [length - negatives, length).
struct Windows {
  int positives = 0;
  int negatives = 0;
};

/// Window arithmetic. When length < n_plus + n_minus both windows shrink to
/// fill the trajectory exactly, split in the n_plus : n_minus ratio with the
/// positive share rounded half up. Timeouts (collided = false) only get
/// positives.
Windows label_windows(int length, int n_plus, int n_minus, bool collided);

struct SegmentTally {
  int trajectories = 0;
  int skipped_short = 0;
  int collisions = 0;
  int timeouts = 0;
};

/// Labels one trajectory. Collision trajectories are truncated at the
/// detected collision tick (inclusive) before windowing. Trajectories whose
/// usable length is below min_length return no samples and bump
/// `tally->skipped_short`.
std::vector<LabeledSample> segment(const Trajectory& trajectory, const LabelConfig& cfg, SegmentTally* tally = nullptr);

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<Split> split;  // parallel to samples
  std::array<std::size_t, 2> class_counts{0, 0};  // indexed by Label
  double val_fraction = 0.0;
  std::uint64_t seed = 0;
  SegmentTally tally;

  std::size_t count(Split s) const;
  std::size_t count(Split s, Label l) const;
  /// Stable FNV-1a over samples, labels, provenance and split.
  std::uint64_t content_hash() const;
};

/// Incremental builder so large collections can be labeled trajectory by
/// trajectory without holding every frame in memory.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(LabelConfig cfg);
  void add(const Trajectory& trajectory);
  /// Splits by trajectory id: round(val_fraction * n) trajectories (at least
  /// one and at most n - 1 when 0 < val_fraction < 1) go to Val. Samples
  /// are ordered by trajectory id, then tick. Throws
  /// LabelError(DegenerateDataset) when a class is empty.
  Dataset finish(double val_fraction, std::uint64_t seed) &&;

 private:
  LabelConfig cfg_;
  std::vector<LabeledSample> samples_;
  std::vector<std::uint64_t> trajectory_ids_;
  SegmentTally tally_;
};

/// Requires at least two trajectories.
Dataset build_dataset(const std::vector<Trajectory>& trajectories, const LabelConfig& cfg, double val_fraction,
                      std::uint64_t seed);

}  // namespace crashnav::label
