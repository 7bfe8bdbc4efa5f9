#pragma once

#include "crashnav/collect/collect.hpp"
#include "crashnav/gateway/manifest.hpp"
#include "crashnav/label/label.hpp"
#include "crashnav/learn/train.hpp"
#include "crashnav/policy/policy.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>

namespace crashnav {

/// End-to-end run: random crash collection on every plan, labeling,
/// training, and optional policy-driven recollection rounds whose
/// trajectories are added to the dataset before retraining.
struct PipelineConfig {
  std::vector<std::string> plans;  // empty: the shipped plans
  collect::CollectConfig collect;
  label::LabelConfig label;
  double val_fraction = 0.2;
  std::uint64_t split_seed = 1;
  learn::NetSpec spec = learn::NetSpec::default_spec();
  learn::TrainConfig train;
  policy::PolicyConfig policy;
  int hard_negative_rounds = 0;
  int hard_negative_trials = 50;  // per plan and round
  /// When set, archives, datasets, checkpoints and a manifest are written
  /// here. model.cnck is the final model; model_r0.cnck the round-0 one.
  std::optional<std::filesystem::path> out_dir;
};

struct PipelineResult {
  learn::NetworkParams<float> params;
  learn::TrainReport report;
  learn::Evaluation val;
  /// Model and held-out score after the random-collection round alone.
  learn::NetworkParams<float> round0_params;
  learn::Evaluation round0_val;
  std::array<std::size_t, 2> class_counts{0, 0};
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::uint64_t dataset_hash = 0;
  std::map<std::string, collect::CollectStats> random_stats;
  std::map<std::string, collect::CollectStats> policy_stats;  // last recollection round
  double collect_seconds = 0.0;
  double train_seconds = 0.0;
  gateway::RunManifest manifest;
};

using PipelineLog = std::function<void(const std::string&)>;

/// Seed of the collection run for plan number `index`.
std::uint64_t plan_seed(std::uint64_t base, std::size_t index);

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineLog& log = {});

}  // namespace crashnav
