#include "crashnav/pipeline.hpp"

#include "crashnav/collect/archive.hpp"
#include "crashnav/label/dataset_io.hpp"
#include "crashnav/learn/checkpoint.hpp"
#include "crashnav/world/floorplan_io.hpp"

#include <chrono>
#include <cstdio>

namespace crashnav {

std::uint64_t plan_seed(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{base, static_cast<std::uint64_t>(index), std::uint64_t{0xC011EC7}};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Trajectory ids are unique across plans and rounds.
constexpr std::uint64_t kIdStride = 1'000'000;

std::filesystem::path plan_file(const std::string& name_or_path) {
  const std::filesystem::path p(name_or_path);
  return std::filesystem::is_regular_file(p) ? p : world::shipped_plan_path(name_or_path);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineLog& log) {
  const auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  const std::vector<std::string> names = cfg.plans.empty() ? world::shipped_plan_names() : cfg.plans;
  std::vector<world::FloorPlan> plans;
  for (const auto& n : names) plans.push_back(world::resolve_plan(n));
  if (cfg.out_dir) std::filesystem::create_directories(*cfg.out_dir);

  PipelineResult out;
  label::DatasetBuilder builder(cfg.label);
  const auto t_collect = Clock::now();

  const auto collect_plan = [&](std::size_t i, int round, collect::FramePolicy* policy) {
    collect::CollectConfig cc = cfg.collect;
    cc.seed = plan_seed(cfg.collect.seed + static_cast<std::uint64_t>(round) * 7919, i);
    cc.first_trajectory_id = (static_cast<std::uint64_t>(round) * plans.size() + i) * kIdStride;
    if (policy) cc.n_env_trial = cfg.hard_negative_trials;
    std::optional<collect::TrajectoryWriter> writer;
    std::filesystem::path archive;
    if (cfg.out_dir) {
      archive = *cfg.out_dir / (names[i] + (round ? "_policy" + std::to_string(round) : "") + ".cnta");
      writer.emplace(archive);
    }
    const collect::TrajectorySink sink = [&](collect::Trajectory&& t) {
      if (writer) writer->write(t);
      builder.add(t);
    };
    const collect::CollectStats st = policy ? collect::collect_with_policy(plans[i], cc, *policy, sink)
                                            : collect::collect_random(plans[i], cc, sink);
    if (writer) {
      writer->close();
      out.manifest.add("archive", archive, cc.seed, static_cast<int>(collect::kArchiveFormatVersion));
    }
    say(format("  %-16s %s: %d trajectories, %d crashes, %.2f crashes / 1000 ticks (seed %llu)", names[i].c_str(),
               policy ? "policy" : "random", st.recorded, st.crashes, st.crashes_per_1000_ticks(),
               static_cast<unsigned long long>(cc.seed)));
    return st;
  };

  say("collect: random straight flights");
  for (std::size_t i = 0; i < plans.size(); ++i) out.random_stats[names[i]] = collect_plan(i, 0, nullptr);
  out.collect_seconds = seconds_since(t_collect);

  const auto train_once = [&](int round) {
    label::DatasetBuilder copy = builder;
    const label::Dataset ds = std::move(copy).finish(cfg.val_fraction, cfg.split_seed);
    out.class_counts = ds.class_counts;
    out.train_samples = ds.count(label::Split::Train);
    out.val_samples = ds.count(label::Split::Val);
    out.dataset_hash = ds.content_hash();
    say(format("label: %zu positives, %zu negatives (%zu train / %zu val), %d short trajectories skipped",
               ds.class_counts[0], ds.class_counts[1], out.train_samples, out.val_samples, ds.tally.skipped_short));
    const auto t_train = Clock::now();
    auto [params, report] = learn::train(ds, cfg.spec, cfg.train, [&](int epoch, const learn::TrainReport& r) {
      say(format("  epoch %2d  train loss %.4f  val loss %.4f  val acc %.4f", epoch, r.train_loss.back(),
                 r.val_loss.back(), r.val_accuracy.back()));
    });
    out.train_seconds += seconds_since(t_train);
    if (report.diverged) say("train: diverged: " + report.divergence_message);
    out.params = std::move(params);
    out.report = std::move(report);
    out.val = learn::evaluate(out.params, ds, label::Split::Val);
    say(format("train: best epoch %d, val accuracy %.4f, mean P(S) positives %.3f negatives %.3f", out.report.best_epoch,
               out.val.accuracy, out.val.mean_p_positive, out.val.mean_p_negative));
    if (cfg.out_dir) {
      const auto ds_path = *cfg.out_dir / (round ? "dataset_r" + std::to_string(round) + ".cnds" : "dataset.cnds");
      label::save_dataset(ds, ds_path);
      out.manifest.add("dataset", ds_path, cfg.split_seed, static_cast<int>(label::kDatasetFormatVersion));
    }
  };

  say("train: round 0");
  train_once(0);
  out.round0_params = out.params;
  out.round0_val = out.val;
  if (cfg.out_dir) {
    const auto ck = *cfg.out_dir / "model_r0.cnck";
    learn::save_params(out.params, ck);
    out.manifest.add("checkpoint", ck, cfg.train.seed, static_cast<int>(learn::kCheckpointFormatVersion));
  }

  for (int round = 1; round <= cfg.hard_negative_rounds; ++round) {
    say(format("collect: policy-driven round %d", round));
    const auto t = Clock::now();
    const learn::NetworkParams<float> snapshot = out.params;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      policy::LearnedFramePolicy pol(snapshot, cfg.policy);
      out.policy_stats[names[i]] = collect_plan(i, round, &pol);
    }
    out.collect_seconds += seconds_since(t);
    say(format("train: round %d", round));
    train_once(round);
  }

  if (cfg.out_dir) {
    const auto ck = *cfg.out_dir / "model.cnck";
    learn::save_params(out.params, ck);
    out.manifest.add("checkpoint", ck, cfg.train.seed, static_cast<int>(learn::kCheckpointFormatVersion));
    for (std::size_t i = 0; i < names.size(); ++i)
      out.manifest.add("floorplan", plan_file(names[i]), 0, world::kFloorPlanFormatVersion);
    out.manifest.save(*cfg.out_dir / "manifest.json");
  }
  return out;
}

}  // namespace crashnav
