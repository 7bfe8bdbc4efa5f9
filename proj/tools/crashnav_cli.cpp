// crashnav command-line driver.

#include "crashnav/bench/bench.hpp"
#include "crashnav/bench/table.hpp"
#include "crashnav/collect/archive.hpp"
#include "crashnav/collect/collect.hpp"
#include "crashnav/gateway/manifest.hpp"
#include "crashnav/gateway/server.hpp"
#include "crashnav/label/dataset_io.hpp"
#include "crashnav/label/label.hpp"
#include "crashnav/learn/checkpoint.hpp"
#include "crashnav/learn/train.hpp"
#include "crashnav/pipeline.hpp"
#include "crashnav/policy/policy.hpp"
#include "crashnav/world/floorplan_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

namespace fs = std::filesystem;
using namespace crashnav;

namespace {

void print_seed(std::uint64_t seed) { std::cout << "seed: " << seed << "\n"; }

std::string read_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char m[4] = {};
  in.read(m, 4);
  return std::string(m, static_cast<std::size_t>(in.gcount()));
}

// Validates one artifact by content type; returns a one-line description.
std::string validate_artifact(const std::string& arg) {
  const fs::path path(arg);
  if (!fs::exists(path)) {
    // Bare names refer to shipped plans.
    const auto plan = world::resolve_plan(arg);
    return "floorplan " + plan.name + ": " + std::to_string(plan.segments.size()) + " segments, ok";
  }
  const std::string magic = read_magic(path);
  if (magic == "CNTA") {
    std::uint64_t hash = 0;
    const auto n = collect::verify_archive(path, &hash);
    std::ostringstream os;
    os << "archive: " << n << " trajectories, hash " << std::hex << hash << ", ok";
    return os.str();
  }
  if (magic == "CNDS") {
    const auto ds = label::load_dataset(path);
    label::save_dataset(ds, path.string() + ".roundtrip.tmp");
    const auto again = label::load_dataset(path.string() + ".roundtrip.tmp");
    fs::remove(path.string() + ".roundtrip.tmp");
    if (again.content_hash() != ds.content_hash()) throw std::runtime_error("dataset round trip changed content");
    return "dataset: " + std::to_string(ds.samples.size()) + " samples (seed " + std::to_string(ds.seed) + "), ok";
  }
  if (magic == "CNCK") {
    const auto params = learn::load_params<float>(path);
    return "checkpoint: " + params.spec.describe() + ", ok";
  }
  // JSON documents: floorplan, manifest, bench config or results.
  std::ifstream in(path);
  const auto doc = nlohmann::json::parse(in);
  if (doc.contains("segments")) {
    const auto plan = world::load_floorplan_file(path);
    return "floorplan " + plan.name + ": " + std::to_string(plan.segments.size()) + " segments, ok";
  }
  if (doc.contains("artifacts")) {
    const auto m = gateway::RunManifest::load(path);
    const auto missing = m.missing();
    if (!missing.empty()) throw std::runtime_error("manifest references missing file " + missing.front());
    for (const auto& a : m.artifacts)
      if (a.kind != "floorplan") validate_artifact(a.path);
    return "manifest: " + std::to_string(m.artifacts.size()) + " artifacts, ok";
  }
  if (doc.contains("cells")) {
    const auto t = bench::table_from_json(doc);
    return "results: " + std::to_string(t.cells.size()) + " cells, ok";
  }
  if (doc.contains("environments")) {
    bench::config_from_json(doc);
    return "bench config, ok";
  }
  throw std::runtime_error("unrecognized artifact " + path.string());
}

std::atomic<bool> g_interrupted{false};

void serve_until_interrupted(gateway::Server& server) {
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  std::atomic<bool> finished{false};
  std::thread watcher([&] {
    while (!finished && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.run();
  finished = true;
  watcher.join();
}

int run_server(gateway::ServerConfig cfg, const std::optional<learn::NetworkParams<float>>& params) {
  std::map<std::string, world::FloorPlan> plans;
  std::vector<std::string> names = world::shipped_plan_names();
  if (std::find(names.begin(), names.end(), cfg.session.default_plan) == names.end())
    names.push_back(cfg.session.default_plan);
  for (const auto& n : names) plans.emplace(n, world::resolve_plan(n));
  if (params) cfg.session.params = &*params;
  gateway::PlanProvider provider = [&plans](const std::string& name) -> const world::FloorPlan& {
    const auto it = plans.find(name);
    if (it == plans.end()) throw std::invalid_argument("unknown plan " + name);
    return it->second;
  };
  gateway::Server server(cfg, provider, names);
  std::cout << "listening on ws://" << cfg.address << ":" << server.port() << "/" << std::endl;
  serve_until_interrupted(server);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crashnav: learning to fly by crashing, in simulation"};
  app.require_subcommand(1);

  // collect
  auto* collect_cmd = app.add_subcommand("collect", "Fly crash trajectories in one plan into an archive");
  std::string c_plan, c_out, c_mode = "random", c_checkpoint;
  collect::CollectConfig c_cfg;
  collect_cmd->add_option("--plan", c_plan, "Shipped plan name or floorplan file")->required();
  collect_cmd->add_option("--n-env-trial", c_cfg.n_env_trial, "Trajectories to record")->capture_default_str();
  collect_cmd->add_option("--mode", c_mode, "random | policy")
      ->check(CLI::IsMember({"random", "policy"}))
      ->capture_default_str();
  collect_cmd->add_option("--checkpoint", c_checkpoint, "Checkpoint flown in policy mode");
  collect_cmd->add_option("--out", c_out, "Archive path")->required();
  collect_cmd->add_option("--seed", c_cfg.seed)->capture_default_str();
  collect_cmd->add_option("--max-ticks", c_cfg.max_trajectory_ticks)->capture_default_str();
  collect_cmd->add_option("--speed", c_cfg.flight_speed, "Straight-flight speed, m/s")->capture_default_str();

  // label
  auto* label_cmd = app.add_subcommand("label", "Segment archives into a labeled, split dataset");
  std::vector<std::string> l_archives;
  std::string l_out;
  label::LabelConfig l_cfg;
  double l_val = 0.2;
  std::uint64_t l_seed = 1;
  label_cmd->add_option("archives", l_archives, "Trajectory archives")->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--out", l_out, "Dataset path")->required();
  label_cmd->add_option("--n-plus", l_cfg.n_plus)->capture_default_str();
  label_cmd->add_option("--n-minus", l_cfg.n_minus)->capture_default_str();
  label_cmd->add_option("--accel-threshold", l_cfg.accel_threshold)->capture_default_str();
  label_cmd->add_option("--min-length", l_cfg.min_length)->capture_default_str();
  label_cmd->add_option("--val-fraction", l_val)->capture_default_str();
  label_cmd->add_option("--seed", l_seed, "Split seed")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the classifier on a dataset");
  std::string t_dataset, t_out;
  learn::TrainConfig t_cfg;
  train_cmd->add_option("--dataset", t_dataset)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", t_out, "Checkpoint path")->required();
  train_cmd->add_option("--lr", t_cfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch", t_cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--epochs", t_cfg.epochs)->capture_default_str();
  train_cmd->add_option("--momentum", t_cfg.momentum)->capture_default_str();
  train_cmd->add_option("--lr-decay", t_cfg.lr_decay)->capture_default_str();
  train_cmd->add_flag("!--no-mirror", t_cfg.mirror, "Disable left-right mirroring");
  train_cmd->add_option("--l2", t_cfg.l2_weight_decay)->capture_default_str();
  train_cmd->add_option("--patience", t_cfg.early_stop_patience)->capture_default_str();
  train_cmd->add_option("--seed", t_cfg.seed)->capture_default_str();

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "collect, label and train over several plans in one run");
  PipelineConfig p_cfg;
  std::string p_out;
  pipe_cmd->add_option("--plans", p_cfg.plans, "Plans (default: all shipped)");
  pipe_cmd->add_option("--n-env-trial", p_cfg.collect.n_env_trial)->capture_default_str();
  pipe_cmd->add_option("--seed", p_cfg.collect.seed, "Base collection seed")->capture_default_str();
  pipe_cmd->add_option("--speed", p_cfg.collect.flight_speed, "Straight-flight speed, m/s")->capture_default_str();
  pipe_cmd->add_option("--train-seed", p_cfg.train.seed)->capture_default_str();
  pipe_cmd->add_option("--epochs", p_cfg.train.epochs)->capture_default_str();
  pipe_cmd->add_option("--lr", p_cfg.train.learning_rate)->capture_default_str();
  pipe_cmd->add_option("--hard-negative-rounds", p_cfg.hard_negative_rounds)->capture_default_str();
  pipe_cmd->add_option("--hard-negative-trials", p_cfg.hard_negative_trials)->capture_default_str();
  pipe_cmd->add_option("--out", p_out, "Output directory")->required();

  // fly
  auto* fly_cmd = app.add_subcommand("fly", "Fly one trial headless, or serve it for spectators");
  bench::TrialSpec f_spec;
  std::string f_checkpoint, f_policy = "Learned", f_telemetry;
  bool f_serve = false;
  unsigned short f_port = 8765;
  fly_cmd->add_option("--plan", f_spec.plan)->required();
  fly_cmd->add_option("--checkpoint", f_checkpoint);
  fly_cmd->add_option("--policy", f_policy, "Learned | DepthOracle | BestStraight")
      ->check(CLI::IsMember({"Learned", "DepthOracle", "BestStraight"}))
      ->capture_default_str();
  fly_cmd->add_option("--seed", f_spec.seed)->capture_default_str();
  fly_cmd->add_option("--max-time", f_spec.max_time)->capture_default_str();
  fly_cmd->add_option("--telemetry", f_telemetry, "Write per-tick telemetry JSON here");
  fly_cmd->add_flag("--serve", f_serve, "Host a Spectate session instead of flying headless");
  fly_cmd->add_option("--port", f_port)->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark and write the result table");
  std::string b_config, b_out, b_checkpoint;
  bench_cmd->add_option("--config", b_config, "Benchmark config JSON")->check(CLI::ExistingFile);
  bench_cmd->add_option("--checkpoint", b_checkpoint, "Overrides the config's checkpoint");
  bench_cmd->add_option("--out", b_out, "Result stem; writes <stem>.json and <stem>.txt")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Host teleoperation and spectator sessions");
  gateway::ServerConfig s_cfg;
  std::string s_checkpoint, s_results, s_pacing = "realtime";
  serve_cmd->add_option("--port", s_cfg.port)->capture_default_str();
  serve_cmd->add_option("--address", s_cfg.address)->capture_default_str();
  serve_cmd->add_option("--plan", s_cfg.session.default_plan, "Plan shown before a trial starts")
      ->capture_default_str();
  serve_cmd->add_option("--checkpoint", s_checkpoint, "Enables Spectate sessions");
  serve_cmd->add_option("--results", s_results, "Result stem that records operator trials");
  serve_cmd->add_option("--pacing", s_pacing)->check(CLI::IsMember({"realtime", "lockstep"}))->capture_default_str();
  serve_cmd->add_option("--seed", s_cfg.session.default_seed)->capture_default_str();

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check floorplans, archives, datasets, checkpoints, manifests");
  std::vector<std::string> v_paths;
  validate_cmd->add_option("artifacts", v_paths, "Files or shipped plan names")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect_cmd) {
      print_seed(c_cfg.seed);
      const auto plan = world::resolve_plan(c_plan);
      collect::TrajectoryWriter writer(c_out);
      const collect::TrajectorySink sink = [&](collect::Trajectory&& t) { writer.write(t); };
      collect::CollectStats stats;
      if (c_mode == "random") {
        stats = collect::collect_random(plan, c_cfg, sink);
      } else {
        if (c_checkpoint.empty()) throw std::invalid_argument("--mode policy needs --checkpoint");
        const auto params = learn::load_params<float>(fs::path(c_checkpoint));
        policy::LearnedFramePolicy pol(params, {});
        stats = collect::collect_with_policy(plan, c_cfg, pol, sink);
      }
      writer.close();
      std::cout << "recorded " << stats.recorded << " trajectories (" << stats.crashes << " crashes, "
                << stats.flight_ticks << " flight ticks) -> " << c_out << "\n";
    } else if (*label_cmd) {
      print_seed(l_seed);
      label::DatasetBuilder builder(l_cfg);
      for (const auto& a : l_archives) {
        collect::TrajectoryReader reader(a);
        while (auto t = reader.next()) builder.add(*t);
      }
      const auto ds = std::move(builder).finish(l_val, l_seed);
      label::save_dataset(ds, l_out);
      std::cout << ds.samples.size() << " samples (" << ds.class_counts[0] << " positive, " << ds.class_counts[1]
                << " negative; " << ds.count(label::Split::Val) << " val) -> " << l_out << "\n";
    } else if (*train_cmd) {
      print_seed(t_cfg.seed);
      const auto ds = label::load_dataset(t_dataset);
      auto [params, report] =
          learn::train(ds, learn::NetSpec::default_spec(), t_cfg, [](int epoch, const learn::TrainReport& r) {
            std::cout << "epoch " << epoch << " loss " << r.train_loss.back() << " val_acc "
                      << r.val_accuracy.back() << std::endl;
          });
      if (report.diverged) std::cerr << "training diverged: " << report.divergence_message << "\n";
      learn::save_params(params, fs::path(t_out));
      std::cout << "best epoch " << report.best_epoch << " val_acc "
                << (report.best_epoch >= 0 ? report.val_accuracy[report.best_epoch] : 0.0) << " -> " << t_out
                << "\n";
      if (report.diverged) return 2;
    } else if (*pipe_cmd) {
      print_seed(p_cfg.collect.seed);
      p_cfg.out_dir = p_out;
      const auto r = run_pipeline(p_cfg, [](const std::string& line) { std::cout << line << std::endl; });
      std::cout << "val accuracy " << r.val.accuracy << " on " << r.val_samples << " samples\n";
    } else if (*fly_cmd) {
      print_seed(f_spec.seed);
      std::optional<learn::NetworkParams<float>> params;
      if (!f_checkpoint.empty()) params = learn::load_params<float>(fs::path(f_checkpoint));
      if (f_serve) {
        gateway::ServerConfig cfg;
        cfg.port = f_port;
        cfg.session.default_plan = f_spec.plan;
        cfg.session.default_seed = f_spec.seed;
        cfg.session.max_time = f_spec.max_time;
        if (!params) throw std::invalid_argument("--serve needs --checkpoint for Spectate");
        return run_server(cfg, params);
      }
      f_spec.policy = bench::policy_kind_from_string(f_policy);
      if (f_spec.policy == bench::PolicyKind::Learned && !params)
        throw std::invalid_argument("the Learned policy needs --checkpoint");
      const auto plan = world::resolve_plan(f_spec.plan);
      bench::TrialArtifacts art;
      art.plan = &plan;
      art.params = params ? &*params : nullptr;
      const auto r = bench::run_trial(f_spec, art);
      std::cout << std::fixed << std::setprecision(2) << "distance " << r.distance_before_collision << " m, time "
                << r.time_before_collision << " s, " << bench::to_string(r.termination) << "\n";
      if (!f_telemetry.empty()) {
        nlohmann::json ticks = nlohmann::json::array();
        for (const auto& t : r.telemetry) {
          nlohmann::json j{{"tick", t.tick},
                           {"pose", {t.pose.x, t.pose.y, t.pose.heading}},
                           {"command", {t.command.linear(), t.command.angular()}},
                           {"forced_forward", t.forced_forward},
                           {"collided", t.collided}};
          if (t.probs) j["probs"] = {t.probs->left, t.probs->straight, t.probs->right};
          if (t.mode) j["mode"] = policy::to_string(*t.mode);
          ticks.push_back(std::move(j));
        }
        std::ofstream(f_telemetry) << ticks.dump() << "\n";
      }
    } else if (*bench_cmd) {
      auto cfg = b_config.empty() ? bench::BenchmarkConfig::defaults() : bench::load_config(b_config);
      if (!b_checkpoint.empty()) cfg.checkpoint = b_checkpoint;
      std::cout << "seeds:";
      for (auto s : cfg.seeds) std::cout << " " << s;
      std::cout << "\n";
      const auto result = bench::run_benchmark(cfg, [](const std::string& env, bench::PolicyKind k,
                                                       const bench::RunSummary& run) {
        std::cout << env << " " << bench::to_string(k) << " seed " << run.seed << ": " << run.distance << " m, "
                  << run.time << " s, " << bench::to_string(run.termination) << std::endl;
      });
      bench::write_results(b_out, result, cfg);
      std::cout << bench::render_table(result.table);
      if (result.partial) {
        std::cerr << "benchmark incomplete: " << result.error << "\n";
        return 1;
      }
    } else if (*serve_cmd) {
      print_seed(s_cfg.session.default_seed);
      s_cfg.session.pacing = s_pacing == "lockstep" ? gateway::Pacing::Lockstep : gateway::Pacing::Realtime;
      s_cfg.session.results_stem = s_results;
      std::optional<learn::NetworkParams<float>> params;
      if (!s_checkpoint.empty()) params = learn::load_params<float>(fs::path(s_checkpoint));
      return run_server(s_cfg, params);
    } else if (*validate_cmd) {
      print_seed(0);
      int failures = 0;
      for (const auto& p : v_paths) {
        try {
          std::cout << p << ": " << validate_artifact(p) << "\n";
        } catch (const std::exception& e) {
          std::cout << p << ": INVALID: " << e.what() << "\n";
          ++failures;
        }
      }
      return failures ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
