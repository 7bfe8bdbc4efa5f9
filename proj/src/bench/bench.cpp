#include "crashnav/bench/bench.hpp"

#include "crashnav/learn/checkpoint.hpp"
#include "crashnav/world/floorplan_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace crashnav::bench {

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Learned: return "Learned";
    case PolicyKind::BestStraight: return "BestStraight";
    case PolicyKind::DepthOracle: return "DepthOracle";
    case PolicyKind::External: return "External";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "Learned") return PolicyKind::Learned;
  if (s == "BestStraight") return PolicyKind::BestStraight;
  if (s == "DepthOracle") return PolicyKind::DepthOracle;
  if (s == "External" || s == "Human") return PolicyKind::External;
  throw ConfigError("unknown policy kind '" + s + "'");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Collision: return "Collision";
    case Termination::SmallLoop: return "SmallLoop";
    case Termination::TimeCap: return "TimeCap";
    case Termination::Disconnect: return "Disconnect";
  }
  return "?";
}

Termination termination_from_string(const std::string& s) {
  for (auto t : {Termination::Collision, Termination::SmallLoop, Termination::TimeCap, Termination::Disconnect})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown termination '" + s + "'");
}

void TrialSpec::validate() const {
  if (!(max_time > 0.0)) throw ConfigError("trial: max_time must be positive");
  if (!(small_loop.window > 0.0 && small_loop.window < max_time))
    throw ConfigError("trial: small_loop.window must be in (0, max_time)");
  if (!(small_loop.min_net_displacement >= 0.0)) throw ConfigError("trial: min_net_displacement must be >= 0");
}

world::Pose sample_start(const world::FloorPlan& plan, std::uint64_t seed) {
  if (plan.spawn_regions.empty()) throw ConfigError("plan '" + plan.name + "' has no spawn regions");
  std::seed_seq seq{seed, std::uint64_t{0x57A27}};
  vehicle::Rng rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, plan.spawn_regions.size() - 1);
  const world::Rect& r = plan.spawn_regions[pick(rng)];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = r.min.x() + u(rng) * (r.max.x() - r.min.x());
  const double y = r.min.y() + u(rng) * (r.max.y() - r.min.y());
  const double heading = -std::numbers::pi + 2.0 * std::numbers::pi * u(rng);
  return {x, y, heading};
}

std::uint64_t trial_noise_seed(std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x7121A1}};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

world::Pose TrialRunner::resolve_start(const TrialSpec& spec, const TrialArtifacts& a) {
  spec.validate();
  if (!a.plan) throw ConfigError("trial: no floorplan for '" + spec.plan + "'");
  if (spec.policy == PolicyKind::Learned && !a.params) throw ConfigError("trial: Learned policy needs a checkpoint");
  if (spec.policy == PolicyKind::External && !a.channel) throw ConfigError("trial: External policy needs a command source");
  try {
    if (spec.policy == PolicyKind::Learned) a.policy.validate();
    if (spec.policy == PolicyKind::DepthOracle) a.depth.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("trial: ") + e.what());
  }

  world::Pose start = spec.start ? *spec.start : sample_start(*a.plan, spec.seed);
  if (spec.policy == PolicyKind::BestStraight) {
    baselines::StraightOracleConfig oc = a.straight;
    oc.seed = spec.seed;
    oc.max_time = spec.max_time;
    start = world::Pose(start.x, start.y, baselines::best_straight_heading(*a.plan, start.position(), a.noise, oc).heading);
  }
  return start;
}

bool stayed_within(const std::vector<world::Vec2>& positions, std::size_t from, double radius) {
  // An out-and-back turnaround returns near its window start but leaves the
  // disc on the way, so it does not count as spinning on the spot.
  for (std::size_t i = from + 1; i < positions.size(); ++i)
    if ((positions[i] - positions[from]).norm() >= radius) return false;
  return true;
}

TrialRunner::TrialRunner(const TrialSpec& spec, const TrialArtifacts& artifacts)
    : spec_(spec),
      a_(artifacts),
      start_(resolve_start(spec, artifacts)),
      sim_(*artifacts.plan, start_, artifacts.noise, trial_noise_seed(spec.seed), artifacts.camera),
      max_ticks_(static_cast<int>(std::llround(spec.max_time / sim_.dt()))),
      window_ticks_(std::max(1, static_cast<int>(std::llround(spec.small_loop.window / sim_.dt())))) {
  if (spec_.policy == PolicyKind::Learned) source_ = policy::network_source(*a_.params, a_.policy.crop_fraction);
  if (spec_.policy == PolicyKind::External) external_.emplace(*a_.channel);
  positions_.push_back(start_.position());
}

const policy::Telemetry* TrialRunner::step() {
  if (done()) throw std::logic_error("TrialRunner::step after the trial ended");
  if (external_ && external_->disconnected()) {
    // The operator left before this tick; nothing is flown.
    end_ = Termination::Disconnect;
    return nullptr;
  }
  policy::Telemetry t;
  if (spec_.policy == PolicyKind::Learned) {
    t = policy::run_policy_tick(sim_, source_, pstate_, a_.policy);
  } else {
    t.tick = sim_.tick();
    t.pose = sim_.state().pose;
    switch (spec_.policy) {
      case PolicyKind::BestStraight: t.command = vehicle::Command(a_.straight.speed, 0.0); break;
      case PolicyKind::DepthOracle:
        t.command = baselines::depth_policy_decide(baselines::depth_scan(*a_.plan, t.pose, a_.depth), a_.depth);
        break;
      default: t.command = external_->next(); break;
    }
    t.collided = sim_.advance(t.command).collided;
  }
  const world::Vec2 p = sim_.state().pose.position();
  distance_ += (p - positions_.back()).norm();
  positions_.push_back(p);
  telemetry_.push_back(t);

  const int ticks = sim_.tick();
  if (t.collided)
    end_ = Termination::Collision;
  else if (ticks >= window_ticks_ && stayed_within(positions_, ticks - window_ticks_, spec_.small_loop.min_net_displacement))
    end_ = Termination::SmallLoop;
  else if (ticks >= max_ticks_)
    end_ = Termination::TimeCap;
  return &telemetry_.back();
}

void TrialRunner::abort(Termination why) {
  if (!end_) end_ = why;
}

TrialResult TrialRunner::result() const {
  TrialResult r;
  r.start = start_;
  r.termination = end_.value_or(Termination::TimeCap);
  r.ticks = sim_.tick();
  r.distance_before_collision = distance_;
  r.time_before_collision = sim_.tick() * sim_.dt();
  r.telemetry = telemetry_;
  return r;
}

TrialResult run_trial(const TrialSpec& spec, const TrialArtifacts& artifacts, const TickObserver& observer) {
  TrialRunner runner(spec, artifacts);
  while (!runner.done()) {
    const policy::Telemetry* t = runner.step();
    if (observer && t) observer(runner.sim(), *t);
  }
  return runner.result();
}

TrialResult replay_external(const TrialSpec& spec, const TrialArtifacts& artifacts,
                            const std::vector<std::optional<baselines::ExternalCommand>>& timeline) {
  baselines::CommandChannel channel;
  TrialArtifacts a = artifacts;
  a.channel = &channel;
  TrialSpec s = spec;
  s.policy = PolicyKind::External;
  TrialRunner runner(s, a);
  while (!runner.done()) {
    const auto k = static_cast<std::size_t>(runner.sim().tick());
    if (k < timeline.size() && timeline[k]) channel.push(*timeline[k]);
    runner.step();
  }
  return runner.result();
}

int count_turnarounds(const std::vector<policy::Telemetry>& telemetry, const std::vector<world::Vec2>& dead_ends,
                      double zone_radius, double min_reversal, double within, double dt) {
  const auto window = static_cast<std::size_t>(std::llround(within / dt));
  int count = 0;
  for (const world::Vec2& end : dead_ends) {
    // Re-armed only after leaving twice the zone, so wobbling on the zone
    // edge during one approach is a single visit.
    bool armed = true;
    for (std::size_t i = 0; i < telemetry.size(); ++i) {
      const double d = (telemetry[i].pose.position() - end).norm();
      if (d > 2.0 * zone_radius) armed = true;
      if (!armed || d >= zone_radius) continue;
      armed = false;
      const double h0 = telemetry[i].pose.heading;
      for (std::size_t j = i; j < telemetry.size() && j <= i + window; ++j)
        if (std::abs(world::wrap_angle(telemetry[j].pose.heading - h0)) >= min_reversal) {
          ++count;
          break;
        }
    }
  }
  return count;
}

RunSummary summarize(const TrialResult& r, std::uint64_t seed) {
  return {seed, r.start, r.distance_before_collision, r.time_before_collision, r.termination, false};
}

void Cell::recompute() {
  mean_distance = mean_time = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.practice) continue;
    mean_distance += r.distance;
    mean_time += r.time;
    ++n;
  }
  if (n) {
    mean_distance /= n;
    mean_time /= n;
  }
}

const Cell* BenchmarkTable::find(const std::string& env, const std::string& method) const {
  for (const auto& c : cells)
    if (c.environment == env && c.method == method) return &c;
  return nullptr;
}

Cell& BenchmarkTable::upsert(const std::string& env, const std::string& method) {
  for (auto& c : cells)
    if (c.environment == env && c.method == method) return c;
  cells.push_back({env, method, {}, 0.0, 0.0});
  return cells.back();
}

std::vector<std::string> BenchmarkTable::environments() const {
  std::vector<std::string> out;
  for (const auto& c : cells)
    if (std::find(out.begin(), out.end(), c.environment) == out.end()) out.push_back(c.environment);
  return out;
}

OrderingReport ordering_report(const BenchmarkTable& table) {
  OrderingReport rep;
  rep.environments = table.environments();
  for (const auto& env : rep.environments) {
    const Cell* l = table.find(env, to_string(PolicyKind::Learned));
    const Cell* d = table.find(env, to_string(PolicyKind::DepthOracle));
    const Cell* b = table.find(env, to_string(PolicyKind::BestStraight));
    if (!l || !d || !b) throw ConfigError("ordering_report: '" + env + "' lacks one of the three methods");
    const bool ok = l->mean_distance > d->mean_distance && d->mean_distance > b->mean_distance;
    rep.ordered.push_back(ok);
    rep.count += ok;
    rep.learned_over_depth.push_back(d->mean_distance > 0.0 ? l->mean_distance / d->mean_distance
                                                            : std::numeric_limits<double>::infinity());
  }
  if (!rep.learned_over_depth.empty()) {
    auto r = rep.learned_over_depth;
    std::sort(r.begin(), r.end());
    const std::size_t n = r.size();
    rep.median_ratio = n % 2 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
  }
  return rep;
}

BenchmarkConfig BenchmarkConfig::defaults() {
  BenchmarkConfig c;
  c.environments = world::shipped_plan_names();
  return c;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const std::map<std::string, world::FloorPlan>& plans,
                              const learn::NetworkParams<float>* params, const TrialCallback& on_trial) {
  BenchmarkResult out;
  try {
    for (const auto& env : cfg.environments) {
      const auto it = plans.find(env);
      if (it == plans.end()) throw ConfigError("no floorplan loaded for '" + env + "'");
      TrialArtifacts a;
      a.plan = &it->second;
      a.params = params;
      a.policy = cfg.policy;
      a.depth = cfg.depth;
      a.straight = cfg.straight;
      a.noise = cfg.noise;
      for (PolicyKind m : cfg.methods) {
        if (m == PolicyKind::External) throw ConfigError("External trials need a live operator (use serve)");
        Cell& cell = out.table.upsert(env, to_string(m));
        for (std::uint64_t seed : cfg.seeds) {
          TrialSpec spec{env, m, std::nullopt, seed, cfg.max_time, cfg.small_loop};
          const RunSummary s = summarize(run_trial(spec, a), seed);
          cell.runs.push_back(s);
          if (on_trial) on_trial(env, m, s);
        }
        cell.recompute();
      }
    }
  } catch (const ConfigError& e) {
    out.partial = true;
    out.error = e.what();
  }
  return out;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const TrialCallback& on_trial) {
  std::map<std::string, world::FloorPlan> plans;
  std::optional<learn::NetworkParams<float>> params;
  try {
    for (const auto& env : cfg.environments) plans.emplace(env, world::resolve_plan(env));
    if (std::find(cfg.methods.begin(), cfg.methods.end(), PolicyKind::Learned) != cfg.methods.end()) {
      if (cfg.checkpoint.empty()) throw ConfigError("Learned method listed but no checkpoint given");
      params = learn::load_params<float>(std::filesystem::path(cfg.checkpoint));
    }
  } catch (const std::exception& e) {
    BenchmarkResult out;
    out.partial = true;
    out.error = e.what();
    return out;
  }
  return run_benchmark(cfg, plans, params ? &*params : nullptr, on_trial);
}

}  // namespace crashnav::bench
