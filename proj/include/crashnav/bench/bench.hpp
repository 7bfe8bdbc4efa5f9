#pragma once

#include "crashnav/baselines/baselines.hpp"
#include "crashnav/learn/network.hpp"
#include "crashnav/policy/policy.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crashnav::bench {

enum class PolicyKind : std::uint8_t { Learned = 0, BestStraight = 1, DepthOracle = 2, External = 3 };
std::string to_string(PolicyKind k);
/// Accepts the enum names; "Human" is an alias for External.
PolicyKind policy_kind_from_string(const std::string& s);

enum class Termination : std::uint8_t { Collision = 0, SmallLoop = 1, TimeCap = 2, Disconnect = 3 };
std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

/// Spinning on the spot: every position over the trailing window stayed
/// closer than min_net_displacement to the window's first position.
struct SmallLoop {
  double window = 10.0;               // s
  double min_net_displacement = 0.5;  // m
};

/// True when positions[from..] all lie within `radius` of positions[from].
bool stayed_within(const std::vector<world::Vec2>& positions, std::size_t from, double radius);

struct TrialSpec {
  std::string plan;
  PolicyKind policy = PolicyKind::Learned;
  std::optional<world::Pose> start;  // nullopt: sampled from the seed
  std::uint64_t seed = 1;
  double max_time = 300.0;
  SmallLoop small_loop;

  /// Throws ConfigError unless max_time > 0 and 0 < window < max_time.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a trial may need besides its spec. Pointers are borrowed.
struct TrialArtifacts {
  const world::FloorPlan* plan = nullptr;
  const learn::NetworkParams<float>* params = nullptr;  // Learned
  baselines::CommandChannel* channel = nullptr;         // External
  policy::PolicyConfig policy;
  baselines::DepthPolicyConfig depth;
  baselines::StraightOracleConfig straight;
  vehicle::NoiseModel noise;
  world::Camera camera;
};

struct TrialResult {
  double distance_before_collision = 0.0;  // true path length, m
  double time_before_collision = 0.0;      // s
  Termination termination = Termination::TimeCap;
  int ticks = 0;
  world::Pose start;
  std::vector<policy::Telemetry> telemetry;
};

/// Start pose for `seed`: a uniformly chosen spawn region, a uniform point
/// inside it and a uniform heading.
world::Pose sample_start(const world::FloorPlan& plan, std::uint64_t seed);

/// Seed of the vehicle noise stream for a trial seed.
std::uint64_t trial_noise_seed(std::uint64_t seed);

/// Called after every tick of run_trial; lets a live session watch or pace.
using TickObserver = std::function<void(const vehicle::Sim&, const policy::Telemetry&)>;

/// Incremental form of run_trial: one step() per simulation tick.
class TrialRunner {
 public:
  /// Validates the spec and artifacts (ConfigError) and resolves the start.
  TrialRunner(const TrialSpec& spec, const TrialArtifacts& artifacts);

  bool done() const { return end_.has_value(); }
  /// Decides and advances one tick; sets the termination when reached.
  /// Returns nullptr when an operator disconnect ended the trial before
  /// anything was flown. Precondition: !done().
  const policy::Telemetry* step();
  /// Ends the trial from outside (operator gone) unless it already ended.
  void abort(Termination why);

  const vehicle::Sim& sim() const { return sim_; }
  double distance() const { return distance_; }
  const world::Pose& start() const { return start_; }
  std::optional<Termination> termination() const { return end_; }
  TrialResult result() const;

 private:
  static world::Pose resolve_start(const TrialSpec& spec, const TrialArtifacts& a);

  TrialSpec spec_;
  TrialArtifacts a_;
  world::Pose start_;
  vehicle::Sim sim_;
  int max_ticks_;
  int window_ticks_;
  policy::PolicyState pstate_;
  policy::ProbabilitySource source_;
  std::optional<baselines::ExternalPolicy> external_;
  std::vector<world::Vec2> positions_;
  std::vector<policy::Telemetry> telemetry_;
  double distance_ = 0.0;
  std::optional<Termination> end_;
};

/// Flies one trial until contact, a small loop (see SmallLoop), the time
/// cap, or an operator
/// disconnect. BestStraight replaces the start heading with the oracle's
/// choice from the start position. Throws ConfigError before stepping when
/// an artifact the policy needs is missing.
TrialResult run_trial(const TrialSpec& spec, const TrialArtifacts& artifacts, const TickObserver& observer = {});

/// Server-side replay of an operator input timeline: entry k, when set, is
/// delivered just before tick k; later ticks hold the last command.
TrialResult replay_external(const TrialSpec& spec, const TrialArtifacts& artifacts,
                            const std::vector<std::optional<baselines::ExternalCommand>>& timeline);

/// Number of times the drone entered the zone around a dead end and then
/// reversed its heading by at least `min_reversal` within `within` seconds
/// of entering. A new visit starts only after leaving twice the radius.
int count_turnarounds(const std::vector<policy::Telemetry>& telemetry, const std::vector<world::Vec2>& dead_ends,
                      double zone_radius, double min_reversal, double within, double dt = vehicle::kTickSeconds);

struct RunSummary {
  std::uint64_t seed = 0;
  world::Pose start;
  double distance = 0.0;
  double time = 0.0;
  Termination termination = Termination::TimeCap;
  bool practice = false;

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

RunSummary summarize(const TrialResult& r, std::uint64_t seed);

struct Cell {
  std::string environment;
  std::string method;  // to_string(PolicyKind), or "Human"
  std::vector<RunSummary> runs;
  double mean_distance = 0.0;
  double mean_time = 0.0;

  void recompute();
};

struct BenchmarkTable {
  std::vector<Cell> cells;

  const Cell* find(const std::string& env, const std::string& method) const;
  Cell& upsert(const std::string& env, const std::string& method);
  std::vector<std::string> environments() const;  // first-appearance order
};

struct OrderingReport {
  std::vector<std::string> environments;
  std::vector<bool> ordered;  // Learned > DepthOracle > BestStraight, strict
  int count = 0;
  /// mean(Learned) / mean(DepthOracle) per environment; infinity when the
  /// depth mean is zero.
  std::vector<double> learned_over_depth;
  double median_ratio = 0.0;
};

/// Requires all three automatic methods in every environment of the table
/// (throws ConfigError otherwise).
OrderingReport ordering_report(const BenchmarkTable& table);

struct BenchmarkConfig {
  std::vector<std::string> environments;
  std::vector<PolicyKind> methods{PolicyKind::BestStraight, PolicyKind::DepthOracle, PolicyKind::Learned};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double max_time = 300.0;
  SmallLoop small_loop;
  std::string checkpoint;  // required when Learned is listed
  policy::PolicyConfig policy;
  baselines::DepthPolicyConfig depth;
  baselines::StraightOracleConfig straight;
  vehicle::NoiseModel noise;

  static BenchmarkConfig defaults();  // all shipped plans
};

struct BenchmarkResult {
  BenchmarkTable table;
  bool partial = false;
  std::string error;  // first configuration error when partial
};

using TrialCallback = std::function<void(const std::string& env, PolicyKind, const RunSummary&)>;

/// Runs every (environment, method, seed) trial sequentially. A
/// configuration error stops the run and returns what was finished with
/// `partial` set. External trials are not run in batch.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const TrialCallback& on_trial = {});
/// Same with preloaded artifacts; plans are looked up by environment name.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const std::map<std::string, world::FloorPlan>& plans,
                              const learn::NetworkParams<float>* params, const TrialCallback& on_trial = {});

}  // namespace crashnav::bench
