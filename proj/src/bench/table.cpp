#include "crashnav/bench/table.hpp"

#include "crashnav/world/floorplan_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace crashnav::bench {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bench config: bad value for '") + key + "': " + e.what());
  }
}

json pose_json(const world::Pose& p) { return json::array({p.x, p.y, p.heading}); }

world::Pose pose_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

struct Reference {
  const char* env;
  const char* display;
  double v[4][2];  // BestStraight, DepthOracle, Learned, Human
};

// Published averages per environment, in display order.
constexpr Reference kReference[] = {
    {"glass_door", "Glass door", {{3.3, 3.0}, {3.1, 5.0}, {27.9, 56.6}, {84.0, 145.0}}},
    {"office_floor", "Office floor", {{6.2, 7.0}, {14.0, 28.3}, {54.0, 120.4}, {99.9, 209.0}}},
    {"entrance_atrium", "Entrance atrium", {{2.7, 3.0}, {13.4, 22.6}, {42.3, 78.4}, {119.6, 196.0}}},
    {"hallway", "Hallway", {{6.2, 6.6}, {24.9, 26.6}, {115.2, 210.0}, {95.7, 141.0}}},
    {"hallway_chairs", "Hallway w/ chairs", {{2.7, 3.1}, {25.5, 43.5}, {86.9, 203.5}, {69.3, 121.0}}},
    {"wean", "Wean hall", {{4.2, 4.6}, {11.6, 22.1}, {22.4, 47.0}, {70.6, 126.0}}},
};

struct MethodRow {
  const char* key;
  const char* display;
};
constexpr MethodRow kMethods[] = {
    {"BestStraight", "Best Straight"}, {"DepthOracle", "Depth Oracle"}, {"Learned", "Learned"}, {"Human", "Human"}};

int method_index(const std::string& m) {
  for (int i = 0; i < 4; ++i)
    if (m == kMethods[i].key) return i;
  return -1;
}

std::string display_env(const std::string& env) {
  for (const auto& r : kReference)
    if (env == r.env) return r.display;
  return env;
}

std::string display_method(const std::string& m) {
  const int i = method_index(m);
  return i >= 0 ? kMethods[i].display : m;
}

std::string fmt(const char* f, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string table_method_name(const std::string& m) { return m == "External" ? "Human" : m; }

}  // namespace

std::optional<std::pair<double, double>> reference_value(const std::string& env, const std::string& method) {
  const int i = method_index(table_method_name(method));
  if (i < 0) return std::nullopt;
  for (const auto& r : kReference)
    if (env == r.env) return std::pair{r.v[i][0], r.v[i][1]};
  return std::nullopt;
}

json config_to_json(const BenchmarkConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  return {
      {"format_version", kBenchFormatVersion},
      {"environments", c.environments},
      {"methods", methods},
      {"seeds", c.seeds},
      {"max_time", c.max_time},
      {"small_loop", {{"window", c.small_loop.window}, {"min_net_displacement", c.small_loop.min_net_displacement}}},
      {"checkpoint", c.checkpoint},
      {"policy",
       {{"alpha", c.policy.alpha},
        {"beta", c.policy.beta},
        {"k_yaw", c.policy.k_yaw},
        {"turn_rate", c.policy.turn_rate},
        {"crop_fraction", c.policy.crop_fraction},
        {"max_turn_ticks", c.policy.max_turn_ticks}}},
      {"depth",
       {{"use_first_opaque", c.depth.use_first_opaque},
        {"n_sectors", c.depth.n_sectors},
        {"steer_gain", c.depth.steer_gain},
        {"stop_threshold", c.depth.stop_threshold},
        {"cruise_speed", c.depth.cruise_speed},
        {"turn_rate", c.depth.turn_rate},
        {"n_rays", c.depth.n_rays},
        {"max_range", c.depth.max_range},
        {"body_radius", c.depth.body_radius}}},
      {"straight",
       {{"k_headings", c.straight.k_headings},
        {"runs_per_heading", c.straight.runs_per_heading},
        {"speed", c.straight.speed}}},
      {"noise",
       {{"heading_drift_std", c.noise.heading_drift_std},
        {"speed_jitter_std", c.noise.speed_jitter_std},
        {"odom_drift_std", c.noise.odom_drift_std},
        {"accel_noise_std", c.noise.accel_noise_std},
        {"accel_spike_mean", c.noise.accel_spike_mean}}},
  };
}

BenchmarkConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("bench config: top level must be an object");
  if (j.contains("format_version") && j.at("format_version") != kBenchFormatVersion)
    throw ConfigError("bench config: unsupported format_version");
  BenchmarkConfig c = BenchmarkConfig::defaults();
  read_if(j, "environments", c.environments);
  if (j.contains("methods")) {
    c.methods.clear();
    std::vector<std::string> names;
    read_if(j, "methods", names);
    for (const auto& n : names) c.methods.push_back(policy_kind_from_string(n));
  }
  read_if(j, "seeds", c.seeds);
  read_if(j, "max_time", c.max_time);
  read_if(j, "checkpoint", c.checkpoint);
  if (j.contains("small_loop")) {
    read_if(j["small_loop"], "window", c.small_loop.window);
    read_if(j["small_loop"], "min_net_displacement", c.small_loop.min_net_displacement);
  }
  if (j.contains("policy")) {
    const json& p = j["policy"];
    read_if(p, "alpha", c.policy.alpha);
    read_if(p, "beta", c.policy.beta);
    read_if(p, "k_yaw", c.policy.k_yaw);
    read_if(p, "turn_rate", c.policy.turn_rate);
    read_if(p, "crop_fraction", c.policy.crop_fraction);
    read_if(p, "max_turn_ticks", c.policy.max_turn_ticks);
  }
  if (j.contains("depth")) {
    const json& d = j["depth"];
    read_if(d, "use_first_opaque", c.depth.use_first_opaque);
    read_if(d, "n_sectors", c.depth.n_sectors);
    read_if(d, "steer_gain", c.depth.steer_gain);
    read_if(d, "stop_threshold", c.depth.stop_threshold);
    read_if(d, "cruise_speed", c.depth.cruise_speed);
    read_if(d, "turn_rate", c.depth.turn_rate);
    read_if(d, "n_rays", c.depth.n_rays);
    read_if(d, "max_range", c.depth.max_range);
    read_if(d, "body_radius", c.depth.body_radius);
  }
  if (j.contains("straight")) {
    const json& s = j["straight"];
    read_if(s, "k_headings", c.straight.k_headings);
    read_if(s, "runs_per_heading", c.straight.runs_per_heading);
    read_if(s, "speed", c.straight.speed);
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    read_if(n, "heading_drift_std", c.noise.heading_drift_std);
    read_if(n, "speed_jitter_std", c.noise.speed_jitter_std);
    read_if(n, "odom_drift_std", c.noise.odom_drift_std);
    read_if(n, "accel_noise_std", c.noise.accel_noise_std);
    read_if(n, "accel_spike_mean", c.noise.accel_spike_mean);
  }
  if (c.environments.empty()) throw ConfigError("bench config: no environments");
  if (c.seeds.empty()) throw ConfigError("bench config: no seeds");
  try {
    c.policy.validate();
    c.depth.validate();
    c.noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bench config: ") + e.what());
  }
  TrialSpec probe;
  probe.max_time = c.max_time;
  probe.small_loop = c.small_loop;
  probe.validate();
  return c;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bench config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("bench config: " + std::string(e.what()));
  }
  return config_from_json(j);
}

json results_to_json(const BenchmarkResult& result, const BenchmarkConfig& cfg) {
  json cells = json::array();
  for (const auto& c : result.table.cells) {
    json runs = json::array();
    for (const auto& r : c.runs)
      runs.push_back({{"seed", r.seed},
                      {"start", pose_json(r.start)},
                      {"distance", r.distance},
                      {"time", r.time},
                      {"termination", to_string(r.termination)},
                      {"practice", r.practice}});
    cells.push_back({{"environment", c.environment},
                     {"method", c.method},
                     {"runs", runs},
                     {"mean_distance", c.mean_distance},
                     {"mean_time", c.mean_time}});
  }
  json j{{"format_version", kBenchFormatVersion},
         {"config", config_to_json(cfg)},
         {"cells", cells},
         {"partial", result.partial},
         {"error", result.error}};
  try {
    const OrderingReport rep = ordering_report(result.table);
    json ord = json::object();
    for (std::size_t i = 0; i < rep.environments.size(); ++i) ord[rep.environments[i]] = bool(rep.ordered[i]);
    j["ordering"] = {{"per_environment", ord}, {"count", rep.count}, {"median_learned_over_depth", rep.median_ratio}};
  } catch (const ConfigError&) {
    // Ordering needs all three automatic methods; omitted otherwise.
  }
  return j;
}

BenchmarkTable table_from_json(const json& j) {
  BenchmarkTable t;
  try {
    for (const auto& c : j.at("cells")) {
      Cell& cell = t.upsert(c.at("environment").get<std::string>(), c.at("method").get<std::string>());
      for (const auto& r : c.at("runs"))
        cell.runs.push_back({r.at("seed").get<std::uint64_t>(), pose_from(r.at("start")), r.at("distance").get<double>(),
                             r.at("time").get<double>(), termination_from_string(r.at("termination").get<std::string>()),
                             r.value("practice", false)});
      cell.recompute();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("results file: ") + e.what());
  }
  return t;
}

std::string render_table(const BenchmarkTable& table) {
  const auto envs = table.environments();
  std::vector<std::string> methods;
  for (const auto& m : kMethods)
    for (const auto& c : table.cells)
      if (c.method == m.key) {
        methods.push_back(m.key);
        break;
      }
  for (const auto& c : table.cells)
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);

  constexpr std::size_t kLabel = 16, kCol = 22;
  std::ostringstream os;
  os << "Average distance and average time before collision\n";
  for (std::size_t block = 0; block < envs.size(); block += 3) {
    const std::size_t end = std::min(envs.size(), block + 3);
    os << '\n' << pad("", kLabel);
    for (std::size_t e = block; e < end; ++e) os << "| " << pad(display_env(envs[e]), kCol);
    os << '\n' << pad("", kLabel);
    for (std::size_t e = block; e < end; ++e) os << "| " << pad("Dist (m)   Time (s)", kCol);
    os << '\n' << std::string(kLabel + (end - block) * (kCol + 2), '-') << '\n';
    for (const auto& m : methods) {
      os << pad(display_method(m), kLabel);
      for (std::size_t e = block; e < end; ++e) {
        const Cell* c = table.find(envs[e], m);
        os << "| " << pad(c ? fmt("%8.1f   %8.1f", c->mean_distance, c->mean_time) : "       -          -", kCol);
      }
      os << '\n';
    }
    os << pad("  reference:", kLabel) << '\n';
    for (const auto& m : methods) {
      bool any = false;
      for (std::size_t e = block; e < end; ++e) any |= reference_value(envs[e], m).has_value();
      if (!any) continue;
      os << pad("  " + display_method(m), kLabel);
      for (std::size_t e = block; e < end; ++e) {
        const auto ref = reference_value(envs[e], m);
        os << "| " << pad(ref ? fmt("%8.1f   %8.1f", ref->first, ref->second) : "       -          -", kCol);
      }
      os << '\n';
    }
  }
  return os.str();
}

void write_results(const std::filesystem::path& stem, const BenchmarkResult& result, const BenchmarkConfig& cfg) {
  BenchmarkResult merged = result;
  const auto json_path = std::filesystem::path(stem.string() + ".json");
  if (std::filesystem::exists(json_path)) {
    std::ifstream in(json_path);
    try {
      const BenchmarkTable old = table_from_json(json::parse(in));
      for (const auto& c : old.cells)
        if (c.method == "Human" && !merged.table.find(c.environment, c.method)) merged.table.cells.push_back(c);
    } catch (const std::exception&) {
      // An unreadable previous file is simply replaced.
    }
  }
  {
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + json_path.string());
    out << results_to_json(merged, cfg).dump(2) << '\n';
  }
  std::ofstream txt(stem.string() + ".txt", std::ios::trunc);
  if (!txt) throw ConfigError("cannot write " + stem.string() + ".txt");
  txt << render_table(merged.table);
  if (merged.partial) txt << "\nPARTIAL RESULTS: " << merged.error << '\n';
}

void record_human_trial(const std::filesystem::path& stem, const std::string& env, const RunSummary& run) {
  if (run.practice) return;
  const auto json_path = std::filesystem::path(stem.string() + ".json");
  json doc;
  BenchmarkConfig cfg = BenchmarkConfig::defaults();
  BenchmarkResult result;
  if (std::filesystem::exists(json_path)) {
    std::ifstream in(json_path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("results file: " + std::string(e.what()));
    }
    result.table = table_from_json(doc);
    if (doc.contains("config")) cfg = config_from_json(doc["config"]);
    result.partial = doc.value("partial", false);
    result.error = doc.value("error", std::string());
  }
  Cell& cell = result.table.upsert(env, "Human");
  cell.runs.push_back(run);
  cell.recompute();
  {
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + json_path.string());
    out << results_to_json(result, cfg).dump(2) << '\n';
  }
  std::ofstream txt(stem.string() + ".txt", std::ios::trunc);
  txt << render_table(result.table);
}

}  // namespace crashnav::bench
