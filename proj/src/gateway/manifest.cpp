#include "crashnav/gateway/manifest.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crashnav::gateway {

using nlohmann::json;

void RunManifest::add(std::string kind, const std::filesystem::path& path, std::uint64_t seed, int format_version) {
  artifacts.push_back({std::move(kind), path.string(), seed, format_version});
}

std::vector<std::string> RunManifest::missing() const {
  std::vector<std::string> out;
  for (const auto& a : artifacts)
    if (!std::filesystem::exists(a.path)) out.push_back(a.path);
  return out;
}

std::string RunManifest::to_json() const {
  json arts = json::array();
  for (const auto& a : artifacts)
    arts.push_back({{"kind", a.kind}, {"path", a.path}, {"seed", a.seed}, {"format_version", a.format_version}});
  return json{{"format_version", kManifestFormatVersion}, {"tool_version", tool_version}, {"artifacts", arts}}.dump(2);
}

RunManifest RunManifest::from_json(const std::string& doc) {
  try {
    const json j = json::parse(doc);
    if (j.at("format_version").get<int>() != kManifestFormatVersion)
      throw std::runtime_error("manifest: unsupported format_version");
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("kind").get<std::string>(), a.at("path").get<std::string>(),
                             a.at("seed").get<std::uint64_t>(), a.at("format_version").get<int>()});
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("manifest: ") + e.what());
  }
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("manifest: cannot write " + path.string());
  out << to_json() << '\n';
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace crashnav::gateway
