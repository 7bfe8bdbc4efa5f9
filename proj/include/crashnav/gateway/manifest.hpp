#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crashnav::gateway {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestFormatVersion = 1;

struct ManifestEntry {
  std::string kind;  // floorplan | archive | dataset | checkpoint | results
  std::string path;
  std::uint64_t seed = 0;
  int format_version = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Record of the artifacts a pipeline run produced, with their seeds.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::vector<ManifestEntry> artifacts;

  void add(std::string kind, const std::filesystem::path& path, std::uint64_t seed, int format_version);
  /// Paths that do not exist; empty when the manifest is valid.
  std::vector<std::string> missing() const;

  std::string to_json() const;
  static RunManifest from_json(const std::string& doc);
  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

}  // namespace crashnav::gateway
