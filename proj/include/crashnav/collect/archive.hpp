#pragma once

#include "crashnav/collect/collect.hpp"
#include "crashnav/util/binary_io.hpp"

#include <filesystem>
#include <fstream>
#include <memory>

namespace crashnav::collect {

inline constexpr std::uint32_t kArchiveFormatVersion = 1;

class ArchiveError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, VersionMismatch, Truncated, Corrupt, Io };
  ArchiveError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Streaming writer for trajectory archives. Byte layout (little-endian):
///
///   "CNTA" u32 format_version
///   per trajectory:
///     "TRAJ" u64 id, str env_name, u8 mode, u8 ended_in_collision,
///     u64 worker_seed, i32 contact_tick (-1 = none), i32 contact_segment,
///     u16 width, u16 height, u32 n_records,
///     n_records x { u32 tick, f64 true_x, true_y, true_heading,
///                   f64 odom_x, odom_y, odom_heading, f64 accel,
///                   f64 cmd_linear, cmd_angular, u8[width*height] frame }
///   "DONE" u32 trajectory_count u64 fnv1a(all preceding bytes)
///
/// Strings are u32 length + bytes. Trajectories may be appended in any
/// order; each carries the seed of the worker that produced it.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  ~TrajectoryWriter();
  TrajectoryWriter(const TrajectoryWriter&) = delete;
  TrajectoryWriter& operator=(const TrajectoryWriter&) = delete;

  void write(const Trajectory& traj);
  /// Writes the trailer. Called by the destructor if omitted.
  void close();
  std::uint32_t count() const { return count_; }

 private:
  std::ofstream out_;
  std::unique_ptr<util::BinaryWriter> w_;
  std::uint32_t count_ = 0;
  bool closed_ = false;
};

class TrajectoryReader {
 public:
  explicit TrajectoryReader(const std::filesystem::path& path);

  /// Next trajectory in write order, or nullopt after a verified trailer.
  std::optional<Trajectory> next();
  std::uint64_t content_hash() const { return hash_; }

 private:
  std::ifstream in_;
  std::unique_ptr<util::BinaryReader> r_;
  util::Fnv1a running_;
  std::uint32_t count_ = 0;
  std::uint64_t hash_ = 0;
  bool done_ = false;
};

void write_trajectories(const std::vector<Trajectory>& trajectories, const std::filesystem::path& path);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);

/// Reads the whole archive, checking structure and trailer, and returns its
/// trajectory count.
std::uint32_t verify_archive(const std::filesystem::path& path, std::uint64_t* content_hash = nullptr);

}  // namespace crashnav::collect
