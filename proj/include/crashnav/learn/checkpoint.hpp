#pragma once

#include "crashnav/learn/network.hpp"

#include <filesystem>
#include <iosfwd>

namespace crashnav::learn {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, VersionMismatch, SpecMismatch, ScalarMismatch, Corrupt, Io };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Checkpoint layout (little-endian):
///
///   "CNCK" u32 format_version u8 scalar_bytes (4 or 8) u64 init_seed
///   u32 input_height u32 input_width u32 n_layers
///   n_layers x { u8 kind, i32 out, i32 kernel, i32 stride }
///   per parametric layer: u32 rows u32 cols weights (column-major), u32 n bias
///   "DONE" u64 fnv1a(all preceding bytes)
///
/// Tensors are stored at the scalar width they were saved with, so a
/// round trip is bit-exact.
template <typename Scalar>
void save_params(const NetworkParams<Scalar>& params, std::ostream& out);
template <typename Scalar>
void save_params(const NetworkParams<Scalar>& params, const std::filesystem::path& path);

/// When `expected` is given, a checkpoint built for a different NetSpec is
/// rejected with Kind::SpecMismatch.
template <typename Scalar>
NetworkParams<Scalar> load_params(std::istream& in, const NetSpec* expected = nullptr);
template <typename Scalar>
NetworkParams<Scalar> load_params(const std::filesystem::path& path, const NetSpec* expected = nullptr);

}  // namespace crashnav::learn
