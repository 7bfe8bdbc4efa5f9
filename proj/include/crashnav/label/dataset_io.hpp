#pragma once

#include "crashnav/label/label.hpp"

#include <filesystem>

namespace crashnav::label {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

class DatasetFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset file layout (little-endian):
///
///   "CNDS" u32 format_version u64 seed f64 val_fraction
///   u32 tally.trajectories u32 tally.skipped_short u32 tally.collisions u32 tally.timeouts
///   u16 width u16 height u32 n_samples
///   n_samples x { u64 trajectory_id, u32 tick, u8 label (0 = positive),
///                 u8 split (0 = train), u8[width*height] frame }
///   "DONE" u64 Dataset::content_hash()
///
/// The split manifest is the per-sample split byte.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace crashnav::label
