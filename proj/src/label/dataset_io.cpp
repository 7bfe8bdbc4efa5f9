#include "crashnav/label/dataset_io.hpp"

#include "crashnav/util/binary_io.hpp"

#include <fstream>

namespace crashnav::label {

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetFileError("cannot open dataset for writing: " + path.string());
  util::BinaryWriter w(out);
  const int width = ds.samples.empty() ? 0 : ds.samples.front().frame.width;
  const int height = ds.samples.empty() ? 0 : ds.samples.front().frame.height;
  w.magic("CNDS");
  w.u32(kDatasetFormatVersion);
  w.u64(ds.seed);
  w.f64(ds.val_fraction);
  w.u32(static_cast<std::uint32_t>(ds.tally.trajectories));
  w.u32(static_cast<std::uint32_t>(ds.tally.skipped_short));
  w.u32(static_cast<std::uint32_t>(ds.tally.collisions));
  w.u32(static_cast<std::uint32_t>(ds.tally.timeouts));
  w.u16(static_cast<std::uint16_t>(width));
  w.u16(static_cast<std::uint16_t>(height));
  w.u32(static_cast<std::uint32_t>(ds.samples.size()));
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    if (s.frame.width != width || s.frame.height != height)
      throw DatasetFileError("dataset frames must share one size");
    w.u64(s.source_trajectory_id);
    w.u32(static_cast<std::uint32_t>(s.source_tick));
    w.u8(static_cast<std::uint8_t>(s.label));
    w.u8(static_cast<std::uint8_t>(ds.split[i]));
    w.bytes(s.frame.pixels.data(), s.frame.pixels.size());
  }
  w.magic("DONE");
  w.u64(ds.content_hash());
  out.flush();
  if (!out) throw DatasetFileError("dataset write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFileError("cannot open dataset: " + path.string());
  util::BinaryReader r(in);
  try {
    if (!r.magic("CNDS")) throw DatasetFileError("not a dataset file: " + path.string());
    const std::uint32_t version = r.u32();
    if (version != kDatasetFormatVersion)
      throw DatasetFileError("dataset format_version " + std::to_string(version) + " unsupported");
    Dataset ds;
    ds.seed = r.u64();
    ds.val_fraction = r.f64();
    ds.tally.trajectories = static_cast<int>(r.u32());
    ds.tally.skipped_short = static_cast<int>(r.u32());
    ds.tally.collisions = static_cast<int>(r.u32());
    ds.tally.timeouts = static_cast<int>(r.u32());
    const int width = r.u16();
    const int height = r.u16();
    const std::uint32_t n = r.u32();
    ds.samples.reserve(n);
    ds.split.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      LabeledSample s;
      s.source_trajectory_id = r.u64();
      s.source_tick = static_cast<int>(r.u32());
      const std::uint8_t label = r.u8();
      const std::uint8_t split = r.u8();
      if (label > 1 || split > 1) throw DatasetFileError("corrupt label or split byte");
      s.label = static_cast<Label>(label);
      s.frame = world::Frame(width, height);
      r.bytes(s.frame.pixels.data(), s.frame.pixels.size());
      ++ds.class_counts[label];
      ds.samples.push_back(std::move(s));
      ds.split.push_back(static_cast<Split>(split));
    }
    if (!r.magic("DONE")) throw DatasetFileError("missing dataset trailer");
    if (r.u64() != ds.content_hash()) throw DatasetFileError("dataset content hash mismatch");
    return ds;
  } catch (const util::TruncatedError& e) {
    throw DatasetFileError(std::string("truncated dataset: ") + e.what());
  }
}

}  // namespace crashnav::label
