#include "crashnav/collect/archive.hpp"

namespace crashnav::collect {

using K = ArchiveError::Kind;

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ArchiveError(K::Io, "cannot open archive for writing: " + path.string());
  w_ = std::make_unique<util::BinaryWriter>(out_);
  w_->magic("CNTA");
  w_->u32(kArchiveFormatVersion);
}

TrajectoryWriter::~TrajectoryWriter() {
  try {
    close();
  } catch (...) {
  }
}

void TrajectoryWriter::write(const Trajectory& t) {
  if (closed_) throw ArchiveError(K::Io, "archive already closed");
  const int width = t.records.empty() ? 0 : t.records.front().frame.width;
  const int height = t.records.empty() ? 0 : t.records.front().frame.height;
  w_->magic("TRAJ");
  w_->u64(t.id);
  w_->str(t.environment_name);
  w_->u8(static_cast<std::uint8_t>(t.collection_mode));
  w_->u8(t.ended_in_collision ? 1 : 0);
  w_->u64(t.worker_seed);
  w_->u32(static_cast<std::uint32_t>(t.contact_tick.value_or(-1)));
  w_->u32(static_cast<std::uint32_t>(t.contact_segment));
  w_->u16(static_cast<std::uint16_t>(width));
  w_->u16(static_cast<std::uint16_t>(height));
  w_->u32(static_cast<std::uint32_t>(t.records.size()));
  for (const Record& r : t.records) {
    if (r.frame.width != width || r.frame.height != height)
      throw ArchiveError(K::Corrupt, "trajectory frames must share one size");
    w_->u32(static_cast<std::uint32_t>(r.tick));
    for (const Pose& p : {r.true_pose, r.odom_pose}) {
      w_->f64(p.x);
      w_->f64(p.y);
      w_->f64(p.heading);
    }
    w_->f64(r.accel_magnitude);
    w_->f64(r.command.linear());
    w_->f64(r.command.angular());
    w_->bytes(r.frame.pixels.data(), r.frame.pixels.size());
  }
  ++count_;
}

void TrajectoryWriter::close() {
  if (closed_) return;
  closed_ = true;
  w_->magic("DONE");
  w_->u32(count_);
  const std::uint64_t digest = w_->hash().digest();
  w_->u64(digest);
  out_.flush();
  if (!out_) throw ArchiveError(K::Io, "archive flush failed");
}

TrajectoryReader::TrajectoryReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw ArchiveError(K::Io, "cannot open archive: " + path.string());
  r_ = std::make_unique<util::BinaryReader>(in_);
  r_->track(&running_);
  try {
    if (!r_->magic("CNTA")) throw ArchiveError(K::BadMagic, "not a trajectory archive: " + path.string());
    const std::uint32_t version = r_->u32();
    if (version != kArchiveFormatVersion)
      throw ArchiveError(K::VersionMismatch, "archive format_version " + std::to_string(version) +
                                                 " unsupported (expected " +
                                                 std::to_string(kArchiveFormatVersion) + ")");
  } catch (const util::TruncatedError& e) {
    throw ArchiveError(K::Truncated, e.what());
  }
}

std::optional<Trajectory> TrajectoryReader::next() {
  if (done_) return std::nullopt;
  try {
    char tag[4];
    r_->bytes(tag, 4);
    if (std::memcmp(tag, "DONE", 4) == 0) {
      const std::uint32_t count = r_->u32();
      const std::uint64_t expected = running_.digest();
      r_->track(nullptr);
      const std::uint64_t stored = r_->u64();
      if (count != count_)
        throw ArchiveError(K::Corrupt, "trailer count " + std::to_string(count) + " != " + std::to_string(count_));
      if (stored != expected) throw ArchiveError(K::Corrupt, "archive content hash mismatch");
      hash_ = stored;
      done_ = true;
      return std::nullopt;
    }
    if (std::memcmp(tag, "TRAJ", 4) != 0) throw ArchiveError(K::Corrupt, "bad trajectory block tag");

    Trajectory t;
    t.id = r_->u64();
    t.environment_name = r_->str();
    const std::uint8_t mode = r_->u8();
    if (mode > 1) throw ArchiveError(K::Corrupt, "bad collection mode");
    t.collection_mode = static_cast<CollectionMode>(mode);
    t.ended_in_collision = r_->u8() != 0;
    t.worker_seed = r_->u64();
    const auto contact = static_cast<std::int32_t>(r_->u32());
    if (contact >= 0) t.contact_tick = contact;
    t.contact_segment = static_cast<std::int32_t>(r_->u32());
    const int width = r_->u16();
    const int height = r_->u16();
    const std::uint32_t n = r_->u32();
    t.records.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      Record rec;
      rec.tick = static_cast<int>(r_->u32());
      double v[6];
      for (double& x : v) x = r_->f64();
      rec.true_pose.x = v[0];
      rec.true_pose.y = v[1];
      rec.true_pose.heading = v[2];
      rec.odom_pose.x = v[3];
      rec.odom_pose.y = v[4];
      rec.odom_pose.heading = v[5];
      rec.accel_magnitude = r_->f64();
      const double lin = r_->f64();
      const double ang = r_->f64();
      rec.command = Command(lin, ang);
      rec.frame = world::Frame(width, height);
      r_->bytes(rec.frame.pixels.data(), rec.frame.pixels.size());
      t.records.push_back(std::move(rec));
    }
    ++count_;
    return t;
  } catch (const util::TruncatedError& e) {
    throw ArchiveError(K::Truncated, e.what());
  }
}

void write_trajectories(const std::vector<Trajectory>& trajectories, const std::filesystem::path& path) {
  TrajectoryWriter w(path);
  for (const auto& t : trajectories) w.write(t);
  w.close();
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
  TrajectoryReader r(path);
  std::vector<Trajectory> out;
  while (auto t = r.next()) out.push_back(std::move(*t));
  return out;
}

std::uint32_t verify_archive(const std::filesystem::path& path, std::uint64_t* content_hash) {
  TrajectoryReader r(path);
  std::uint32_t n = 0;
  while (r.next()) ++n;
  if (content_hash) *content_hash = r.content_hash();
  return n;
}

}  // namespace crashnav::collect
