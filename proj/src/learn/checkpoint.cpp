#include "crashnav/learn/checkpoint.hpp"

#include "crashnav/util/binary_io.hpp"

#include <fstream>

namespace crashnav::learn {
namespace {

template <typename Scalar>
void put(util::BinaryWriter& w, Scalar v) {
  if constexpr (sizeof(Scalar) == 4)
    w.f32(v);
  else
    w.f64(v);
}

template <typename Scalar>
Scalar get(util::BinaryReader& r) {
  if constexpr (sizeof(Scalar) == 4)
    return r.f32();
  else
    return r.f64();
}

}  // namespace

template <typename Scalar>
void save_params(const NetworkParams<Scalar>& params, std::ostream& out) {
  util::BinaryWriter w(out);
  w.magic("CNCK");
  w.u32(kCheckpointFormatVersion);
  w.u8(sizeof(Scalar));
  w.u64(params.init_seed);
  w.u32(params.spec.input_height);
  w.u32(params.spec.input_width);
  w.u32(static_cast<std::uint32_t>(params.spec.layers.size()));
  for (const auto& l : params.spec.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(static_cast<std::uint32_t>(l.out));
    w.u32(static_cast<std::uint32_t>(l.kernel));
    w.u32(static_cast<std::uint32_t>(l.stride));
  }
  for (std::size_t i = 0; i < params.spec.layers.size(); ++i) {
    if (!params.spec.layers[i].has_params()) continue;
    const auto& W = params.weights[i];
    const auto& b = params.biases[i];
    w.u32(static_cast<std::uint32_t>(W.rows()));
    w.u32(static_cast<std::uint32_t>(W.cols()));
    for (Eigen::Index k = 0; k < W.size(); ++k) put(w, W.data()[k]);
    w.u32(static_cast<std::uint32_t>(b.size()));
    for (Eigen::Index k = 0; k < b.size(); ++k) put(w, b.data()[k]);
  }
  const std::uint64_t h = w.hash().digest();
  w.magic("DONE");
  w.u64(h);
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "checkpoint: write failed");
}

template <typename Scalar>
void save_params(const NetworkParams<Scalar>& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "checkpoint: cannot open " + path.string());
  save_params(params, out);
}

template <typename Scalar>
NetworkParams<Scalar> load_params(std::istream& in, const NetSpec* expected) {
  using K = CheckpointError::Kind;
  util::BinaryReader r(in);
  util::Fnv1a hash;
  r.track(&hash);
  try {
    if (!r.magic("CNCK")) throw CheckpointError(K::BadMagic, "checkpoint: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointFormatVersion)
      throw CheckpointError(K::VersionMismatch, "checkpoint: format_version " + std::to_string(version) +
                                                    " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
    const std::uint8_t scalar_bytes = r.u8();
    if (scalar_bytes != sizeof(Scalar))
      throw CheckpointError(K::ScalarMismatch, "checkpoint: stored with " + std::to_string(scalar_bytes) +
                                                   "-byte scalars");
    const std::uint64_t seed = r.u64();
    NetSpec spec;
    spec.input_height = static_cast<int>(r.u32());
    spec.input_width = static_cast<int>(r.u32());
    const std::uint32_t n_layers = r.u32();
    if (n_layers > 1024) throw CheckpointError(K::Corrupt, "checkpoint: implausible layer count");
    for (std::uint32_t i = 0; i < n_layers; ++i) {
      LayerSpec l;
      const std::uint8_t kind = r.u8();
      if (kind > static_cast<std::uint8_t>(LayerSpec::Kind::Dense))
        throw CheckpointError(K::Corrupt, "checkpoint: unknown layer kind");
      l.kind = static_cast<LayerSpec::Kind>(kind);
      l.out = static_cast<int>(r.u32());
      l.kernel = static_cast<int>(r.u32());
      l.stride = static_cast<int>(r.u32());
      spec.layers.push_back(l);
    }
    try {
      spec.validate();
    } catch (const SpecError& e) {
      throw CheckpointError(K::Corrupt, std::string("checkpoint: embedded spec invalid: ") + e.what());
    }
    if (expected && !(*expected == spec))
      throw CheckpointError(K::SpecMismatch, "checkpoint: network spec " + spec.describe() + " does not match " +
                                                 expected->describe());

    auto params = NetworkParams<Scalar>::zeros(spec);
    params.init_seed = seed;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      if (!spec.layers[i].has_params()) continue;
      auto& W = params.weights[i];
      auto& b = params.biases[i];
      const std::uint32_t rows = r.u32(), cols = r.u32();
      if (rows != W.rows() || cols != W.cols()) throw CheckpointError(K::Corrupt, "checkpoint: tensor shape");
      for (Eigen::Index k = 0; k < W.size(); ++k) W.data()[k] = get<Scalar>(r);
      if (r.u32() != b.size()) throw CheckpointError(K::Corrupt, "checkpoint: bias shape");
      for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = get<Scalar>(r);
    }
    const std::uint64_t digest = hash.digest();
    r.track(nullptr);
    if (!r.magic("DONE") || r.u64() != digest) throw CheckpointError(K::Corrupt, "checkpoint: checksum mismatch");
    if (!params.all_finite()) throw CheckpointError(K::Corrupt, "checkpoint: non-finite parameters");
    return params;
  } catch (const util::TruncatedError&) {
    throw CheckpointError(K::Corrupt, "checkpoint: truncated");
  }
}

template <typename Scalar>
NetworkParams<Scalar> load_params(const std::filesystem::path& path, const NetSpec* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Io, "checkpoint: cannot open " + path.string());
  return load_params<Scalar>(in, expected);
}

template void save_params<float>(const NetworkParams<float>&, std::ostream&);
template void save_params<double>(const NetworkParams<double>&, std::ostream&);
template void save_params<float>(const NetworkParams<float>&, const std::filesystem::path&);
template void save_params<double>(const NetworkParams<double>&, const std::filesystem::path&);
template NetworkParams<float> load_params<float>(std::istream&, const NetSpec*);
template NetworkParams<double> load_params<double>(std::istream&, const NetSpec*);
template NetworkParams<float> load_params<float>(const std::filesystem::path&, const NetSpec*);
template NetworkParams<double> load_params<double>(const std::filesystem::path&, const NetSpec*);

}  // namespace crashnav::learn
