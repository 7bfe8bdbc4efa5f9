#include "crashnav/world/texture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace crashnav::world {
namespace {

std::uint32_t hash2(std::int64_t i, std::int64_t j) {
  auto h = static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4FULL;
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 29;
  return static_cast<std::uint32_t>(h);
}

double unit_hash(std::int64_t i, std::int64_t j) { return hash2(i, j) / 4294967296.0; }

double brick(double u, double v) {
  constexpr double bw = 0.40, bh = 0.15, mortar = 0.02;
  const double row = std::floor(v / bh);
  const double offset = std::fmod(row, 2.0) == 0.0 ? 0.0 : 0.5 * bw;
  const double fu = std::fmod(u + offset, bw);
  const double fv = std::fmod(v, bh);
  if (fu < mortar || fv < mortar) return 0.82;
  const auto col = static_cast<std::int64_t>(std::floor((u + offset) / bw));
  return 0.40 + 0.12 * unit_hash(col, static_cast<std::int64_t>(row));
}

double stripe(double u) {
  return std::fmod(u, 0.5) < 0.25 ? 0.30 : 0.70;
}

double noise(double u, double v) {
  constexpr double cell = 0.05;
  return 0.35 + 0.4 * unit_hash(static_cast<std::int64_t>(std::floor(u / cell)),
                                static_cast<std::int64_t>(std::floor(v / cell)));
}

double door_panel(double u, double v) {
  constexpr double width = 1.0, frame = 0.08;
  const double fu = std::fmod(u, width);
  if (fu < frame || fu > width - frame || v > 2.1) return 0.25;
  if (v > 1.0 && v < 1.1 && fu > 0.7 && fu < 0.85) return 0.9;  // handle
  return 0.62;
}

double furniture_grain(double u, double v) {
  return 0.45 + 0.12 * std::sin(23.0 * u + 3.0 * std::sin(4.0 * v)) + 0.05 * std::sin(71.0 * u);
}

}  // namespace

double sample_texture(int texture_id, double u, double v) {
  u = std::abs(u);
  v = std::abs(v);
  double value = 0.72;
  switch (static_cast<Texture>(texture_id)) {
    case Texture::Flat: value = 0.72; break;
    case Texture::Brick: value = brick(u, v); break;
    case Texture::Stripe: value = stripe(u); break;
    case Texture::Noise: value = noise(u, v); break;
    case Texture::DoorPanel: value = door_panel(u, v); break;
    case Texture::FurnitureGrain: value = furniture_grain(u, v); break;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace crashnav::world
