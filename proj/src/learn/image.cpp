#include "crashnav/learn/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace crashnav::learn {
namespace {

struct Tap {
  int index;
  double weight;
};

// Per-output-pixel source taps along one axis.
std::vector<std::vector<Tap>> area_taps(int src0, int src_len, int out_len) {
  std::vector<std::vector<Tap>> taps(out_len);
  const double scale = static_cast<double>(src_len) / out_len;
  for (int o = 0; o < out_len; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    double total = 0.0;
    for (int s = static_cast<int>(std::floor(lo)); s < static_cast<int>(std::ceil(hi)); ++s) {
      const double w = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (w <= 0.0) continue;
      taps[o].push_back({src0 + s, w});
      total += w;
    }
    for (Tap& t : taps[o]) t.weight /= total;
  }
  return taps;
}

}  // namespace

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> resample_area(const world::Frame& frame,
                                                                                    const CropRect& crop,
                                                                                    int out_height, int out_width) {
  if (crop.width <= 0 || crop.height <= 0 || crop.x0 < 0 || crop.y0 < 0 || crop.x0 + crop.width > frame.width ||
      crop.y0 + crop.height > frame.height)
    throw std::invalid_argument("resample_area: crop outside frame");
  if (out_height <= 0 || out_width <= 0) throw std::invalid_argument("resample_area: bad output size");

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(out_height, out_width);
  if (crop.width == out_width && crop.height == out_height) {
    for (int y = 0; y < out_height; ++y)
      for (int x = 0; x < out_width; ++x) out(y, x) = frame.at(crop.x0 + x, crop.y0 + y) / 255.0;
    return out;
  }

  const auto xt = area_taps(crop.x0, crop.width, out_width);
  const auto yt = area_taps(crop.y0, crop.height, out_height);
  // Horizontal pass over the rows the vertical taps need, then vertical.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(frame.height, out_width);
  for (int y = crop.y0; y < crop.y0 + crop.height; ++y)
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : xt[x]) acc += t.weight * frame.at(t.index, y);
      rows(y, x) = acc / 255.0;
    }
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : yt[y]) acc += t.weight * rows(t.index, x);
      out(y, x) = acc;
    }
  return out;
}

CropRect left_crop(const world::Frame& frame, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("crop fraction must be in (0, 1]");
  const int w = std::clamp(static_cast<int>(std::lround(fraction * frame.width)), 1, frame.width);
  return {0, 0, w, frame.height};
}

CropRect right_crop(const world::Frame& frame, double fraction) {
  CropRect r = left_crop(frame, fraction);
  r.x0 = frame.width - r.width;
  return r;
}

}  // namespace crashnav::learn
