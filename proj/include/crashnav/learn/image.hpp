#pragma once

#include "crashnav/world/render.hpp"

#include <Eigen/Core>

namespace crashnav::learn {

struct CropRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  static CropRect full(const world::Frame& f) { return {0, 0, f.width, f.height}; }
};

/// Area-average resampling of a crop to out_height x out_width. Each output
/// pixel averages the source area it covers, weighting partially covered
/// source pixels by overlap; upsampling degenerates to box sampling. Returns
/// intensities in [0, 1] as an out_height x out_width row-major matrix.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> resample_area(const world::Frame& frame,
                                                                                    const CropRect& crop,
                                                                                    int out_height, int out_width);

/// Left / right crops used by the three-way policy: the leftmost or
/// rightmost round(fraction * width) columns at full height.
CropRect left_crop(const world::Frame& frame, double fraction);
CropRect right_crop(const world::Frame& frame, double fraction);

/// Network input encoding of an intensity.
inline constexpr double kInputOffset = 0.5;

}  // namespace crashnav::learn
