#pragma once

// Independent reference implementations used as test oracles. None of them
// calls the library code they check.

#include "crashnav/learn/network.hpp"
#include "crashnav/world/floorplan.hpp"

#include <random>
#include <vector>

namespace crashnav::oracle {

/// Marches a ray in `step` increments and reports the midpoint of the first
/// step that crosses a segment, or max_range. Glass is skipped when asked.
double march_ray(const world::FloorPlan& plan, const world::Vec2& origin, const world::Vec2& dir, double max_range,
                 bool skip_glass, double step = 1e-3);

/// Both depths from a single march: nearest surface and first non-glass one.
struct MarchedDepths {
  double any = 0.0;
  double opaque = 0.0;
};
MarchedDepths march_both(const world::FloorPlan& plan, const world::Vec2& origin, const world::Vec2& dir,
                         double max_range, double step = 1e-3);

/// Travel along `dir` before a disc of `radius` centred on the ray first
/// touches any segment, solved per segment from the capsule around it.
/// Infinity when nothing is ever touched.
double disc_contact_distance(const world::FloorPlan& plan, const world::Vec2& origin, const world::Vec2& dir,
                             double radius);

/// Random plan inside [-half, half]^2: an enclosing box plus interior
/// segments, `n_segments` in total (>= 4), roughly a fifth of them glass.
world::FloorPlan random_plan(std::mt19937_64& rng, int n_segments, double half = 5.0);

/// Axis-aligned closed rectangle of walls with one spawn region at its
/// centre.
world::FloorPlan box_plan(double width, double height, double spawn_half = 0.05);

/// Straight nested-loop forward pass over one encoded H x W input, written
/// from the layer definitions. Returns the two logits.
std::vector<double> reference_logits(const learn::NetworkParams<double>& params, const std::vector<double>& input);

}  // namespace crashnav::oracle

namespace crashnav::oracle {

/// Central finite differences of the batch loss (double precision) against
/// reverse-mode gradients on a 16x16-input toy net, over `draws` random
/// (parameters, batch) pairs. Every coordinate counts toward agreement.
/// Coordinates whose +-step perturbation flips a ReLU sign or a max-pool
/// winner are also tallied separately: there the difference quotient
/// straddles a kink and is not an estimate of the derivative.
struct GradientCheck {
  std::size_t checked = 0;
  std::size_t agreeing = 0;
  std::size_t kink_crossings = 0;
  std::size_t smooth_checked = 0;
  std::size_t smooth_agreeing = 0;
  double worst_relative = 0.0;
  double worst_smooth_relative = 0.0;

  double agreement() const { return checked ? static_cast<double>(agreeing) / checked : 0.0; }
  double smooth_agreement() const {
    return smooth_checked ? static_cast<double>(smooth_agreeing) / smooth_checked : 0.0;
  }
};

/// Relative error |a - n| / max(|a|, |n|); pairs with both magnitudes below
/// `floor` agree by definition.
GradientCheck gradient_check(int draws, std::uint64_t seed, double step = 1e-3, double tolerance = 1e-4,
                             double floor = 1e-8, int batch = 2);

learn::NetSpec toy_spec();

}  // namespace crashnav::oracle
