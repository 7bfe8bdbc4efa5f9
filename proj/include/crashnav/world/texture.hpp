#pragma once

namespace crashnav::world {

enum class Texture : int { Flat = 0, Brick = 1, Stripe = 2, Noise = 3, DoorPanel = 4, FurnitureGrain = 5 };

/// Procedural texture lookup. `u` runs along the surface (m from endpoint a),
/// `v` is height above the floor (m). Returns albedo in [0, 1]. Out-of-range
/// ids fall back to Flat.
double sample_texture(int texture_id, double u, double v);

}  // namespace crashnav::world
