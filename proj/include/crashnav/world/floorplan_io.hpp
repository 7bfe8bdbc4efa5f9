#pragma once

#include "crashnav/world/floorplan.hpp"

#include <filesystem>
#include <string>

namespace crashnav::world {

inline constexpr int kFloorPlanFormatVersion = 1;

/// Parses a JSON floorplan document:
///
///   { "format_version": 1, "name": "...",
///     "segments": [ {"a": [x, y], "b": [x, y], "material": "wall|glass|furniture",
///                    "texture_id": 0}, ... ],
///     "spawn_regions": [ [x0, y0, x1, y1], ... ] }
///
/// Throws FloorPlanError (Parse / BadField) on malformed input, then runs
/// validate() so the returned plan satisfies every invariant.
FloorPlan load_floorplan(const std::string& document, double drone_radius = kDefaultDroneRadius);
FloorPlan load_floorplan_file(const std::filesystem::path& path, double drone_radius = kDefaultDroneRadius);

std::string dump_floorplan(const FloorPlan& plan);

/// Directory holding the shipped plans: $CRASHNAV_DATA_DIR/plans if the
/// environment variable is set, otherwise the source tree's data/plans.
std::filesystem::path data_dir();
std::filesystem::path shipped_plan_path(const std::string& name);

/// The six shipped evaluation plans, in table order.
const std::vector<std::string>& shipped_plan_names();

/// Loads a shipped plan by name, or a file if `name_or_path` names one.
FloorPlan resolve_plan(const std::string& name_or_path);

}  // namespace crashnav::world
