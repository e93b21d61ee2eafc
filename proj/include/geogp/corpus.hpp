#pragma once

#include "geogp/geometry.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace geogp::corpus {

/// Names accepted by generate(): circle, s_curve, figure_eight, line, spiral.
const std::vector<std::string>& shape_names();

/// Timing along the path. kEaseOut (the default) mimics a hand-drawn stroke
/// that slows down as it reaches its end point.
enum class SpeedProfile { kConstant, kMinimumJerk, kEaseOut };

std::string_view to_string(SpeedProfile profile);
SpeedProfile speed_profile_from_string(std::string_view s);

struct ShapeOptions {
  SpeedProfile profile = SpeedProfile::kEaseOut;
  std::size_t samples = 80;     // 4 s at 20 Hz
  double sample_rate_hz = 20.0;
  double size = 1.0;            // characteristic extent in meters
};

/// Synthetic demonstration starting at the origin. Throws kInvalidArgument on
/// an unknown name.
Trajectory generate(std::string_view name, const ShapeOptions& options = {});

}  // namespace geogp::corpus
