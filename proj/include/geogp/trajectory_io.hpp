#pragma once

#include "geogp/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace geogp {

// Newline-delimited JSON: a header {"sample_rate_hz", "label"} followed by one
// {"t", "x", "y"} record per sample. Doubles are printed in shortest
// round-trip form, so write -> read is bit-exact.

struct RawTrajectory {
  double sample_rate_hz = 0.0;
  std::string label;
  std::vector<Sample> samples;
};

std::string trajectory_to_ndjson(const Trajectory& traj);
void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);

/// Parses without enforcing the uniform clock. Errors name the 1-based record
/// (the header is record 1).
RawTrajectory parse_raw_trajectory(std::istream& in);

Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory(const std::filesystem::path& path);
Trajectory trajectory_from_ndjson(const std::string& text);

}  // namespace geogp
