#include "geogp/corpus.hpp"

#include "geogp/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace geogp::corpus {

namespace {

constexpr double kPi = std::numbers::pi;

// Path parameter in [0, 1] -> point; every path starts at the origin.
using Path = std::function<Vec2(double)>;

Path path_for(std::string_view name, double size) {
  if (name == "circle") {
    const double radius = 0.5 * size;
    return [radius](double s) {
      const double a = -kPi / 2 + 2 * kPi * s;
      return Vec2(radius * std::cos(a), radius * std::sin(a) + radius);
    };
  }
  if (name == "s_curve") {
    return [size](double s) {
      return Vec2(size * s, 0.25 * size * std::sin(2 * kPi * s));
    };
  }
  if (name == "figure_eight") {
    return [size](double s) {
      const double a = kPi / 2 + 2 * kPi * s;
      return Vec2(0.5 * size * (std::sin(a) - 1.0), 0.25 * size * std::sin(2 * a));
    };
  }
  if (name == "line") {
    return [size](double s) { return Vec2(size * s * std::cos(0.4), size * s * std::sin(0.4)); };
  }
  if (name == "spiral") {
    return [size](double s) {
      const double a = 3 * kPi * s;
      const double r = 0.5 * size * s;
      return Vec2(r * std::cos(a), r * std::sin(a));
    };
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown shape '" + std::string(name) + "'");
}

double timing(double tau, SpeedProfile profile) {
  switch (profile) {
    case SpeedProfile::kConstant:
      return tau;
    case SpeedProfile::kMinimumJerk:
      return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
    case SpeedProfile::kEaseOut: {
      // Constant speed, then a linear slowdown over the last 15% of the
      // duration to a fifth of the cruising speed.
      constexpr double tail = 0.15;
      constexpr double f = 0.2;
      const double area = (1.0 - tail) + tail * (1.0 + f) / 2.0;
      if (tau <= 1.0 - tail) return tau / area;
      const double u = (tau - (1.0 - tail)) / tail;
      return ((1.0 - tail) + tail * (u - 0.5 * (1.0 - f) * u * u)) / area;
    }
  }
  return tau;
}

}  // namespace

std::string_view to_string(SpeedProfile profile) {
  switch (profile) {
    case SpeedProfile::kConstant: return "constant";
    case SpeedProfile::kMinimumJerk: return "minimum_jerk";
    case SpeedProfile::kEaseOut: return "ease_out";
  }
  return "unknown";
}

SpeedProfile speed_profile_from_string(std::string_view s) {
  if (s == "constant") return SpeedProfile::kConstant;
  if (s == "minimum_jerk") return SpeedProfile::kMinimumJerk;
  if (s == "ease_out") return SpeedProfile::kEaseOut;
  throw Error(ErrorCode::kInvalidArgument, "unknown speed profile '" + std::string(s) + "'");
}

const std::vector<std::string>& shape_names() {
  static const std::vector<std::string> names{"circle", "s_curve", "figure_eight",
                                              "line", "spiral"};
  return names;
}

Trajectory generate(std::string_view name, const ShapeOptions& options) {
  if (options.samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "shape needs at least 2 samples");
  }
  const Path path = path_for(name, options.size);

  // Arc-length table so the timing profile applies to distance travelled.
  constexpr std::size_t kTable = 4096;
  std::vector<double> arc(kTable + 1, 0.0);
  Vec2 prev = path(0.0);
  for (std::size_t i = 1; i <= kTable; ++i) {
    const Vec2 p = path(static_cast<double>(i) / kTable);
    arc[i] = arc[i - 1] + (p - prev).norm();
    prev = p;
  }
  const double total = arc.back();
  auto param_at = [&](double fraction) {
    const double target = fraction * total;
    const auto it = std::lower_bound(arc.begin(), arc.end(), target);
    if (it == arc.begin()) return 0.0;
    if (it == arc.end()) return 1.0;
    const auto hi = static_cast<std::size_t>(it - arc.begin());
    const double u = (target - arc[hi - 1]) / (arc[hi] - arc[hi - 1]);
    return (static_cast<double>(hi - 1) + u) / kTable;
  };

  std::vector<Vec2> pts;
  pts.reserve(options.samples);
  const double last = static_cast<double>(options.samples - 1);
  const Vec2 origin = path(0.0);
  for (std::size_t i = 0; i < options.samples; ++i) {
    const double tau = static_cast<double>(i) / last;
    pts.push_back(path(param_at(timing(tau, options.profile))) - origin);
  }
  return Trajectory::from_positions(pts, options.sample_rate_hz, std::string(name));
}

}  // namespace geogp::corpus
