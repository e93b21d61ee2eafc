#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace geogp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct Sample {
  double t = 0.0;  // seconds
  Vec2 p = Vec2::Zero();  // meters
};

/// Timestamped planar positions on a uniform clock.
///
/// Construction enforces strictly increasing timestamps and a spacing that
/// matches 1/sample_rate_hz within 1%. Raw pointer streams go through
/// resample() first.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<Sample> samples, double sample_rate_hz,
             std::string label = {});

  /// Uniformly clocked trajectory starting at t0.
  static Trajectory from_positions(std::span<const Vec2> positions,
                                   double sample_rate_hz,
                                   std::string label = {}, double t0 = 0.0);

  const std::vector<Sample>& samples() const { return samples_; }
  double sample_rate_hz() const { return sample_rate_hz_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  const Vec2& position(std::size_t i) const { return samples_[i].p; }
  std::vector<Vec2> positions() const;

  /// First `count` samples (clamped to size()).
  Trajectory prefix(std::size_t count) const;

 private:
  std::vector<Sample> samples_;
  double sample_rate_hz_ = 20.0;
  std::string label_;
};

/// Linear-interpolation resampling of an arbitrary timestamped stream onto a
/// uniform clock starting at the first timestamp. Samples sharing a timestamp
/// keep the later position.
Trajectory resample(std::span<const Sample> raw, double sample_rate_hz,
                    std::string label = {});

// Similarity transforms about the trajectory's first sample.
Trajectory translate(const Trajectory& traj, const Vec2& offset);
Trajectory rotate_about_start(const Trajectory& traj, double angle);
Trajectory scale_about_start(const Trajectory& traj, double factor);

Vec2 rotate(const Vec2& v, double angle);

/// Wraps into (-pi, pi].
double wrap_angle(double angle);

struct PolarTrace {
  Vec2 origin = Vec2::Zero();
  std::vector<double> r;
  std::vector<double> theta;

  std::size_t size() const { return r.size(); }
};

/// Polar features relative to the first sample: r_k = |p_k - p_0|,
/// theta_k = atan2 of the same displacement, theta_0 = 0. A later sample that
/// lands exactly on the origin inherits the previous angle.
PolarTrace to_polar(const Trajectory& traj);
PolarTrace to_polar(std::span<const Vec2> positions);

struct NormalizedTrace {
  double r_max = 1.0;
  std::vector<Vec3> xi;    // (r/r_max, (cos+1)/2, (sin+1)/2)
  std::vector<Vec3> dxi;   // xi[k] - xi[k-1]; dxi[0] = 0
  std::vector<Vec6> zeta;  // (xi, dxi); zeta[0] = 0

  std::size_t size() const { return xi.size(); }
};

/// Normalizes by the trace's own maximum radius.
NormalizedTrace normalize(const PolarTrace& polar);

/// Normalizes by an externally supplied radius scale. Used for prompts, which
/// are expressed in a demonstration's normalized frame and may leave [0, 1].
NormalizedTrace normalize_with_scale(const PolarTrace& polar, double r_scale);

/// Features of one step given the absolute normalized values.
Vec3 embed(double r_normalized, double theta);

/// theta = atan2(2s - 1, 2c - 1). Throws kAngleUndefined at (0.5, 0.5).
double denormalize_angle(double c_hat, double s_hat);

/// Point in the normalized Cartesian frame implied by a feature vector.
/// Only the direction of the (cos, sin) pair is used; when that direction is
/// undefined the fallback angle stands in.
Vec2 feature_to_plane(const Vec3& xi, double fallback_theta = 0.0);

/// p_prev + r_bar * (cos theta_bar, sin theta_bar).
Vec2 reconstruct_step(const Vec2& p_prev, double r_bar, double theta_bar);

}  // namespace geogp
