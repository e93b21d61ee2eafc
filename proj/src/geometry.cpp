#include "geogp/geometry.hpp"

#include "geogp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geogp {

namespace {

constexpr double kSpacingTolerance = 0.01;

}  // namespace

Trajectory::Trajectory(std::vector<Sample> samples, double sample_rate_hz,
                       std::string label)
    : samples_(std::move(samples)),
      sample_rate_hz_(sample_rate_hz),
      label_(std::move(label)) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw Error(ErrorCode::kInvalidTrajectory,
                "sample rate must be a positive finite number");
  }
  const double dt = 1.0 / sample_rate_hz_;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.t) || !s.p.allFinite()) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "non-finite sample at index " + std::to_string(i));
    }
    if (i == 0) continue;
    const double step = s.t - samples_[i - 1].t;
    if (!(step > 0.0)) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "timestamps must be strictly increasing (index " +
                      std::to_string(i) + ")");
    }
    if (std::abs(step - dt) > kSpacingTolerance * dt) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "non-uniform sample spacing at index " + std::to_string(i) +
                      "; resample to the configured rate first");
    }
  }
}

Trajectory Trajectory::from_positions(std::span<const Vec2> positions,
                                      double sample_rate_hz, std::string label,
                                      double t0) {
  std::vector<Sample> samples;
  samples.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    samples.push_back({t0 + static_cast<double>(i) / sample_rate_hz,
                       positions[i]});
  }
  return Trajectory(std::move(samples), sample_rate_hz, std::move(label));
}

std::vector<Vec2> Trajectory::positions() const {
  std::vector<Vec2> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.p);
  return out;
}

Trajectory Trajectory::prefix(std::size_t count) const {
  count = std::min(count, samples_.size());
  return Trajectory(std::vector<Sample>(samples_.begin(),
                                        samples_.begin() + count),
                    sample_rate_hz_, label_);
}

Trajectory resample(std::span<const Sample> raw, double sample_rate_hz,
                    std::string label) {
  if (!(sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  std::vector<Sample> clean;
  clean.reserve(raw.size());
  for (const auto& s : raw) {
    if (!std::isfinite(s.t) || !s.p.allFinite()) {
      throw Error(ErrorCode::kInvalidTrajectory, "non-finite raw sample");
    }
    if (!clean.empty() && s.t < clean.back().t) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "raw timestamps must be non-decreasing");
    }
    if (!clean.empty() && s.t == clean.back().t) {
      clean.back() = s;
    } else {
      clean.push_back(s);
    }
  }
  if (clean.empty()) {
    return Trajectory({}, sample_rate_hz, std::move(label));
  }

  const double t0 = clean.front().t;
  const double span = clean.back().t - t0;
  const double dt = 1.0 / sample_rate_hz;
  // Small epsilon so a stream ending exactly on a tick keeps that tick.
  const auto count = static_cast<std::size_t>(std::floor(span / dt + 1e-9)) + 1;

  std::vector<Sample> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    while (seg + 1 < clean.size() && clean[seg + 1].t < t) ++seg;
    Vec2 p;
    if (seg + 1 >= clean.size()) {
      p = clean.back().p;
    } else {
      const auto& a = clean[seg];
      const auto& b = clean[seg + 1];
      const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
      p = a.p + u * (b.p - a.p);
    }
    out.push_back({t, p});
  }
  return Trajectory(std::move(out), sample_rate_hz, std::move(label));
}

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

namespace {

template <typename Fn>
Trajectory map_positions(const Trajectory& traj, Fn&& fn) {
  std::vector<Sample> samples = traj.samples();
  if (samples.empty()) return traj;
  const Vec2 origin = samples.front().p;
  for (auto& s : samples) s.p = fn(origin, s.p);
  return Trajectory(std::move(samples), traj.sample_rate_hz(), traj.label());
}

}  // namespace

Trajectory translate(const Trajectory& traj, const Vec2& offset) {
  return map_positions(traj,
                       [&](const Vec2&, const Vec2& p) -> Vec2 { return p + offset; });
}

Trajectory rotate_about_start(const Trajectory& traj, double angle) {
  return map_positions(traj, [&](const Vec2& o, const Vec2& p) -> Vec2 {
    return o + rotate(p - o, angle);
  });
}

Trajectory scale_about_start(const Trajectory& traj, double factor) {
  return map_positions(traj, [&](const Vec2& o, const Vec2& p) -> Vec2 {
    return o + factor * (p - o);
  });
}

PolarTrace to_polar(const Trajectory& traj) {
  const auto positions = traj.positions();
  return to_polar(positions);
}

PolarTrace to_polar(std::span<const Vec2> positions) {
  if (positions.size() < 2) {
    throw Error(ErrorCode::kInsufficientTrajectory,
                "insufficient trajectory: at least 2 samples required");
  }
  PolarTrace out;
  out.origin = positions.front();
  out.r.resize(positions.size());
  out.theta.resize(positions.size());
  out.r[0] = 0.0;
  out.theta[0] = 0.0;
  for (std::size_t k = 1; k < positions.size(); ++k) {
    const Vec2 d = positions[k] - out.origin;
    out.r[k] = std::hypot(d.x(), d.y());
    out.theta[k] = out.r[k] > 0.0 ? std::atan2(d.y(), d.x()) : out.theta[k - 1];
  }
  return out;
}

Vec3 embed(double r_normalized, double theta) {
  return {r_normalized, 0.5 * (std::cos(theta) + 1.0),
          0.5 * (std::sin(theta) + 1.0)};
}

NormalizedTrace normalize(const PolarTrace& polar) {
  const double r_max =
      polar.r.empty() ? 0.0 : *std::max_element(polar.r.begin(), polar.r.end());
  if (!(r_max > 0.0)) {
    throw Error(ErrorCode::kDegenerateTrajectory,
                "degenerate trajectory: all samples coincide with the origin");
  }
  return normalize_with_scale(polar, r_max);
}

NormalizedTrace normalize_with_scale(const PolarTrace& polar, double r_scale) {
  if (!(r_scale > 0.0) || !std::isfinite(r_scale)) {
    throw Error(ErrorCode::kNumeric, "numeric error: radius scale must be positive");
  }
  NormalizedTrace out;
  out.r_max = r_scale;
  const std::size_t n = polar.size();
  out.xi.resize(n);
  out.dxi.resize(n);
  out.zeta.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.xi[k] = embed(polar.r[k] / r_scale, polar.theta[k]);
    if (k == 0) {
      out.dxi[k].setZero();
      out.zeta[k].setZero();
    } else {
      out.dxi[k] = out.xi[k] - out.xi[k - 1];
      out.zeta[k] << out.xi[k], out.dxi[k];
    }
  }
  return out;
}

double denormalize_angle(double c_hat, double s_hat) {
  const double y = 2.0 * s_hat - 1.0;
  const double x = 2.0 * c_hat - 1.0;
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite angle features");
  }
  if (x == 0.0 && y == 0.0) {
    throw Error(ErrorCode::kAngleUndefined, "angle undefined");
  }
  return std::atan2(y, x);
}

Vec2 feature_to_plane(const Vec3& xi, double fallback_theta) {
  double theta = fallback_theta;
  try {
    theta = denormalize_angle(xi.y(), xi.z());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAngleUndefined) throw;
  }
  return xi.x() * Vec2(std::cos(theta), std::sin(theta));
}

Vec2 reconstruct_step(const Vec2& p_prev, double r_bar, double theta_bar) {
  if (!p_prev.allFinite() || !std::isfinite(r_bar) || !std::isfinite(theta_bar)) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite reconstruction input");
  }
  return p_prev + r_bar * Vec2(std::cos(theta_bar), std::sin(theta_bar));
}

}  // namespace geogp
