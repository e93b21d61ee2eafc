#pragma once

#include "geogp/dataset.hpp"
#include "geogp/geometry.hpp"
#include "geogp/gp.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geogp {

/// Pipeline configuration. Defaults: w = 10, C = 8, unit length-scales,
/// sigma_f^2 = 1, sigma_n^2 = 0.01, 20 Hz.
struct GeoConfig {
  int window = 10;
  int checkpoints = 8;
  double signal_variance = 1.0;
  double noise_variance = 0.01;
  /// One entry broadcasts to all 6w inputs; otherwise exactly 6w entries.
  std::vector<double> length_scales{1.0};
  double sample_rate_hz = 20.0;

  KernelParams kernel_params(std::size_t input_dim) const;
  void validate() const;
};

/// Demonstration landmarks used for scale estimation.
struct CheckpointSet {
  std::vector<double> thetas;        // radians
  std::vector<double> radii;         // normalized by the demo's r_max
  std::vector<std::size_t> times;    // sample indices on the shared clock

  std::size_t size() const { return times.size(); }
};

/// Checkpoints at indices ceil(j*N/(C+1)), j = 1..C. Checkpoints closer than
/// 1e-6 * r_max to the origin are dropped.
CheckpointSet extract_checkpoints(const NormalizedTrace& demo,
                                  const PolarTrace& polar, int count);

/// Mean ratio of prompt radius to demonstration radius (meters) over the
/// checkpoints reached by index k, clamped to [1e-3, 1e3].
double estimate_scale(const PolarTrace& prompt_polar, const CheckpointSet& cps,
                      double demo_r_max, std::size_t k);

/// Circular mean of theta_prompt(j) - theta_demo(j), j = 1..k, weighted by the
/// prompt radius.
double estimate_rotation(const PolarTrace& prompt_polar,
                         const PolarTrace& demo_polar, std::size_t k);

/// Everything inference needs from one demonstration.
struct GeoModel {
  MultiGP gp;
  int window = 10;
  double r_max = 1.0;
  double noise_variance = 0.01;
  CheckpointSet checkpoints;
  PolarTrace demo_polar;
  Vec2 demo_end_offset = Vec2::Zero();  // p(t_f) - p(t_0)
  std::size_t demo_length = 0;
};

GeoModel fit_geo_model(const Trajectory& demo, const GeoConfig& config);

/// A prompt expressed in one model's normalized, rotation-canonical frame.
struct PromptContext {
  Trajectory prompt;
  double lambda = 1.0;
  double rotation = 0.0;
  std::size_t last_index = 0;
  NormalizedTrace features;
  bool scale_fallback = false;  // no checkpoint reached, lambda forced to 1
  bool rotation_fallback = false;

  const Vec2& origin() const { return prompt.position(0); }
  const Vec2& last_position() const { return prompt.position(last_index); }
};

/// Canonicalizes `prompt` (up to and including index k, default: last sample)
/// against `model`. With allow_scale_fallback, a prompt that reaches no
/// checkpoint gets lambda = 1 and the fallback flag instead of an error.
PromptContext make_context(const GeoModel& model, const Trajectory& prompt,
                           std::optional<std::size_t> k = std::nullopt,
                           bool allow_scale_fallback = false);

struct OneStep {
  Vec3 xi_hat = Vec3::Zero();
  Vec3 dxi_hat = Vec3::Zero();
  Vec2 p_hat = Vec2::Zero();
  double sigma_norm = 0.0;
};

/// Predicts sample k+1 from a context ending at k.
OneStep one_step(const GeoModel& model, const PromptContext& ctx);

/// Mapping of the demonstration endpoint into the prompt's frame.
Vec2 mapped_target(const GeoModel& model, const PromptContext& ctx);

enum class StopReason { kTriggered, kMaxHorizon, kNumericFailure };

std::string_view to_string(StopReason reason);
StopReason stop_reason_from_string(std::string_view s);

struct Rollout {
  std::vector<Vec2> positions;
  std::vector<double> uncertainties;  // ||sigma|| per position
  StopReason stop_reason = StopReason::kMaxHorizon;
  std::size_t last_index = 0;  // l
  std::size_t first_index = 0;  // index of positions[0]
  double lambda = 1.0;
  double rotation = 0.0;
};

struct RolloutOptions {
  std::optional<double> delta_sigma;  // default sqrt(3) * sigma_n
  std::optional<double> delta_d;      // default 0.05 * lambda * r_max
  std::optional<std::size_t> max_horizon;  // default 3 * demo length
};

double default_delta_sigma(const GeoModel& model);

/// Recursive multi-step prediction with the event-triggered stop.
Rollout rollout(const GeoModel& model, const PromptContext& ctx,
                const RolloutOptions& options = {});

/// Teacher-forced predictions of samples w..k of the context's own prompt,
/// each conditioned on the true samples before it.
struct Replay {
  std::vector<Vec2> predicted;  // index j - w
  std::vector<double> errors;   // ||p(j) - predicted||
  double score = 0.0;           // sum of errors
};

Replay teacher_forced_replay(const GeoModel& model, const PromptContext& ctx);

// Rollout export: one record per predicted point plus a trailer.
nlohmann::json rollout_point_record(const Rollout& r, std::size_t i);
nlohmann::json rollout_trailer(const Rollout& r);
std::string rollout_to_ndjson(const Rollout& r);
Rollout rollout_from_ndjson(const std::string& text);

}  // namespace geogp
