#include "geogp/predictor.hpp"

#include "geogp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace geogp {

namespace {

constexpr double kScaleMin = 1e-3;
constexpr double kScaleMax = 1e3;
constexpr double kCheckpointFloor = 1e-6;
constexpr double kRotationWeightFloor = 1e-9;

struct StepState {
  Vec3 xi;
  Vec2 position;
  double theta;  // canonical-frame polar angle of xi, fallback for degenerate decodes
};

// Advances one sample: window over the last w zeta records -> (xi, position).
OneStep advance(const GeoModel& model, std::span<const Vec6> zeta,
                const StepState& now, double lambda, double rotation) {
  const Eigen::VectorXd window = window_at(zeta, zeta.size(), model.window);
  const MultiPrediction pred = model.gp.predict(window);

  OneStep out;
  out.dxi_hat = pred.mu;
  out.xi_hat = now.xi + pred.mu;
  out.sigma_norm = pred.sigma.norm();

  // Both endpoints are placed in the normalized canonical plane; their
  // difference, scaled back to meters and rotated into the prompt frame, is
  // the Cartesian increment.
  const Vec2 step = lambda * model.r_max *
                    (feature_to_plane(out.xi_hat, now.theta) -
                     feature_to_plane(now.xi, now.theta));
  const double r_bar = step.norm();
  const double theta_bar =
      r_bar > 0.0 ? wrap_angle(std::atan2(step.y(), step.x()) + rotation) : 0.0;
  out.p_hat = reconstruct_step(now.position, r_bar, theta_bar);
  if (!out.xi_hat.allFinite() || !std::isfinite(out.sigma_norm)) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite prediction");
  }
  return out;
}

double decoded_angle(const Vec3& xi, double fallback) {
  try {
    return denormalize_angle(xi.y(), xi.z());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAngleUndefined) throw;
    return fallback;
  }
}

}  // namespace

KernelParams GeoConfig::kernel_params(std::size_t input_dim) const {
  KernelParams p;
  p.signal_variance = signal_variance;
  p.noise_variance = noise_variance;
  if (length_scales.size() == 1) {
    p.length_scales.assign(input_dim, length_scales.front());
  } else if (length_scales.size() == input_dim) {
    p.length_scales = length_scales;
  } else {
    throw Error(ErrorCode::kShape,
                "shape error: expected 1 or " + std::to_string(input_dim) +
                    " length scales, got " + std::to_string(length_scales.size()));
  }
  p.validate();
  return p;
}

void GeoConfig::validate() const {
  if (window <= 0) throw Error(ErrorCode::kInvalidArgument, "window must be positive");
  if (checkpoints <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "checkpoint count must be positive");
  }
  if (!(sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  kernel_params(static_cast<std::size_t>(6 * window));
}

CheckpointSet extract_checkpoints(const NormalizedTrace& demo,
                                  const PolarTrace& polar, int count) {
  if (count <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "checkpoint count must be positive");
  }
  const std::size_t n = demo.size();
  const auto c = static_cast<std::size_t>(count);
  if (n < c + 1 || polar.size() != n) {
    throw Error(ErrorCode::kTraceTooShort,
                "trace too short for " + std::to_string(count) + " checkpoints");
  }
  CheckpointSet out;
  for (std::size_t j = 1; j <= c; ++j) {
    const std::size_t idx = (j * n + c) / (c + 1);  // ceil(j*n/(c+1))
    const double r_norm = demo.xi[idx].x();
    if (r_norm < kCheckpointFloor) continue;
    out.thetas.push_back(polar.theta[idx]);
    out.radii.push_back(r_norm);
    out.times.push_back(idx);
  }
  if (out.times.empty()) {
    throw Error(ErrorCode::kCheckpointTooClose,
                "checkpoint too close to origin: no usable checkpoints");
  }
  return out;
}

double estimate_scale(const PolarTrace& prompt_polar, const CheckpointSet& cps,
                      double demo_r_max, std::size_t k) {
  double sum = 0.0;
  std::size_t reached = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps.times[i] > k || cps.times[i] >= prompt_polar.size()) break;
    sum += prompt_polar.r[cps.times[i]] / (cps.radii[i] * demo_r_max);
    ++reached;
  }
  if (reached == 0) {
    throw Error(ErrorCode::kPromptTooShort, "prompt too short for scale estimation");
  }
  const double lambda = sum / static_cast<double>(reached);
  if (!std::isfinite(lambda)) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite scale factor");
  }
  return std::clamp(lambda, kScaleMin, kScaleMax);
}

double estimate_rotation(const PolarTrace& prompt_polar,
                         const PolarTrace& demo_polar, std::size_t k) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "rotation estimate needs k >= 2");
  const std::size_t last =
      std::min({k, prompt_polar.size() - 1, demo_polar.size() - 1});
  double s = 0.0;
  double c = 0.0;
  double total = 0.0;
  for (std::size_t j = 1; j <= last; ++j) {
    const double weight = prompt_polar.r[j];
    const double diff = prompt_polar.theta[j] - demo_polar.theta[j];
    s += weight * std::sin(diff);
    c += weight * std::cos(diff);
    total += weight;
  }
  if (total < kRotationWeightFloor || (s == 0.0 && c == 0.0)) {
    throw Error(ErrorCode::kRotationUnobservable, "rotation unobservable");
  }
  return std::atan2(s, c);
}

GeoModel fit_geo_model(const Trajectory& demo, const GeoConfig& config) {
  config.validate();
  const PolarTrace polar = to_polar(demo);
  const NormalizedTrace trace = normalize(polar);
  const AugmentedDataset ds = build_dataset(trace, config.window, demo.label());

  std::vector<Eigen::VectorXd> inputs;
  std::vector<Vec3> targets;
  inputs.reserve(ds.size());
  targets.reserve(ds.size());
  for (const auto& s : ds.samples) {
    inputs.push_back(s.input);
    targets.push_back(s.target);
  }

  GeoModel m;
  m.gp = MultiGP::fit(inputs, targets,
                      config.kernel_params(static_cast<std::size_t>(6 * config.window)));
  m.window = config.window;
  m.r_max = trace.r_max;
  m.noise_variance = config.noise_variance;
  m.checkpoints = extract_checkpoints(trace, polar, config.checkpoints);
  m.demo_polar = polar;
  m.demo_end_offset = demo.samples().back().p - demo.samples().front().p;
  m.demo_length = demo.size();
  return m;
}

PromptContext make_context(const GeoModel& model, const Trajectory& prompt,
                           std::optional<std::size_t> k, bool allow_scale_fallback) {
  if (prompt.size() < 2) {
    throw Error(ErrorCode::kInsufficientTrajectory,
                "insufficient trajectory: at least 2 samples required");
  }
  const std::size_t last = k.value_or(prompt.size() - 1);
  if (last >= prompt.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prompt index out of range");
  }
  if (last < static_cast<std::size_t>(model.window)) {
    throw Error(ErrorCode::kPromptTooShort,
                "prompt too short: need at least w + 1 = " +
                    std::to_string(model.window + 1) + " samples");
  }

  PromptContext ctx;
  ctx.prompt = prompt.prefix(last + 1);
  ctx.last_index = last;
  const PolarTrace raw = to_polar(ctx.prompt);

  try {
    ctx.lambda = estimate_scale(raw, model.checkpoints, model.r_max, last);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kPromptTooShort || !allow_scale_fallback) throw;
    ctx.lambda = 1.0;
    ctx.scale_fallback = true;
  }
  try {
    ctx.rotation = estimate_rotation(raw, model.demo_polar, last);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRotationUnobservable) throw;
    ctx.rotation = 0.0;
    ctx.rotation_fallback = true;
  }

  std::vector<Vec2> canonical;
  canonical.reserve(ctx.prompt.size());
  const Vec2 origin = ctx.prompt.position(0);
  for (const auto& s : ctx.prompt.samples()) {
    canonical.push_back(rotate(s.p - origin, -ctx.rotation));
  }
  ctx.features = normalize_with_scale(to_polar(canonical), ctx.lambda * model.r_max);
  return ctx;
}

OneStep one_step(const GeoModel& model, const PromptContext& ctx) {
  const std::size_t k = ctx.last_index;
  const Vec3& xi = ctx.features.xi[k];
  const StepState now{xi, ctx.last_position(), decoded_angle(xi, 0.0)};
  return advance(model,
                 std::span<const Vec6>(ctx.features.zeta.data(), k + 1), now,
                 ctx.lambda, ctx.rotation);
}

Vec2 mapped_target(const GeoModel& model, const PromptContext& ctx) {
  return ctx.origin() + rotate(ctx.lambda * model.demo_end_offset, ctx.rotation);
}

double default_delta_sigma(const GeoModel& model) {
  return std::sqrt(3.0) * std::sqrt(model.noise_variance);
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kTriggered: return "triggered";
    case StopReason::kMaxHorizon: return "max_horizon";
    case StopReason::kNumericFailure: return "numeric_failure";
  }
  return "unknown";
}

StopReason stop_reason_from_string(std::string_view s) {
  if (s == "triggered") return StopReason::kTriggered;
  if (s == "max_horizon") return StopReason::kMaxHorizon;
  if (s == "numeric_failure") return StopReason::kNumericFailure;
  throw Error(ErrorCode::kParse, "parse error: unknown stop reason '" + std::string(s) + "'");
}

Rollout rollout(const GeoModel& model, const PromptContext& ctx,
                const RolloutOptions& options) {
  const double delta_sigma = options.delta_sigma.value_or(default_delta_sigma(model));
  const double delta_d = options.delta_d.value_or(0.05 * ctx.lambda * model.r_max);
  const std::size_t max_horizon = options.max_horizon.value_or(3 * model.demo_length);
  if (!(delta_d > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "position tolerance must be positive");
  }

  const std::size_t k = ctx.last_index;
  Rollout out;
  out.lambda = ctx.lambda;
  out.rotation = ctx.rotation;
  out.first_index = k + 1;
  out.last_index = k;
  out.stop_reason = StopReason::kMaxHorizon;

  const Vec2 target = mapped_target(model, ctx);
  std::vector<Vec6> zeta(ctx.features.zeta.begin(),
                         ctx.features.zeta.begin() + static_cast<std::ptrdiff_t>(k + 1));
  zeta.reserve(k + 1 + max_horizon);
  StepState now{ctx.features.xi[k], ctx.last_position(), 0.0};
  now.theta = decoded_angle(now.xi, 0.0);

  try {
    for (std::size_t step = 0; step < max_horizon; ++step) {
      const OneStep next = advance(model, zeta, now, ctx.lambda, ctx.rotation);
      Vec6 record;
      record << next.xi_hat, next.dxi_hat;
      zeta.push_back(record);
      now.theta = decoded_angle(next.xi_hat, now.theta);
      now.xi = next.xi_hat;
      now.position = next.p_hat;

      out.positions.push_back(next.p_hat);
      out.uncertainties.push_back(next.sigma_norm);
      out.last_index = k + out.positions.size();

      const double e_d = (target - next.p_hat).norm();
      if (next.sigma_norm >= delta_sigma && e_d <= delta_d) {
        out.stop_reason = StopReason::kTriggered;
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumeric) throw;
    out.stop_reason = StopReason::kNumericFailure;
  }
  return out;
}

Replay teacher_forced_replay(const GeoModel& model, const PromptContext& ctx) {
  const auto w = static_cast<std::size_t>(model.window);
  Replay out;
  for (std::size_t j = w; j <= ctx.last_index; ++j) {
    const Vec3& xi = ctx.features.xi[j - 1];
    const StepState now{xi, ctx.prompt.position(j - 1), decoded_angle(xi, 0.0)};
    const OneStep pred = advance(
        model, std::span<const Vec6>(ctx.features.zeta.data(), j), now,
        ctx.lambda, ctx.rotation);
    const double err = (ctx.prompt.position(j) - pred.p_hat).norm();
    out.predicted.push_back(pred.p_hat);
    out.errors.push_back(err);
    out.score += err;
  }
  return out;
}

nlohmann::json rollout_point_record(const Rollout& r, std::size_t i) {
  return {{"h", r.first_index + i},
          {"x", r.positions[i].x()},
          {"y", r.positions[i].y()},
          {"sigma_norm", r.uncertainties[i]}};
}

nlohmann::json rollout_trailer(const Rollout& r) {
  return {{"stop_reason", std::string(to_string(r.stop_reason))},
          {"l", r.last_index},
          {"lambda", r.lambda},
          {"rotation", r.rotation}};
}

std::string rollout_to_ndjson(const Rollout& r) {
  std::string out;
  for (std::size_t i = 0; i < r.positions.size(); ++i) {
    out += rollout_point_record(r, i).dump();
    out += '\n';
  }
  out += rollout_trailer(r).dump();
  out += '\n';
  return out;
}

Rollout rollout_from_ndjson(const std::string& text) {
  Rollout r;
  std::istringstream in(text);
  std::string line;
  std::size_t record = 0;
  bool trailer = false;
  while (std::getline(in, line)) {
    ++record;
    if (line.empty()) continue;
    if (trailer) {
      throw Error(ErrorCode::kParse, "parse error at record " + std::to_string(record) +
                                         ": data after trailer");
    }
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("stop_reason")) {
        r.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
        r.last_index = j.at("l").get<std::size_t>();
        r.lambda = j.at("lambda").get<double>();
        r.rotation = j.at("rotation").get<double>();
        trailer = true;
      } else {
        if (r.positions.empty()) r.first_index = j.at("h").get<std::size_t>();
        r.positions.emplace_back(j.at("x").get<double>(), j.at("y").get<double>());
        r.uncertainties.push_back(j.at("sigma_norm").get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "parse error at record " + std::to_string(record) + ": " + e.what());
    }
  }
  if (!trailer) {
    throw Error(ErrorCode::kParse, "parse error at record " + std::to_string(record + 1) +
                                       ": missing trailer");
  }
  if (r.positions.empty()) r.first_index = r.last_index + 1;
  return r;
}

}  // namespace geogp
