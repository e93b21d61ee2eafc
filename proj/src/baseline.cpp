#include "geogp/baseline.hpp"

#include "geogp/dataset.hpp"
#include "geogp/error.hpp"

#include <cmath>

namespace geogp {

namespace {

using Vec4 = Eigen::Vector4d;

std::vector<Vec4> cartesian_records(const Trajectory& traj) {
  std::vector<Vec4> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vec2& p = traj.position(k);
    const Vec2 d = k == 0 ? Vec2::Zero() : Vec2(p - traj.position(k - 1));
    out.emplace_back(p.x(), p.y(), d.x(), d.y());
  }
  return out;
}

Eigen::VectorXd cartesian_window(const std::vector<Vec4>& records, std::size_t k, int w) {
  const auto uw = static_cast<std::size_t>(w);
  if (k < uw) throw Error(ErrorCode::kWindowUnderflow, "window underflow");
  Eigen::VectorXd out(4 * w);
  for (std::size_t j = 0; j < uw; ++j) {
    out.segment<4>(static_cast<Eigen::Index>(4 * j)) = records[k - uw + j];
  }
  return out;
}

}  // namespace

CartesianGPModel fit_baseline(const Trajectory& demo, const GeoConfig& config) {
  config.validate();
  const int w = config.window;
  if (demo.size() < static_cast<std::size_t>(w) + 2) {
    throw Error(ErrorCode::kTraceTooShort,
                "trace too short for window: N=" + std::to_string(demo.size()) +
                    ", w=" + std::to_string(w));
  }
  const auto records = cartesian_records(demo);
  std::vector<Eigen::VectorXd> inputs;
  const auto n = static_cast<Eigen::Index>(demo.size()) - w;
  Eigen::VectorXd tx(n), ty(n);
  for (std::size_t k = static_cast<std::size_t>(w); k < demo.size(); ++k) {
    inputs.push_back(cartesian_window(records, k, w));
    const auto i = static_cast<Eigen::Index>(k) - w;
    tx[i] = records[k][2];
    ty[i] = records[k][3];
  }
  // Same hyperparameters as the geometric model, sized for 4w inputs.
  KernelParams params = config.kernel_params(static_cast<std::size_t>(6 * w));
  params.length_scales.assign(static_cast<std::size_t>(4 * w), params.length_scales.front());
  auto factor = factorize(inputs, params);
  return {fit(factor, tx), fit(factor, ty), w};
}

Rollout rollout_baseline(const CartesianGPModel& model, const Trajectory& prompt,
                         std::size_t horizon) {
  const auto w = static_cast<std::size_t>(model.window);
  if (prompt.size() < w + 1) {
    throw Error(ErrorCode::kPromptTooShort, "prompt too short: need at least w + 1 samples");
  }
  Rollout out;
  out.first_index = prompt.size();
  out.last_index = prompt.size() - 1;
  out.stop_reason = StopReason::kMaxHorizon;

  auto records = cartesian_records(prompt);
  records.reserve(records.size() + horizon);
  Vec2 p = prompt.samples().back().p;
  try {
    for (std::size_t h = 0; h < horizon; ++h) {
      const Eigen::VectorXd window = cartesian_window(records, records.size(), model.window);
      const Prediction px = model.gp_x.predict(window);
      const Prediction py = model.gp_y.predict(window);
      const Vec2 d(px.mean, py.mean);
      p += d;
      if (!p.allFinite()) throw Error(ErrorCode::kNumeric, "numeric error: non-finite step");
      records.emplace_back(p.x(), p.y(), d.x(), d.y());
      out.positions.push_back(p);
      out.uncertainties.push_back(std::sqrt(px.variance + py.variance));
      out.last_index = prompt.size() - 1 + out.positions.size();
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumeric) throw;
    out.stop_reason = StopReason::kNumericFailure;
  }
  return out;
}

}  // namespace geogp
