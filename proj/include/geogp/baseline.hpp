#pragma once

#include "geogp/geometry.hpp"
#include "geogp/gp.hpp"
#include "geogp/predictor.hpp"

namespace geogp {

/// Exact GP on raw Cartesian windows: each record is (x, y, dx, dy) in meters,
/// record 0 has zero increments, targets are the next (dx, dy). Same window
/// length and kernel family as the geometric model, no canonicalization.
struct CartesianGPModel {
  GPModel gp_x;
  GPModel gp_y;
  int window = 10;
};

CartesianGPModel fit_baseline(const Trajectory& demo, const GeoConfig& config);

/// Free rollout for exactly `horizon` steps from the prompt's last sample.
Rollout rollout_baseline(const CartesianGPModel& model, const Trajectory& prompt,
                         std::size_t horizon);

}  // namespace geogp
