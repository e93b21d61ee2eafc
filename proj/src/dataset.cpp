#include "geogp/dataset.hpp"

#include "geogp/error.hpp"

namespace geogp {

Eigen::VectorXd window_at(const NormalizedTrace& trace, std::size_t k, int w) {
  return window_at(std::span<const Vec6>(trace.zeta), k, w);
}

Eigen::VectorXd window_at(std::span<const Vec6> zeta, std::size_t k, int w) {
  if (w <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "window length must be positive");
  }
  const auto uw = static_cast<std::size_t>(w);
  if (k < uw) {
    throw Error(ErrorCode::kWindowUnderflow,
                "window underflow: k=" + std::to_string(k) +
                    " < w=" + std::to_string(w));
  }
  if (k > zeta.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "window index " + std::to_string(k) + " beyond trace length " +
                    std::to_string(zeta.size()));
  }
  Eigen::VectorXd out(6 * w);
  for (std::size_t j = 0; j < uw; ++j) {
    out.segment<6>(static_cast<Eigen::Index>(6 * j)) = zeta[k - uw + j];
  }
  return out;
}

AugmentedDataset build_dataset(const NormalizedTrace& trace, int w,
                               std::string source_id) {
  if (w <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "window length must be positive");
  }
  const std::size_t n = trace.size();
  if (n < static_cast<std::size_t>(w) + 2) {
    throw Error(ErrorCode::kTraceTooShort,
                "trace too short for window: N=" + std::to_string(n) +
                    ", w=" + std::to_string(w));
  }
  AugmentedDataset ds;
  ds.w = w;
  ds.source_id = std::move(source_id);
  ds.samples.reserve(n - static_cast<std::size_t>(w));
  for (std::size_t k = static_cast<std::size_t>(w); k < n; ++k) {
    ds.samples.push_back({window_at(trace, k, w), trace.dxi[k]});
  }
  return ds;
}

}  // namespace geogp
