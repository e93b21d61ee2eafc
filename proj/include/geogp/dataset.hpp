#pragma once

#include "geogp/geometry.hpp"

#include <string>
#include <vector>

namespace geogp {

/// One training pair: the last w feature records (oldest first) and the
/// feature increment realized at the following step.
struct AugmentedSample {
  Eigen::VectorXd input;  // 6w
  Vec3 target;
};

struct AugmentedDataset {
  std::vector<AugmentedSample> samples;
  int w = 0;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
};

/// Concatenation [zeta(k-w); ...; zeta(k-1)]. Throws kWindowUnderflow if k < w.
Eigen::VectorXd window_at(const NormalizedTrace& trace, std::size_t k, int w);

/// Same layout over an arbitrary zeta sequence (observed or predicted).
Eigen::VectorXd window_at(std::span<const Vec6> zeta, std::size_t k, int w);

/// Pairs (window_at(k), dxi[k]) for k = w .. N-1. Requires N >= w + 2.
AugmentedDataset build_dataset(const NormalizedTrace& trace, int w,
                               std::string source_id = {});

}  // namespace geogp
