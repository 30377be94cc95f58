#pragma once

#include <cstdint>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"
#include "oracles.hpp"

namespace fixtures {

/// 1-D points with labels, as a distance matrix plus class index.
struct Line {
  granularity::DistanceMatrix d;
  granularity::ClassIndex index;
  oracle::Matrix nested;
  std::vector<int> labels;
};

inline Line line(const std::vector<double>& points, const std::vector<int>& labels) {
  const auto nested = oracle::line(points);
  return {oracle::to_matrix(nested), granularity::ClassIndex(labels), nested, labels};
}

/// A = {0, 1}, B = {4, 5}: perfectly separated.
inline Line separated() { return line({0, 1, 4, 5}, {0, 0, 1, 1}); }
/// A = {0, 2}, B = {1, 3}: interleaved.
inline Line interleaved() { return line({0, 2, 1, 3}, {0, 0, 1, 1}); }

}  // namespace fixtures
