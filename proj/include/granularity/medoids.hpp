#pragma once

#include <algorithm>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"
#include "granularity/parallel.hpp"

namespace granularity {

/// Sums within this relative distance of the class minimum count as tied.
/// Exact ties such as 1 + sqrt(2) vs sqrt(2) + 1 otherwise resolve by
/// rounding, and a rescaled matrix could then pick a different medoid.
inline constexpr double kMedoidTieTolerance = 1e-12;

/// Medoid of every class: the member minimizing the summed distance to the
/// other members of its class. Ties go to the smallest sample index; a
/// singleton class is its own medoid. Cost is sum over classes of n_c^2.
template <DistanceSource Source>
std::vector<Index> class_medoids(const Source& d, const ClassIndex& index) {
  // One slot per sample: the within-class distance sum of that sample.
  std::vector<double> sums(static_cast<std::size_t>(index.n()), 0.0);
  parallel_for(index.n(), [&](std::int64_t i) {
    const auto members = index.members(index.label(i));
    double s = 0.0;
    for (Index j : members) s += d(i, j);
    sums[static_cast<std::size_t>(i)] = s;
  });

  std::vector<Index> medoids(static_cast<std::size_t>(index.k()));
  for (Index c = 0; c < index.k(); ++c) {
    const auto members = index.members(c);
    double lowest = sums[static_cast<std::size_t>(members.front())];
    for (Index i : members) lowest = std::min(lowest, sums[static_cast<std::size_t>(i)]);
    const double cutoff = lowest + kMedoidTieTolerance * lowest;
    // Members are ascending, so the first one under the cutoff wins.
    for (Index i : members) {
      if (sums[static_cast<std::size_t>(i)] <= cutoff) {
        medoids[static_cast<std::size_t>(c)] = i;
        break;
      }
    }
  }
  return medoids;
}

}  // namespace granularity
