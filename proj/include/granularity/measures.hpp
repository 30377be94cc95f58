#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"
#include "granularity/medoids.hpp"
#include "granularity/parallel.hpp"
#include "granularity/types.hpp"

namespace granularity {

/// Output of one granularity measure on one dataset.
struct MeasureResult {
  Measure measure = Measure::rankm;
  Score score;
  /// BHG on large inputs is a Monte Carlo estimate.
  bool approximate = false;
  Index n = 0;
  Index k = 0;
  /// Samples dropped because their per-sample denominator was zero.
  std::int64_t excluded_samples = 0;
  double runtime_ms = 0.0;
  /// Distance configuration that produced the input; empty when the
  /// distances were supplied directly.
  std::optional<DistanceConfig> distance;
};

struct MeasureOptions {
  /// Number of (within, between) pair combinations sampled by BHG when exact
  /// counting is too large.
  std::uint64_t bhg_budget = 10'000'000;
  /// Exact BHG counting is used while #within * #between stays below this.
  std::uint64_t bhg_exact_limit = 100'000'000;
  std::uint64_t seed = 0;
};

/// For every sample i, the other samples ordered by ascending d(i, .), ties
/// broken by the smaller sample index. Independent of labels, so one order
/// serves every relabeling of the same distances.
class NeighborOrder {
 public:
  template <DistanceSource Source>
  explicit NeighborOrder(const Source& d);

  Index n() const { return n_; }
  /// Neighbours of i, nearest first (length n - 1).
  std::span<const std::int32_t> of(Index i) const {
    return {order_.data() + static_cast<std::size_t>(i * (n_ - 1)),
            static_cast<std::size_t>(n_ - 1)};
  }

 private:
  Index n_ = 0;
  std::vector<std::int32_t> order_;
};

/// Ranks (1-based, among the n - 1 other samples) of each sample's
/// same-class neighbours, ascending.
class RankList {
 public:
  RankList() = default;
  RankList(std::vector<std::int64_t> offsets, std::vector<std::int64_t> ranks)
      : offsets_(std::move(offsets)), ranks_(std::move(ranks)) {}

  Index n() const { return static_cast<Index>(offsets_.size()) - 1; }
  std::span<const std::int64_t> of(Index i) const {
    const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i)]);
    const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i) + 1]);
    return {ranks_.data() + b, e - b};
  }

 private:
  std::vector<std::int64_t> offsets_;
  std::vector<std::int64_t> ranks_;
};

namespace detail {

struct Partial {
  Score score;
  std::int64_t excluded = 0;
  bool approximate = false;
};

void require_classes(const ClassIndex& index, Measure m);
void require_no_singletons(const ClassIndex& index, Measure m);
Score ratio_or_infinity(double numerator, double denominator);
/// Mean of the contributing terms; infinity when nothing contributes.
Score mean_or_infinity(std::span<const double> terms,
                       std::span<const unsigned char> contributes);

RankList rank_lists_from_order(const NeighborOrder& order, const ClassIndex& index);
Partial rank_from_lists(const RankList& lists);

template <DistanceSource Source>
Partial fisher(const Source& d, const ClassIndex& index, std::span<const Index> medoids) {
  require_classes(index, Measure::fisher);
  const Index k = index.k();
  double between = 0.0;
  for (Index a = 0; a < k; ++a) {
    for (Index b = a + 1; b < k; ++b) between += d(medoids[a], medoids[b]);
  }
  between /= static_cast<double>(k * (k - 1) / 2);

  std::vector<double> own(static_cast<std::size_t>(index.n()));
  parallel_for(index.n(), [&](std::int64_t i) {
    own[static_cast<std::size_t>(i)] = d(i, medoids[index.label(i)]);
  });
  double within = 0.0;
  for (double v : own) within += v;
  within /= static_cast<double>(index.n());
  return {ratio_or_infinity(between, within), 0, false};
}

template <DistanceSource Source>
Partial rs(const Source& d, const ClassIndex& index) {
  require_classes(index, Measure::rs);
  require_no_singletons(index, Measure::rs);
  const Index n = index.n();
  const Index k = index.k();
  std::vector<double> ratios(static_cast<std::size_t>(n), 0.0);
  std::vector<unsigned char> contributes(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](std::int64_t i) {
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(index.label(j))] += d(i, j);
    }
    const int own = index.label(i);
    const double a = sums[static_cast<std::size_t>(own)] /
                     static_cast<double>(index.size(own) - 1);
    double b = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[static_cast<std::size_t>(c)] /
                                        static_cast<double>(index.size(c)));
    }
    if (a > 0.0) {
      ratios[static_cast<std::size_t>(i)] = b / a;
      contributes[static_cast<std::size_t>(i)] = 1;
    }
  });
  Partial out;
  out.score = mean_or_infinity(ratios, contributes);
  out.excluded = std::count(contributes.begin(), contributes.end(), 0);
  return out;
}

template <DistanceSource Source>
Partial rsm(const Source& d, const ClassIndex& index, std::span<const Index> medoids) {
  require_classes(index, Measure::rsm);
  const Index n = index.n();
  const Index k = index.k();
  std::vector<double> ratios(static_cast<std::size_t>(n), 0.0);
  std::vector<unsigned char> contributes(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](std::int64_t i) {
    const int own = index.label(i);
    const double to_own = d(i, medoids[own]);
    if (to_own == 0.0) return;
    double to_other = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      if (c != own) to_other = std::min(to_other, d(i, medoids[c]));
    }
    ratios[static_cast<std::size_t>(i)] = to_other / to_own;
    contributes[static_cast<std::size_t>(i)] = 1;
  });
  Partial out;
  out.score = mean_or_infinity(ratios, contributes);
  out.excluded = std::count(contributes.begin(), contributes.end(), 0);
  return out;
}

template <DistanceSource Source>
Partial rankm(const Source& d, const ClassIndex& index, std::span<const Index> medoids) {
  require_classes(index, Measure::rankm);
  const Index n = index.n();
  const Index k = index.k();
  std::vector<double> miss(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, [&](std::int64_t i) {
    const int own = index.label(i);
    const double to_own = d(i, medoids[own]);
    std::int64_t rank = 1;
    for (Index c = 0; c < k; ++c) {
      if (c == own) continue;
      const double v = d(i, medoids[c]);
      if (v < to_own || (v == to_own && c < own)) ++rank;
    }
    miss[static_cast<std::size_t>(i)] = 1.0 - 1.0 / static_cast<double>(rank);
  });
  double total = 0.0;
  for (double v : miss) total += v;
  const double scale = static_cast<double>(k) /
                       (static_cast<double>(n) * static_cast<double>(k - 1));
  return {Score::finite(std::max(0.0, 1.0 - scale * total)), 0, false};
}

template <DistanceSource Source>
Partial bhg(const Source& d, const ClassIndex& index, const MeasureOptions& options) {
  require_classes(index, Measure::bhg);
  const std::int64_t within_pairs = index.within_pair_count();
  const std::int64_t between_pairs = index.total_pair_count() - within_pairs;
  if (within_pairs < 1 || between_pairs < 1) {
    throw ComputeError("bhg needs at least one within-class and one between-class pair");
  }
  const Index n = index.n();
  Partial out;
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  if (static_cast<double>(within_pairs) * static_cast<double>(between_pairs) <=
      static_cast<double>(options.bhg_exact_limit)) {
    std::vector<double> within;
    std::vector<double> between;
    within.reserve(static_cast<std::size_t>(within_pairs));
    between.reserve(static_cast<std::size_t>(between_pairs));
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        (index.label(i) == index.label(j) ? within : between).push_back(d(i, j));
      }
    }
    std::sort(between.begin(), between.end());
    for (double w : within) {
      const auto lo = std::lower_bound(between.begin(), between.end(), w);
      const auto hi = std::upper_bound(lo, between.end(), w);
      discordant += static_cast<std::uint64_t>(lo - between.begin());
      concordant += static_cast<std::uint64_t>(between.end() - hi);
    }
  } else {
    // Uniform over within pairs: class weighted by its pair count, then a
    // uniform pair of distinct members. Uniform over between pairs: rejection
    // on uniform ordered pairs.
    std::mt19937_64 rng(options.seed);
    std::vector<double> weights;
    for (Index c = 0; c < index.k(); ++c) {
      const double s = static_cast<double>(index.size(c));
      weights.push_back(s * (s - 1.0) / 2.0);
    }
    std::discrete_distribution<Index> pick_class(weights.begin(), weights.end());
    std::uniform_int_distribution<Index> pick_sample(0, n - 1);
    for (std::uint64_t t = 0; t < options.bhg_budget; ++t) {
      const Index c = pick_class(rng);
      const auto members = index.members(c);
      std::uniform_int_distribution<std::size_t> pick_member(0, members.size() - 1);
      const std::size_t a = pick_member(rng);
      std::size_t b = pick_member(rng);
      while (b == a) b = pick_member(rng);
      const double w = d(members[a], members[b]);
      Index i = 0;
      Index j = 0;
      do {
        i = pick_sample(rng);
        j = pick_sample(rng);
      } while (index.label(i) == index.label(j));
      const double v = d(i, j);
      if (w < v) ++concordant;
      if (w > v) ++discordant;
    }
    out.approximate = true;
  }
  out.score = discordant == 0
                  ? Score::infinity()
                  : Score::finite(static_cast<double>(concordant) /
                                  static_cast<double>(discordant));
  return out;
}

template <DistanceSource Source>
Partial c_index(const Source& d, const ClassIndex& index) {
  require_classes(index, Measure::cindex);
  const std::int64_t within_pairs = index.within_pair_count();
  const std::int64_t total = index.total_pair_count();
  if (within_pairs < 1 || within_pairs >= total) {
    throw ComputeError("c index needs 1 <= #within-class pairs < #pairs");
  }
  struct Pair {
    double distance;
    bool within;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(total));
  const Index n = index.n();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      pairs.push_back({d(i, j), index.label(i) == index.label(j)});
    }
  }
  // Within-class pairs first among equal distances: the denominator is then
  // exactly zero iff the within pairs are the smallest distances.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.within && !b.within;
  });
  const auto count = static_cast<std::size_t>(within_pairs);
  const std::size_t size = pairs.size();

  // D_max - D_min, pairing the t-th largest-set element with the t-th
  // smallest-set element so every term is >= 0.
  double spread = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    spread += pairs[size - count + t].distance - pairs[t].distance;
  }
  // D_w - D_min: within pairs outside the smallest N against between pairs
  // inside it (equal counts, every term > 0).
  std::vector<double> late_within;
  std::vector<double> early_between;
  for (std::size_t t = 0; t < size; ++t) {
    if (t < count && !pairs[t].within) early_between.push_back(pairs[t].distance);
    if (t >= count && pairs[t].within) late_within.push_back(pairs[t].distance);
  }
  double excess = 0.0;
  for (std::size_t t = 0; t < late_within.size(); ++t) {
    excess += late_within[t] - early_between[t];
  }
  return {ratio_or_infinity(spread, excess), 0, false};
}

}  // namespace detail

template <DistanceSource Source>
NeighborOrder::NeighborOrder(const Source& d) : n_(d.size()) {
  const Index n = n_;
  order_.resize(static_cast<std::size_t>(n * (n - 1)));
  parallel_for(n, [&](std::int64_t i) {
    std::vector<std::pair<double, std::int32_t>> row;
    row.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(d(i, j), static_cast<std::int32_t>(j));
    }
    std::sort(row.begin(), row.end());
    auto* out = order_.data() + static_cast<std::size_t>(i * (n - 1));
    for (std::size_t t = 0; t < row.size(); ++t) out[t] = row[t].second;
  });
}

/// Same-class neighbour ranks for every sample. O(n^2 log n).
template <DistanceSource Source>
RankList rank_lists(const Source& d, const ClassIndex& index) {
  return detail::rank_lists_from_order(NeighborOrder(d), index);
}

namespace detail {

template <typename F>
MeasureResult timed(Measure m, const ClassIndex& index, F&& compute) {
  const auto start = std::chrono::steady_clock::now();
  const Partial p = compute();
  const auto stop = std::chrono::steady_clock::now();
  MeasureResult r;
  r.measure = m;
  r.score = p.score;
  r.approximate = p.approximate;
  r.excluded_samples = p.excluded;
  r.n = index.n();
  r.k = index.k();
  r.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return r;
}

}  // namespace detail

/// Ratio of the mean distance between class medoids to the mean distance of
/// samples to their own medoid. Infinity when every sample is its medoid.
template <DistanceSource Source>
MeasureResult fisher(const Source& d, const ClassIndex& index) {
  return detail::timed(Measure::fisher, index, [&] {
    return detail::fisher(d, index, class_medoids(d, index));
  });
}

/// Revised silhouette: mean over samples of b(x)/a(x), where a is the mean
/// same-class distance and b the smallest mean distance to another class.
/// Samples with a(x) = 0 are excluded. Every class needs >= 2 samples.
template <DistanceSource Source>
MeasureResult rs(const Source& d, const ClassIndex& index) {
  return detail::timed(Measure::rs, index, [&] { return detail::rs(d, index); });
}

/// Revised silhouette on medoids: mean of d(x, nearest other medoid) /
/// d(x, own medoid), skipping samples that coincide with their medoid.
template <DistanceSource Source>
MeasureResult rsm(const Source& d, const ClassIndex& index) {
  return detail::timed(Measure::rsm, index, [&] {
    return detail::rsm(d, index, class_medoids(d, index));
  });
}

/// Mean normalized average precision of same-class neighbours,
/// (1/|R_i|) sum_j j / R_ij, averaged over samples. Lies in (0, 1].
template <DistanceSource Source>
MeasureResult rank(const Source& d, const ClassIndex& index) {
  return detail::timed(Measure::rank, index, [&] {
    detail::require_classes(index, Measure::rank);
    detail::require_no_singletons(index, Measure::rank);
    return detail::rank_from_lists(rank_lists(d, index));
  });
}

/// Rank with a precomputed neighbour order (reused across relabelings).
MeasureResult rank(const NeighborOrder& order, const ClassIndex& index);

/// 1 - k/(n(k-1)) * sum_i (1 - 1/R_i), with R_i the rank of the own-class
/// medoid among all medoids by distance to x_i (ties: smaller class id
/// first). O(nk) after the medoids.
template <DistanceSource Source>
MeasureResult rankm(const Source& d, const ClassIndex& index) {
  return detail::timed(Measure::rankm, index, [&] {
    return detail::rankm(d, index, class_medoids(d, index));
  });
}

/// Baker-Hubert gamma in ratio form N+/N-. Exact when the number of
/// (within, between) combinations is at most options.bhg_exact_limit,
/// otherwise a seeded Monte Carlo estimate flagged as approximate.
template <DistanceSource Source>
MeasureResult bhg(const Source& d, const ClassIndex& index,
                  const MeasureOptions& options = {}) {
  return detail::timed(Measure::bhg, index,
                       [&] { return detail::bhg(d, index, options); });
}

/// C index in the inverted form (D_max - D_min) / (D_w - D_min).
template <DistanceSource Source>
MeasureResult c_index(const Source& d, const ClassIndex& index) {
  return detail::timed(Measure::cindex, index,
                       [&] { return detail::c_index(d, index); });
}

/// Medoid measures accept externally computed medoids (e.g. shared across
/// class-pair restrictions). Other measures ignore `medoids`.
template <DistanceSource Source>
MeasureResult evaluate(Measure m, const Source& d, const ClassIndex& index,
                       const MeasureOptions& options = {},
                       std::span<const Index> medoids = {}) {
  std::vector<Index> own;
  auto medoids_or_compute = [&]() -> std::span<const Index> {
    if (!medoids.empty()) return medoids;
    own = class_medoids(d, index);
    return own;
  };
  switch (m) {
    case Measure::fisher:
      return detail::timed(m, index, [&] {
        return detail::fisher(d, index, medoids_or_compute());
      });
    case Measure::rs:
      return rs(d, index);
    case Measure::rsm:
      return detail::timed(m, index, [&] {
        return detail::rsm(d, index, medoids_or_compute());
      });
    case Measure::rank:
      return rank(d, index);
    case Measure::rankm:
      return detail::timed(m, index, [&] {
        return detail::rankm(d, index, medoids_or_compute());
      });
    case Measure::bhg:
      return bhg(d, index, options);
    case Measure::cindex:
      return c_index(d, index);
  }
  throw ComputeError("unknown measure");
}

}  // namespace granularity
