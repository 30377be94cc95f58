#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"
#include "granularity/measures.hpp"
#include "granularity/medoids.hpp"
#include "granularity/parallel.hpp"
#include "granularity/types.hpp"

namespace granularity {

/// Symmetric k x k table of two-class granularity values. The diagonal, and
/// any pair whose measure failed, hold no value.
class ClassPairGranularityTable {
 public:
  ClassPairGranularityTable() = default;
  ClassPairGranularityTable(Index k, Measure measure)
      : k_(k), measure_(measure), entries_(static_cast<std::size_t>(k * k)) {}

  Index k() const { return k_; }
  Measure measure() const { return measure_; }
  const std::optional<Score>& operator()(Index a, Index b) const {
    return entries_[static_cast<std::size_t>(a * k_ + b)];
  }
  void set(Index a, Index b, std::optional<Score> value) {
    entries_[static_cast<std::size_t>(a * k_ + b)] = value;
    entries_[static_cast<std::size_t>(b * k_ + a)] = value;
  }

 private:
  Index k_ = 0;
  Measure measure_ = Measure::rankm;
  std::vector<std::optional<Score>> entries_;
};

enum class TasterKind { bitter, sweet, random };
std::string_view to_string(TasterKind kind);

struct TasterSelection {
  TasterKind kind = TasterKind::sweet;
  /// Dense class ids in the order they were added.
  std::vector<int> classes;
  /// Bitter only: the classes of the initial seed set.
  std::vector<int> seed_classes;
  /// Granularity of the selection after each addition (from size 2 on).
  std::vector<Score> granularity_trace;
  Score final_granularity;
};

/// Granularity of the subset formed by `classes` (dense ids, size >= 2).
using SubsetEvaluator = std::function<Score(std::span<const int> classes)>;

/// Samples of the given classes (ascending) and their dense local labels,
/// numbered by the ascending order of the class ids.
struct Restriction {
  std::vector<Index> samples;
  std::vector<int> labels;
  /// Class id of local label t.
  std::vector<int> classes;
};
Restriction restrict_to_classes(const ClassIndex& index, std::span<const int> classes);

/// Measure value on the dataset restricted to `classes`, with medoids
/// recomputed on the restriction. Measure errors propagate.
template <DistanceSource Source>
Score subset_granularity(const Source& d, const ClassIndex& index,
                         std::span<const int> classes, Measure measure,
                         const MeasureOptions& options = {}) {
  if (classes.size() < 2) throw ValidationError("subset needs at least 2 classes");
  const Restriction r = restrict_to_classes(index, classes);
  const SubsetDistance<Source> view(d, r.samples);
  return evaluate(measure, view, ClassIndex(r.labels), options).score;
}

/// Two-class granularity for every class pair. Each entry is the measure on
/// the restriction to the two classes; a medoid depends only on its own
/// class, so the global medoids are reused. Failures leave the entry empty.
template <DistanceSource Source>
ClassPairGranularityTable pairwise_class_granularity(const Source& d, const ClassIndex& index,
                                                     Measure measure = Measure::rankm,
                                                     const MeasureOptions& options = {}) {
  const Index k = index.k();
  if (k < 2) throw ValidationError("pairwise granularity needs at least 2 classes");
  const std::vector<Index> medoids = uses_medoids(measure) ? class_medoids(d, index)
                                                           : std::vector<Index>{};
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
  }
  std::vector<std::optional<Score>> values(pairs.size());
  parallel_for(static_cast<std::int64_t>(pairs.size()), [&](std::int64_t p) {
    const auto [a, b] = pairs[static_cast<std::size_t>(p)];
    const int both[] = {a, b};
    try {
      const Restriction r = restrict_to_classes(index, both);
      const SubsetDistance<Source> view(d, r.samples);
      std::vector<Index> local_medoids;
      if (!medoids.empty()) {
        // Restriction samples are ascending; locate each global medoid.
        for (int c : both) {
          const auto it = std::lower_bound(r.samples.begin(), r.samples.end(),
                                           medoids[static_cast<std::size_t>(c)]);
          local_medoids.push_back(static_cast<Index>(it - r.samples.begin()));
        }
      }
      values[static_cast<std::size_t>(p)] =
          evaluate(measure, view, ClassIndex(r.labels), options, local_medoids).score;
    } catch (const std::exception&) {
      values[static_cast<std::size_t>(p)] = std::nullopt;
    }
  });
  ClassPairGranularityTable table(k, measure);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    table.set(pairs[p].first, pairs[p].second, values[p]);
  }
  return table;
}

/// Default taster size: round-half-up of 25% of k, at least 2.
Index default_target_size(Index k);
/// Seed-set size for bitter extraction: ceil(seed_fraction * k).
Index seed_target(Index k, double seed_fraction);

/// Starts from the largest-valued pair (ties: lexicographically smallest),
/// then repeatedly adds the class with the largest mean table value to the
/// selected classes (ties: smallest id).
TasterSelection extract_sweet(const ClassPairGranularityTable& table, Index target_size,
                              const SubsetEvaluator& evaluate_subset = {});

/// Seeds with the classes of the smallest-valued pairs (scanned ascending,
/// ties lexicographic) until the seed target is reached, then repeatedly adds
/// the class whose minimum table value to the selected classes is smallest
/// (ties: smallest id).
TasterSelection extract_bitter(const ClassPairGranularityTable& table, Index target_size,
                               double seed_fraction = 0.10,
                               const SubsetEvaluator& evaluate_subset = {});

/// Uniform random subset of `target_size` classes without replacement.
TasterSelection extract_random(Index k, Index target_size, std::uint64_t seed,
                               const SubsetEvaluator& evaluate_subset = {});

}  // namespace granularity
