#include "granularity/taster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

namespace granularity {
namespace {

using MaybeScore = std::optional<Score>;

/// Mean of the defined entries; infinite if any entry is infinite.
MaybeScore mean_of(const ClassPairGranularityTable& table, int candidate,
                   std::span<const int> selected) {
  double total = 0.0;
  int count = 0;
  for (int s : selected) {
    const auto& v = table(candidate, s);
    if (!v) continue;
    if (v->infinite) return Score::infinity();
    total += v->value;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return Score::finite(total / count);
}

MaybeScore min_of(const ClassPairGranularityTable& table, int candidate,
                  std::span<const int> selected) {
  MaybeScore best;
  for (int s : selected) {
    const auto& v = table(candidate, s);
    if (v && (!best || *v < *best)) best = v;
  }
  return best;
}

/// Undefined ranks below every defined value.
bool greater(const MaybeScore& a, const MaybeScore& b) {
  if (!a) return false;
  if (!b) return true;
  return *a > *b;
}

/// Undefined ranks above every defined value.
bool less(const MaybeScore& a, const MaybeScore& b) {
  if (!a) return false;
  if (!b) return true;
  return *a < *b;
}

void check_target(const ClassPairGranularityTable& table, Index target_size) {
  if (target_size < 2 || target_size > table.k()) {
    throw ValidationError("target size must lie in [2, k], got " + std::to_string(target_size));
  }
}

bool contains(std::span<const int> selected, int c) {
  return std::find(selected.begin(), selected.end(), c) != selected.end();
}

/// Mean of the defined table entries over all selected pairs.
Score table_proxy(const ClassPairGranularityTable& table, std::span<const int> selected) {
  double total = 0.0;
  int count = 0;
  for (std::size_t a = 0; a < selected.size(); ++a) {
    for (std::size_t b = a + 1; b < selected.size(); ++b) {
      const auto& v = table(selected[a], selected[b]);
      if (!v) continue;
      if (v->infinite) return Score::infinity();
      total += v->value;
      ++count;
    }
  }
  return count ? Score::finite(total / count) : Score::infinity();
}

void record(TasterSelection& selection, const ClassPairGranularityTable* table,
            const SubsetEvaluator& evaluate_subset) {
  if (selection.classes.size() < 2) return;
  if (evaluate_subset) {
    selection.granularity_trace.push_back(evaluate_subset(selection.classes));
  } else if (table) {
    selection.granularity_trace.push_back(table_proxy(*table, selection.classes));
  }
}

void finish(TasterSelection& selection) {
  if (!selection.granularity_trace.empty()) {
    selection.final_granularity = selection.granularity_trace.back();
  }
}

}  // namespace

std::string_view to_string(TasterKind kind) {
  switch (kind) {
    case TasterKind::bitter:
      return "bitter";
    case TasterKind::sweet:
      return "sweet";
    case TasterKind::random:
      return "random";
  }
  return "unknown";
}

Restriction restrict_to_classes(const ClassIndex& index, std::span<const int> classes) {
  Restriction r;
  r.classes.assign(classes.begin(), classes.end());
  std::sort(r.classes.begin(), r.classes.end());
  if (std::adjacent_find(r.classes.begin(), r.classes.end()) != r.classes.end()) {
    throw ValidationError("duplicate class in subset");
  }
  std::vector<int> local(static_cast<std::size_t>(index.k()), -1);
  for (std::size_t t = 0; t < r.classes.size(); ++t) {
    const int c = r.classes[t];
    if (c < 0 || c >= index.k()) throw ValidationError("class id out of range");
    local[static_cast<std::size_t>(c)] = static_cast<int>(t);
  }
  for (Index i = 0; i < index.n(); ++i) {
    const int l = local[static_cast<std::size_t>(index.label(i))];
    if (l < 0) continue;
    r.samples.push_back(i);
    r.labels.push_back(l);
  }
  return r;
}

Index default_target_size(Index k) {
  const auto rounded = static_cast<Index>(std::floor(0.25 * static_cast<double>(k) + 0.5));
  return std::max<Index>(2, rounded);
}

Index seed_target(Index k, double seed_fraction) {
  if (!(seed_fraction > 0.0 && seed_fraction <= 1.0)) {
    throw ValidationError("seed fraction must lie in (0, 1]");
  }
  // The small offset keeps products like 0.1 * 20 from rounding up to 3.
  return static_cast<Index>(std::ceil(seed_fraction * static_cast<double>(k) - 1e-9));
}

TasterSelection extract_sweet(const ClassPairGranularityTable& table, Index target_size,
                              const SubsetEvaluator& evaluate_subset) {
  check_target(table, target_size);
  const int k = static_cast<int>(table.k());
  TasterSelection selection;
  selection.kind = TasterKind::sweet;

  int best_a = 0;
  int best_b = 1;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (greater(table(a, b), table(best_a, best_b))) {
        best_a = a;
        best_b = b;
      }
    }
  }
  selection.classes = {best_a, best_b};
  record(selection, &table, evaluate_subset);

  while (static_cast<Index>(selection.classes.size()) < target_size) {
    int chosen = -1;
    MaybeScore chosen_score;
    for (int c = 0; c < k; ++c) {
      if (contains(selection.classes, c)) continue;
      const MaybeScore s = mean_of(table, c, selection.classes);
      if (chosen < 0 || greater(s, chosen_score)) {
        chosen = c;
        chosen_score = s;
      }
    }
    selection.classes.push_back(chosen);
    record(selection, &table, evaluate_subset);
  }
  finish(selection);
  return selection;
}

TasterSelection extract_bitter(const ClassPairGranularityTable& table, Index target_size,
                               double seed_fraction, const SubsetEvaluator& evaluate_subset) {
  check_target(table, target_size);
  const int k = static_cast<int>(table.k());
  const Index seeds = seed_target(k, seed_fraction);
  if (seeds > target_size) {
    throw ValidationError("seed target " + std::to_string(seeds) + " exceeds target size " +
                          std::to_string(target_size));
  }
  TasterSelection selection;
  selection.kind = TasterKind::bitter;

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& x, const auto& y) {
    return less(table(x.first, x.second), table(y.first, y.second));
  });
  for (const auto& [a, b] : pairs) {
    if (static_cast<Index>(selection.classes.size()) >= seeds) break;
    const bool has_a = contains(selection.classes, a);
    const bool has_b = contains(selection.classes, b);
    if (!has_a) selection.classes.push_back(a);
    // Both classes are new: the second one may overshoot the seed target by
    // one, but never the taster size.
    if (!has_b && static_cast<Index>(selection.classes.size()) < target_size) {
      selection.classes.push_back(b);
    }
  }
  selection.seed_classes = selection.classes;
  record(selection, &table, evaluate_subset);

  while (static_cast<Index>(selection.classes.size()) < target_size) {
    int chosen = -1;
    MaybeScore chosen_score;
    for (int c = 0; c < k; ++c) {
      if (contains(selection.classes, c)) continue;
      const MaybeScore s = min_of(table, c, selection.classes);
      if (chosen < 0 || less(s, chosen_score)) {
        chosen = c;
        chosen_score = s;
      }
    }
    selection.classes.push_back(chosen);
    record(selection, &table, evaluate_subset);
  }
  finish(selection);
  return selection;
}

TasterSelection extract_random(Index k, Index target_size, std::uint64_t seed,
                               const SubsetEvaluator& evaluate_subset) {
  if (target_size < 1 || target_size > k) {
    throw ValidationError("target size must lie in [1, k]");
  }
  std::vector<int> all(static_cast<std::size_t>(k));
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first target_size slots are the sample.
  for (Index t = 0; t < target_size; ++t) {
    std::uniform_int_distribution<Index> pick(t, k - 1);
    std::swap(all[static_cast<std::size_t>(t)], all[static_cast<std::size_t>(pick(rng))]);
  }
  TasterSelection selection;
  selection.kind = TasterKind::random;
  for (Index t = 0; t < target_size; ++t) {
    selection.classes.push_back(all[static_cast<std::size_t>(t)]);
    record(selection, nullptr, evaluate_subset);
  }
  finish(selection);
  return selection;
}

}  // namespace granularity
