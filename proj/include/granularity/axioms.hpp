#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"
#include "granularity/types.hpp"

namespace granularity {

/// Absolute slack allowed when checking that a measure does not decrease.
inline constexpr double kMonotonicitySlack = 1e-12;
/// Relative tolerance for invariance checks (relabeling, rescaling).
inline constexpr double kEqualityTolerance = 1e-9;

enum class TransformKind { granularity_consistent, isomorphic, scale };

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

struct TransformSpec {
  TransformKind kind = TransformKind::granularity_consistent;
  std::uint64_t seed = 0;
  /// Granularity-consistent perturbation width, in (0, 1).
  double strength = 0.5;
  /// Fixed scale factor; when empty each trial draws alpha log-uniformly
  /// from [0.1, 10].
  std::optional<double> alpha;
};

/// Throws ValidationError when strength is outside (0, 1) or alpha <= 0.
void validate(const TransformSpec& spec);

struct AxiomReport {
  Measure measure = Measure::rankm;
  /// Set when the report was produced for a custom measure callable.
  std::string measure_name;
  TransformKind kind = TransformKind::granularity_consistent;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double max_violation_magnitude = 0.0;
};

/// Multiplies each same-class distance by u ~ U[1 - strength, 1] and each
/// cross-class distance by u ~ U[1, 1 + strength], one draw per unordered
/// pair in row-major upper-triangle order.
DistanceMatrix apply_granularity_consistent(const DistanceMatrix& d, const ClassIndex& index,
                                            std::uint64_t seed, double strength);

/// Uniformly random permutation of {0..k-1}.
std::vector<int> random_permutation(Index k, std::uint64_t seed);
std::vector<int> apply_permutation(std::span<const int> labels, std::span<const int> sigma);
/// Relabels classes through a random permutation; the partition is unchanged.
std::vector<int> apply_isomorphic(std::span<const int> labels, std::uint64_t seed);

/// Seed for trial t of a suite seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial);

using MeasureFunction = std::function<Score(const DistanceMatrix&, const ClassIndex&)>;

/// Wraps a library measure for check_axioms.
MeasureFunction measure_function(Measure m);

/// Runs `trials` seeded repetitions of each transform and counts violations:
/// granularity-consistent requires m' >= m - kMonotonicitySlack; isomorphic
/// and scale require |m' - m| <= kEqualityTolerance * max(|m|, |m'|).
/// An infinite score only satisfies equality with another infinite score.
/// Measure errors propagate.
std::vector<AxiomReport> check_axioms(const DistanceMatrix& d, const ClassIndex& index,
                                      const MeasureFunction& measure,
                                      std::span<const TransformSpec> specs,
                                      std::int64_t trials);

std::vector<AxiomReport> check_axioms(const DistanceMatrix& d, const ClassIndex& index,
                                      Measure measure, std::span<const TransformSpec> specs,
                                      std::int64_t trials);

}  // namespace granularity
