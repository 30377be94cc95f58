#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"
#include "granularity/types.hpp"

namespace granularity::synth {

/// Two classes in 2-D: class 0 ~ N((0,0), I), class 1 ~ N((m,0), I).
struct GaussianPairConfig {
  double separation = 0.0;
  Index samples_per_class = 1000;
  Index repeats = 10;
  std::uint64_t seed = 0;
};

void validate(const GaussianPairConfig& config);

/// Class 0 samples first, then class 1. Both classes share one standard
/// normal draw stream, so datasets with the same seed and different
/// separations differ only by the shift of class 1.
LabeledDataset generate_gaussian_pair(const GaussianPairConfig& config);

/// Mean and population standard deviation of one measure at one sweep point.
struct SweepStat {
  Measure measure = Measure::rankm;
  double mean = 0.0;
  double stddev = 0.0;
  /// Per-repeat values (infinite scores are stored as +inf).
  std::vector<double> values;
  std::int64_t infinite_count = 0;
};

struct SweepPoint {
  double parameter = 0.0;
  std::vector<SweepStat> stats;
};

struct SweepReport {
  std::string parameter_name;
  std::vector<SweepPoint> points;

  /// Mean curve of one measure across the sweep points.
  std::vector<double> means(Measure m) const;
  /// True when the mean curve of m is strictly increasing.
  bool strictly_increasing(Measure m) const;
};

/// For each separation m, `config.repeats` seeded datasets are drawn and
/// every requested measure is evaluated under raw euclidean distance.
/// Repeat r uses the same draw at every m.
SweepReport separation_sweep(std::span<const double> separations,
                             const GaussianPairConfig& config,
                             std::span<const Measure> measures);

/// Parses "start:stop:step" (inclusive stop, within half a step).
std::vector<double> parse_range(const std::string& text);

/// Planted two-level hierarchy: superclasses whose centers are at least
/// super_separation apart, each split into subclasses whose centers lie on a
/// sphere of radius sub_radius around the superclass center.
struct HierarchyConfig {
  Index n_super = 10;
  Index subs_per_super = 4;
  Index samples_per_sub = 25;
  Index dims = 8;
  double super_separation = 20.0;
  double sub_radius = 3.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

void validate(const HierarchyConfig& config);

struct HierarchicalDataset {
  FeatureMatrix features;
  std::vector<int> coarse;
  std::vector<int> fine;
  /// fine id -> coarse id
  std::vector<int> parent;
  Index n_super = 0;
  Index n_fine = 0;
};

/// Samples are grouped by fine class; fine class f belongs to superclass
/// f / subs_per_super. Throws ComputeError("separation infeasible") when a
/// superclass center cannot be placed within 10^4 rejection attempts.
HierarchicalDataset generate_hierarchy(const HierarchyConfig& config);

/// Labels where the superclasses in `split` use their fine labels and all
/// others keep the coarse label, renumbered densely (unsplit superclasses
/// first in id order, then fine classes in id order).
std::vector<int> partial_relabel(const HierarchicalDataset& h, std::span<const int> split);

struct RelabelTrace {
  Measure measure = Measure::rankm;
  /// traces[s][t]: value after t superclasses of shuffle s were split.
  std::vector<std::vector<double>> traces;
  std::vector<double> mean;
  std::vector<double> stddev;
  bool monotone = true;
  /// Fisher is evaluated but not held to the monotonicity criterion.
  bool exempt = false;
  std::int64_t violating_shuffles = 0;

  bool passed() const { return exempt || monotone; }
  /// Standard deviation across shuffles, averaged over steps.
  double mean_stddev() const;
};

struct RelabelReport {
  std::vector<RelabelTrace> measures;
  bool passed() const;
};

/// Splits superclasses into their subclasses one at a time in `shuffles`
/// seeded random orders, evaluating each measure (raw euclidean) after every
/// step. A measure passes when every trace is non-increasing within
/// kMonotonicitySlack.
RelabelReport relabel_monotonicity(const HierarchicalDataset& h,
                                   std::span<const Measure> measures, Index shuffles,
                                   std::uint64_t seed);

/// Clusters of classes: group centers drawn from N(0, group_spread^2 I),
/// each holding `classes_per_group` classes whose centers sit at distance
/// class_radius from the group center. Groups overlap mildly, so no subset
/// of classes is trivially separable. Used for taster experiments.
struct PlantedConfig {
  Index groups = 5;
  Index classes_per_group = 4;
  Index samples_per_class = 30;
  Index dims = 8;
  double group_spread = 1.0;
  double class_radius = 1.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

LabeledDataset generate_planted(const PlantedConfig& config);

/// One instance of the randomized axiom corpus.
struct CorpusInstance {
  std::string name;
  LabeledDataset dataset;
};

/// Deterministic corpus of random labeled datasets (n <= 200, k <= 10) used
/// by the axiom suite: Gaussian blobs of varying overlap, uneven class
/// sizes, and uniform noise with random labels.
std::vector<CorpusInstance> axiom_corpus(std::uint64_t seed = 20190601);

}  // namespace granularity::synth
