#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "granularity/types.hpp"

namespace granularity {

enum class Metric { euclidean, cosine };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);

/// How feature rows are turned into distances. The default normalizes rows
/// to unit length before the euclidean distance, which makes every measure
/// insensitive to the overall scale of the embedding.
struct DistanceConfig {
  Metric metric = Metric::euclidean;
  bool normalize = true;

  friend bool operator==(const DistanceConfig&, const DistanceConfig&) = default;
};

using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Partition of samples {0..n-1} into classes {0..k-1}.
class ClassIndex {
 public:
  ClassIndex() = default;
  /// Labels must be dense: every id in {0..k-1} occurs, k = max + 1.
  explicit ClassIndex(std::span<const int> labels);

  Index n() const { return static_cast<Index>(labels_.size()); }
  Index k() const { return static_cast<Index>(members_.size()); }
  int label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  std::span<const int> labels() const { return labels_; }
  /// Ascending sample indices of class c.
  std::span<const Index> members(Index c) const {
    return members_[static_cast<std::size_t>(c)];
  }
  Index size(Index c) const {
    return static_cast<Index>(members_[static_cast<std::size_t>(c)].size());
  }
  Index min_class_size() const;
  /// Number of unordered same-class pairs, sum of n_c (n_c - 1) / 2.
  std::int64_t within_pair_count() const;
  std::int64_t total_pair_count() const {
    return static_cast<std::int64_t>(n()) * (n() - 1) / 2;
  }

 private:
  std::vector<int> labels_;
  std::vector<std::vector<Index>> members_;
};

/// Maps arbitrary integer ids to a dense {0..k-1} range, preserving the
/// ascending order of the original ids. `original_ids[c]` recovers the id.
struct DenseLabels {
  std::vector<int> labels;
  std::vector<std::int64_t> original_ids;
};
DenseLabels densify_labels(std::span<const std::int64_t> raw);

/// Features plus class labels. Either `features` is populated (n x d) or the
/// dataset was loaded from a precomputed distance matrix, in which case
/// `features` is empty and the caller carries the matrix separately.
struct LabeledDataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::int64_t> original_ids;

  Index n() const { return static_cast<Index>(labels.size()); }
  Index d() const { return features.cols(); }
  Index k() const { return static_cast<Index>(original_ids.size()); }
  ClassIndex class_index() const { return ClassIndex(labels); }
};

/// Builds a validated dataset from raw features and raw (possibly sparse)
/// label ids. Throws ValidationError when n < 2, d < 1, fewer than two
/// classes, a non-finite feature, or a row-count mismatch is found.
template <typename Derived>
LabeledDataset make_dataset(const Eigen::MatrixBase<Derived>& features,
                            std::span<const std::int64_t> raw_labels);

/// Validates labels alone (used when distances are supplied directly).
LabeledDataset make_label_only_dataset(std::span<const std::int64_t> raw_labels);

/// Reports pairs of samples in different classes at distance zero. These
/// violate the identity-of-indiscernibles assumption but are accepted.
std::int64_t count_cross_class_duplicates(const FeatureMatrix& features,
                                          const ClassIndex& index);

namespace detail {
void validate_dataset(const FeatureMatrix& features, std::size_t label_count);
}  // namespace detail

template <typename Derived>
LabeledDataset make_dataset(const Eigen::MatrixBase<Derived>& features,
                            std::span<const std::int64_t> raw_labels) {
  FeatureMatrix values = features.template cast<double>();
  detail::validate_dataset(values, raw_labels.size());
  LabeledDataset out = make_label_only_dataset(raw_labels);
  out.features = std::move(values);
  return out;
}

}  // namespace granularity
