#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "granularity/dataset.hpp"
#include "granularity/parallel.hpp"
#include "granularity/types.hpp"

namespace granularity {

/// Anything that can answer d(i, j) for samples 0..size()-1. Measures are
/// written against this concept so they run equally on a materialized
/// matrix, on features evaluated lazily, or on a class-restricted view.
template <typename S>
concept DistanceSource = requires(const S& s, Index i, Index j) {
  { s.size() } -> std::convertible_to<Index>;
  { s(i, j) } -> std::convertible_to<double>;
};

/// Symmetric, zero-diagonal, nonnegative, finite n x n matrix.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Validates every invariant exactly; throws ValidationError otherwise.
  explicit DistanceMatrix(Eigen::MatrixXd values);

  /// Accepts a matrix that is symmetric within `tolerance` (absolute), then
  /// replaces it by (M + M^T) / 2 and forces the diagonal to zero.
  static DistanceMatrix symmetrized(Eigen::MatrixXd values, double tolerance);

  Index size() const { return values_.rows(); }
  double operator()(Index i, Index j) const { return values_(i, j); }
  const Eigen::MatrixXd& values() const { return values_; }

  /// Multiplies every entry by alpha > 0.
  DistanceMatrix scaled(double alpha) const;

 private:
  struct Unchecked {};
  DistanceMatrix(Eigen::MatrixXd values, Unchecked) : values_(std::move(values)) {}

  Eigen::MatrixXd values_;
  friend class DistanceMatrixBuilder;
};

/// Fills a DistanceMatrix in place when invariants hold by construction
/// (upper triangle written, lower mirrored).
class DistanceMatrixBuilder {
 public:
  explicit DistanceMatrixBuilder(Index n) : values_(Eigen::MatrixXd::Zero(n, n)) {}
  void set(Index i, Index j, double v) {
    values_(i, j) = v;
    values_(j, i) = v;
  }
  Index size() const { return values_.rows(); }
  double get(Index i, Index j) const { return values_(i, j); }
  DistanceMatrix build() && {
    return DistanceMatrix(std::move(values_), DistanceMatrix::Unchecked{});
  }

 private:
  Eigen::MatrixXd values_;
};

/// Evaluates distances on demand from feature rows, in double precision.
///
/// Euclidean: ||x_i - x_j|| (rows unit-normalized first when requested).
/// Cosine: 1 - cos(x_i, x_j), computed as ||u_i - u_j||^2 / 2 on unit rows,
/// which is exactly zero for identical rows and never negative.
class FeatureDistance {
 public:
  template <typename Derived>
  FeatureDistance(const Eigen::MatrixBase<Derived>& features,
                  const DistanceConfig& config)
      : rows_(features.template cast<double>()), config_(config) {
    prepare();
  }

  Index size() const { return rows_.rows(); }
  double operator()(Index i, Index j) const {
    if (i == j) return 0.0;
    const double sq = (rows_.row(i) - rows_.row(j)).squaredNorm();
    return config_.metric == Metric::cosine ? 0.5 * sq : std::sqrt(sq);
  }
  const DistanceConfig& config() const { return config_; }
  const FeatureMatrix& prepared_rows() const { return rows_; }

 private:
  void prepare();

  FeatureMatrix rows_;
  DistanceConfig config_;
};

/// View of a source restricted to a subset of samples (local index t maps to
/// global index samples[t]).
template <DistanceSource Source>
class SubsetDistance {
 public:
  SubsetDistance(const Source& source, std::span<const Index> samples)
      : source_(&source), samples_(samples.begin(), samples.end()) {}

  Index size() const { return static_cast<Index>(samples_.size()); }
  double operator()(Index i, Index j) const {
    return (*source_)(samples_[static_cast<std::size_t>(i)],
                      samples_[static_cast<std::size_t>(j)]);
  }
  std::span<const Index> samples() const { return samples_; }

 private:
  const Source* source_;
  std::vector<Index> samples_;
};

/// Materializes any source into a DistanceMatrix (rows in parallel; every
/// entry is computed by the same scalar routine so results do not depend on
/// the worker count).
template <DistanceSource Source>
DistanceMatrix materialize(const Source& source) {
  const Index n = source.size();
  DistanceMatrixBuilder builder(n);
  parallel_for(n, [&](std::int64_t i) {
    for (Index j = i + 1; j < n; ++j) builder.set(i, j, source(i, j));
  });
  return std::move(builder).build();
}

/// Full n x n distance matrix of the dataset's features.
/// Throws ValidationError when a row has zero norm under cosine or
/// normalize=true.
template <typename Derived>
DistanceMatrix compute_distance_matrix(const Eigen::MatrixBase<Derived>& features,
                                       const DistanceConfig& config) {
  return materialize(FeatureDistance(features, config));
}

inline DistanceMatrix compute_distance_matrix(const LabeledDataset& dataset,
                                              const DistanceConfig& config) {
  return compute_distance_matrix(dataset.features, config);
}

}  // namespace granularity
