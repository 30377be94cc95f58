#include "granularity/distance.hpp"

#include <cmath>
#include <string>

namespace granularity {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  const Index n = values_.rows();
  if (values_.cols() != n) throw ValidationError("distance matrix must be square");
  if (n < 2) throw ValidationError("distance matrix needs at least 2 samples");
  for (Index i = 0; i < n; ++i) {
    if (values_(i, i) != 0.0) throw ValidationError("distance matrix diagonal must be zero");
    for (Index j = i + 1; j < n; ++j) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("distance matrix entries must be finite and >= 0");
      }
      if (v != values_(j, i)) throw ValidationError("distance matrix must be symmetric");
    }
  }
}

DistanceMatrix DistanceMatrix::symmetrized(Eigen::MatrixXd values, double tolerance) {
  const Index n = values.rows();
  if (values.cols() != n) throw ValidationError("distance matrix must be square");
  if (!values.allFinite()) throw ValidationError("distance matrix has non-finite entries");
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(values(i, j) - values(j, i)) > tolerance) {
        throw ValidationError("distance matrix not symmetric at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
      const double mean = 0.5 * (values(i, j) + values(j, i));
      values(i, j) = mean;
      values(j, i) = mean;
    }
    values(i, i) = 0.0;
  }
  return DistanceMatrix(std::move(values));
}

DistanceMatrix DistanceMatrix::scaled(double alpha) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("scale factor must be finite and > 0");
  }
  return DistanceMatrix(values_ * alpha, Unchecked{});
}

void FeatureDistance::prepare() {
  if (!rows_.allFinite()) throw ValidationError("non-finite feature");
  if (config_.metric == Metric::cosine || config_.normalize) {
    for (Index i = 0; i < rows_.rows(); ++i) {
      const double norm = rows_.row(i).norm();
      if (norm == 0.0) {
        throw ValidationError("feature row " + std::to_string(i) +
                              " has zero norm; cannot normalize");
      }
      rows_.row(i) /= norm;
    }
  }
}

}  // namespace granularity
