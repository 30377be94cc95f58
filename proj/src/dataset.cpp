#include "granularity/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace granularity {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::euclidean:
      return "euclidean";
    case Metric::cosine:
      return "cosine";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

ClassIndex::ClassIndex(std::span<const int> labels)
    : labels_(labels.begin(), labels.end()) {
  int max_label = -1;
  for (int l : labels_) {
    if (l < 0) throw ValidationError("negative class id in dense labels");
    max_label = std::max(max_label, l);
  }
  members_.resize(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    members_[static_cast<std::size_t>(labels_[i])].push_back(
        static_cast<Index>(i));
  }
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (members_[c].empty()) {
      throw ValidationError("class id " + std::to_string(c) +
                            " has no samples; labels must be dense");
    }
  }
}

Index ClassIndex::min_class_size() const {
  Index smallest = n();
  for (const auto& m : members_) {
    smallest = std::min(smallest, static_cast<Index>(m.size()));
  }
  return smallest;
}

std::int64_t ClassIndex::within_pair_count() const {
  std::int64_t total = 0;
  for (const auto& m : members_) {
    const auto s = static_cast<std::int64_t>(m.size());
    total += s * (s - 1) / 2;
  }
  return total;
}

DenseLabels densify_labels(std::span<const std::int64_t> raw) {
  std::map<std::int64_t, int> remap;
  for (std::int64_t id : raw) remap.emplace(id, 0);
  DenseLabels out;
  out.original_ids.reserve(remap.size());
  int next = 0;
  for (auto& [id, dense] : remap) {
    dense = next++;
    out.original_ids.push_back(id);
  }
  out.labels.reserve(raw.size());
  for (std::int64_t id : raw) out.labels.push_back(remap.at(id));
  return out;
}

LabeledDataset make_label_only_dataset(
    std::span<const std::int64_t> raw_labels) {
  if (raw_labels.size() < 2) {
    throw ValidationError("dataset needs at least 2 samples");
  }
  DenseLabels dense = densify_labels(raw_labels);
  if (dense.original_ids.size() < 2) {
    throw ValidationError("dataset needs at least 2 classes, found " +
                          std::to_string(dense.original_ids.size()));
  }
  LabeledDataset out;
  out.labels = std::move(dense.labels);
  out.original_ids = std::move(dense.original_ids);
  return out;
}

std::int64_t count_cross_class_duplicates(const FeatureMatrix& features,
                                          const ClassIndex& index) {
  // Sort rows lexicographically, then compare neighbours.
  std::vector<Index> order(static_cast<std::size_t>(features.rows()));
  for (Index i = 0; i < features.rows(); ++i) {
    order[static_cast<std::size_t>(i)] = i;
  }
  auto row_less = [&](Index a, Index b) {
    for (Index c = 0; c < features.cols(); ++c) {
      if (features(a, c) != features(b, c)) return features(a, c) < features(b, c);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), row_less);
  std::int64_t duplicates = 0;
  for (std::size_t t = 1; t < order.size(); ++t) {
    const Index a = order[t - 1];
    const Index b = order[t];
    if (features.row(a) == features.row(b) && index.label(a) != index.label(b)) {
      ++duplicates;
    }
  }
  return duplicates;
}

namespace detail {

void validate_dataset(const FeatureMatrix& features, std::size_t label_count) {
  if (static_cast<std::size_t>(features.rows()) != label_count) {
    throw ValidationError("row-count mismatch: " +
                          std::to_string(features.rows()) +
                          " feature rows vs " + std::to_string(label_count) +
                          " labels");
  }
  if (features.rows() < 2) throw ValidationError("dataset needs at least 2 samples");
  if (features.cols() < 1) throw ValidationError("feature dimension must be >= 1");
  if (!features.allFinite()) throw ValidationError("non-finite feature");
}

}  // namespace detail
}  // namespace granularity
