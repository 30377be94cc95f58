#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "granularity/dataset.hpp"
#include "granularity/distance.hpp"

namespace granularity::io {

/// Absolute tolerance for the symmetry check on loaded distance matrices.
inline constexpr double kDistanceSymmetryTolerance = 1e-6;

/// Reads a feature matrix: binary "GRNF" (u32 version 1, u64 n, u64 d, n*d
/// little-endian float32, row-major) or CSV with an optional header row.
FeatureMatrix read_features(const std::filesystem::path& path);
/// Writes the binary feature format (values rounded to float32).
void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& features);
void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& features);

/// Reads raw integer labels: one per line, or CSV rows (row_index, label).
std::vector<std::int64_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, std::span<const std::int64_t> labels);

/// Reads a distance matrix: binary "GRND" (u32 version 1, u64 n, n*n float32)
/// or CSV. Symmetry is checked to kDistanceSymmetryTolerance, then averaged.
DistanceMatrix read_distances(const std::filesystem::path& path);
void write_distances_binary(const std::filesystem::path& path, const DistanceMatrix& d);
void write_distances_csv(const std::filesystem::path& path, const DistanceMatrix& d);

/// True when the file starts with the given 4-byte magic.
bool has_magic(const std::filesystem::path& path, const char (&magic)[5]);

/// Feature file + label file -> validated dataset.
LabeledDataset load_dataset(const std::filesystem::path& features_path,
                            const std::filesystem::path& labels_path);
/// Validates a config against the dataset (zero-norm rows under cosine or
/// normalize=true). Throws ValidationError.
void validate_config(const LabeledDataset& dataset, const DistanceConfig& config);
LabeledDataset load_dataset(const std::filesystem::path& features_path,
                            const std::filesystem::path& labels_path,
                            const DistanceConfig& config);

}  // namespace granularity::io
