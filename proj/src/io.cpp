#include "granularity/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

namespace granularity::io {
namespace {

constexpr std::uint32_t kFormatVersion = 1;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
T read_le(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError("truncated binary file '" + path.string() + "'");
  return byteswap_if_big(v);
}

template <typename T>
void write_le(std::ostream& out, T v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::vector<float> read_floats(std::istream& in, std::uint64_t count,
                               const std::filesystem::path& path) {
  std::vector<float> values(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw ValidationError("truncated binary file '" + path.string() + "'");
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) v = byteswap_if_big(v);
  }
  in.peek();
  if (!in.eof()) throw ValidationError("trailing bytes in '" + path.string() + "'");
  return values;
}

void expect_header(std::istream& in, const char (&magic)[5],
                   const std::filesystem::path& path) {
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0) {
    throw ValidationError("bad magic in '" + path.string() + "'");
  }
  const auto version = read_le<std::uint32_t>(in, path);
  if (version != kFormatVersion) {
    throw ValidationError("unsupported format version " + std::to_string(version) +
                          " in '" + path.string() + "'");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  // strtod accepts nan/inf spellings, which must reach the finiteness check.
  std::string buffer(cell);
  char* end = nullptr;
  out = std::strtod(buffer.c_str(), &end);
  return end == buffer.c_str() + buffer.size();
}

bool parse_int(std::string_view cell, std::int64_t& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

/// Numeric CSV table; a first row that fails to parse is treated as a header.
Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<std::vector<double>> rows;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto cells = split_commas(lines[l]);
    std::vector<double> row;
    bool numeric = true;
    for (auto cell : cells) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (l == 0) continue;
      throw ValidationError("non-numeric value on line " + std::to_string(l + 1) + " of '" +
                            path.string() + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("ragged row on line " + std::to_string(l + 1) + " of '" +
                            path.string() + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("no data rows in '" + path.string() + "'");
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const auto& matrix) {
  auto out = open_output(path);
  char buffer[64];
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j) out << ',';
      const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), matrix(i, j));
      out.write(buffer, ptr - buffer);
    }
    out << '\n';
  }
}

}  // namespace

bool has_magic(const std::filesystem::path& path, const char (&magic)[5]) {
  auto in = open_input(path);
  char got[4] = {};
  in.read(got, 4);
  return in.gcount() == 4 && std::memcmp(got, magic, 4) == 0;
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  if (!has_magic(path, "GRNF")) return read_numeric_csv(path);
  auto in = open_input(path);
  expect_header(in, "GRNF", path);
  const auto n = read_le<std::uint64_t>(in, path);
  const auto d = read_le<std::uint64_t>(in, path);
  const auto values = read_floats(in, n * d, path);
  FeatureMatrix out(static_cast<Index>(n), static_cast<Index>(d));
  for (std::uint64_t i = 0; i < n * d; ++i) {
    out.data()[i] = static_cast<double>(values[static_cast<std::size_t>(i)]);
  }
  return out;
}

void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& features) {
  auto out = open_output(path);
  out.write("GRNF", 4);
  write_le<std::uint32_t>(out, kFormatVersion);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(features.rows()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(features.cols()));
  for (Index i = 0; i < features.size(); ++i) {
    write_le<float>(out, static_cast<float>(features.data()[i]));
  }
}

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& features) {
  write_csv(path, features);
}

std::vector<std::int64_t> read_labels(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  const bool csv = std::any_of(lines.begin(), lines.end(), [](const std::string& l) {
    return l.find(',') != std::string::npos;
  });
  std::vector<std::int64_t> labels;
  if (!csv) {
    for (std::size_t l = 0; l < lines.size(); ++l) {
      std::int64_t v = 0;
      if (!parse_int(trim(lines[l]), v)) {
        throw ValidationError("malformed label on line " + std::to_string(l + 1) + " of '" +
                              path.string() + "'");
      }
      labels.push_back(v);
    }
    if (labels.empty()) throw ValidationError("no labels in '" + path.string() + "'");
    return labels;
  }

  std::vector<std::pair<std::int64_t, std::int64_t>> rows;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto cells = split_commas(lines[l]);
    std::int64_t row = 0;
    std::int64_t label = 0;
    if (cells.size() != 2 || !parse_int(cells[0], row) || !parse_int(cells[1], label)) {
      if (l == 0) continue;
      throw ValidationError("malformed label row on line " + std::to_string(l + 1) + " of '" +
                            path.string() + "'");
    }
    rows.emplace_back(row, label);
  }
  labels.assign(rows.size(), 0);
  std::vector<unsigned char> seen(rows.size(), 0);
  for (const auto& [row, label] : rows) {
    if (row < 0 || static_cast<std::size_t>(row) >= rows.size() ||
        seen[static_cast<std::size_t>(row)]) {
      throw ValidationError("label rows must index 0..n-1 exactly once in '" + path.string() +
                            "'");
    }
    seen[static_cast<std::size_t>(row)] = 1;
    labels[static_cast<std::size_t>(row)] = label;
  }
  if (labels.empty()) throw ValidationError("no labels in '" + path.string() + "'");
  return labels;
}

void write_labels(const std::filesystem::path& path, std::span<const std::int64_t> labels) {
  auto out = open_output(path);
  for (std::int64_t l : labels) out << l << '\n';
}

DistanceMatrix read_distances(const std::filesystem::path& path) {
  Eigen::MatrixXd values;
  if (has_magic(path, "GRND")) {
    auto in = open_input(path);
    expect_header(in, "GRND", path);
    const auto n = read_le<std::uint64_t>(in, path);
    const auto raw = read_floats(in, n * n, path);
    values.resize(static_cast<Index>(n), static_cast<Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
      for (std::uint64_t j = 0; j < n; ++j) {
        values(static_cast<Index>(i), static_cast<Index>(j)) = raw[i * n + j];
      }
    }
  } else {
    values = read_numeric_csv(path);
  }
  if ((values.array() < 0.0).any()) {
    throw ValidationError("negative distance in '" + path.string() + "'");
  }
  return DistanceMatrix::symmetrized(std::move(values), kDistanceSymmetryTolerance);
}

void write_distances_binary(const std::filesystem::path& path, const DistanceMatrix& d) {
  auto out = open_output(path);
  out.write("GRND", 4);
  write_le<std::uint32_t>(out, kFormatVersion);
  const Index n = d.size();
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) write_le<float>(out, static_cast<float>(d(i, j)));
  }
}

void write_distances_csv(const std::filesystem::path& path, const DistanceMatrix& d) {
  write_csv(path, d.values());
}

LabeledDataset load_dataset(const std::filesystem::path& features_path,
                            const std::filesystem::path& labels_path) {
  const FeatureMatrix features = read_features(features_path);
  const auto labels = read_labels(labels_path);
  return make_dataset(features, labels);
}

void validate_config(const LabeledDataset& dataset, const DistanceConfig& config) {
  if (config.metric != Metric::cosine && !config.normalize) return;
  for (Index i = 0; i < dataset.features.rows(); ++i) {
    if (dataset.features.row(i).squaredNorm() == 0.0) {
      throw ValidationError("feature row " + std::to_string(i) +
                            " has zero norm; cannot normalize");
    }
  }
}

LabeledDataset load_dataset(const std::filesystem::path& features_path,
                            const std::filesystem::path& labels_path,
                            const DistanceConfig& config) {
  LabeledDataset dataset = load_dataset(features_path, labels_path);
  validate_config(dataset, config);
  return dataset;
}

}  // namespace granularity::io
