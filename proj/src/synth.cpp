#include "granularity/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>

#include "granularity/axioms.hpp"
#include "granularity/measures.hpp"
#include "granularity/parallel.hpp"

namespace granularity::synth {
namespace {

constexpr int kPlacementAttempts = 10'000;

double population_stddev(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double mean_of(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

Eigen::VectorXd random_unit_vector(Index dims, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dims);
  do {
    for (Index c = 0; c < dims; ++c) v(c) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

/// Rejection-samples `count` centers in [0, 10 * separation]^dims with
/// pairwise distance >= separation.
std::vector<Eigen::VectorXd> place_centers(Index count, Index dims, double separation,
                                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(0.0, 10.0 * separation);
  std::vector<Eigen::VectorXd> centers;
  for (Index c = 0; c < count; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Eigen::VectorXd candidate(dims);
      for (Index j = 0; j < dims; ++j) candidate(j) = coord(rng);
      placed = std::all_of(centers.begin(), centers.end(), [&](const Eigen::VectorXd& other) {
        return (other - candidate).norm() >= separation;
      });
      if (placed) centers.push_back(std::move(candidate));
    }
    if (!placed) throw ComputeError("separation infeasible");
  }
  return centers;
}

/// Collects exceptions thrown inside a parallel loop and rethrows the first.
class ErrorSlots {
 public:
  explicit ErrorSlots(std::int64_t count) : errors_(static_cast<std::size_t>(count)) {}
  template <typename F>
  void run(std::int64_t i, F&& f) {
    try {
      f();
    } catch (...) {
      errors_[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  void rethrow() const {
    for (const auto& e : errors_) {
      if (e) std::rethrow_exception(e);
    }
  }

 private:
  std::vector<std::exception_ptr> errors_;
};

constexpr DistanceConfig kRawEuclidean{Metric::euclidean, false};

}  // namespace

void validate(const GaussianPairConfig& config) {
  if (!(config.separation >= 0.0) || !std::isfinite(config.separation)) {
    throw ValidationError("separation must be finite and >= 0");
  }
  if (config.samples_per_class < 2) throw ValidationError("samples_per_class must be >= 2");
  if (config.repeats < 1) throw ValidationError("repeats must be >= 1");
}

LabeledDataset generate_gaussian_pair(const GaussianPairConfig& config) {
  validate(config);
  const Index per_class = config.samples_per_class;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  FeatureMatrix features(2 * per_class, 2);
  std::vector<std::int64_t> labels(static_cast<std::size_t>(2 * per_class));
  for (Index i = 0; i < 2 * per_class; ++i) {
    features(i, 0) = normal(rng);
    features(i, 1) = normal(rng);
    const bool second = i >= per_class;
    if (second) features(i, 0) += config.separation;
    labels[static_cast<std::size_t>(i)] = second ? 1 : 0;
  }
  return make_dataset(features, labels);
}

std::vector<double> SweepReport::means(Measure m) const {
  std::vector<double> out;
  for (const auto& point : points) {
    for (const auto& stat : point.stats) {
      if (stat.measure == m) out.push_back(stat.mean);
    }
  }
  return out;
}

bool SweepReport::strictly_increasing(Measure m) const {
  const auto curve = means(m);
  for (std::size_t t = 1; t < curve.size(); ++t) {
    if (!(curve[t] > curve[t - 1])) return false;
  }
  return !curve.empty();
}

SweepReport separation_sweep(std::span<const double> separations,
                             const GaussianPairConfig& config,
                             std::span<const Measure> measures) {
  if (separations.empty()) throw ValidationError("separation grid is empty");
  for (std::size_t t = 1; t < separations.size(); ++t) {
    if (!(separations[t] > separations[t - 1])) {
      throw ValidationError("separation grid must be strictly ascending");
    }
  }
  validate(config);
  const auto points = static_cast<std::int64_t>(separations.size());
  const std::int64_t repeats = config.repeats;
  const auto measure_count = measures.size();

  // values[(point * repeats + repeat) * measure_count + m]
  std::vector<Score> values(static_cast<std::size_t>(points * repeats) * measure_count);
  ErrorSlots errors(points * repeats);
  parallel_for(points * repeats, [&](std::int64_t task) {
    errors.run(task, [&] {
      GaussianPairConfig local = config;
      local.separation = separations[static_cast<std::size_t>(task / repeats)];
      local.seed = trial_seed(config.seed, task % repeats);
      const LabeledDataset data = generate_gaussian_pair(local);
      const DistanceMatrix d = compute_distance_matrix(data, kRawEuclidean);
      const ClassIndex index = data.class_index();
      for (std::size_t m = 0; m < measure_count; ++m) {
        values[static_cast<std::size_t>(task) * measure_count + m] =
            evaluate(measures[m], d, index).score;
      }
    });
  });
  errors.rethrow();

  SweepReport report;
  report.parameter_name = "m";
  for (std::int64_t p = 0; p < points; ++p) {
    SweepPoint point;
    point.parameter = separations[static_cast<std::size_t>(p)];
    for (std::size_t m = 0; m < measure_count; ++m) {
      SweepStat stat;
      stat.measure = measures[m];
      for (std::int64_t r = 0; r < repeats; ++r) {
        const Score s =
            values[static_cast<std::size_t>(p * repeats + r) * measure_count + m];
        stat.values.push_back(s.as_double());
        if (s.infinite) ++stat.infinite_count;
      }
      stat.mean = mean_of(stat.values);
      stat.stddev = stat.infinite_count ? std::numeric_limits<double>::quiet_NaN()
                                        : population_stddev(stat.values, stat.mean);
      point.stats.push_back(std::move(stat));
    }
    report.points.push_back(std::move(point));
  }
  return report;
}

std::vector<double> parse_range(const std::string& text) {
  std::stringstream stream(text);
  std::string part;
  std::vector<double> parts;
  while (std::getline(stream, part, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("malformed range '" + text + "'");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw ValidationError("range must be start:stop:step with step > 0, got '" + text + "'");
  }
  std::vector<double> out;
  const auto steps = static_cast<std::int64_t>(std::floor((parts[1] - parts[0]) / parts[2] + 0.5));
  for (std::int64_t t = 0; t <= steps; ++t) {
    out.push_back(parts[0] + static_cast<double>(t) * parts[2]);
  }
  return out;
}

void validate(const HierarchyConfig& config) {
  if (config.n_super < 1 || config.subs_per_super < 1 || config.samples_per_sub < 1 ||
      config.dims < 1) {
    throw ValidationError("hierarchy counts must be >= 1");
  }
  if (!(config.super_separation > 2.0 * config.sub_radius)) {
    throw ValidationError("super_separation must exceed 2 * sub_radius");
  }
  if (!(config.noise_sigma >= 0.0) || !(config.sub_radius >= 0.0)) {
    throw ValidationError("noise_sigma and sub_radius must be >= 0");
  }
}

HierarchicalDataset generate_hierarchy(const HierarchyConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);
  const auto supers = place_centers(config.n_super, config.dims, config.super_separation, rng);
  std::normal_distribution<double> normal;

  HierarchicalDataset out;
  out.n_super = config.n_super;
  out.n_fine = config.n_super * config.subs_per_super;
  const Index n = out.n_fine * config.samples_per_sub;
  out.features.resize(n, config.dims);
  Index row = 0;
  for (Index s = 0; s < config.n_super; ++s) {
    for (Index f = 0; f < config.subs_per_super; ++f) {
      const Eigen::VectorXd center =
          supers[static_cast<std::size_t>(s)] + config.sub_radius * random_unit_vector(config.dims, rng);
      const int fine_id = static_cast<int>(s * config.subs_per_super + f);
      out.parent.push_back(static_cast<int>(s));
      for (Index t = 0; t < config.samples_per_sub; ++t, ++row) {
        for (Index c = 0; c < config.dims; ++c) {
          out.features(row, c) = center(c) + config.noise_sigma * normal(rng);
        }
        out.coarse.push_back(static_cast<int>(s));
        out.fine.push_back(fine_id);
      }
    }
  }
  return out;
}

std::vector<int> partial_relabel(const HierarchicalDataset& h, std::span<const int> split) {
  std::vector<unsigned char> is_split(static_cast<std::size_t>(h.n_super), 0);
  for (int s : split) is_split[static_cast<std::size_t>(s)] = 1;
  // Dense ids: unsplit superclasses in id order, then fine classes of split
  // superclasses in fine-id order.
  std::vector<int> coarse_id(static_cast<std::size_t>(h.n_super), -1);
  int next = 0;
  for (Index s = 0; s < h.n_super; ++s) {
    if (!is_split[static_cast<std::size_t>(s)]) coarse_id[static_cast<std::size_t>(s)] = next++;
  }
  std::vector<int> fine_id(static_cast<std::size_t>(h.n_fine), -1);
  for (Index f = 0; f < h.n_fine; ++f) {
    if (is_split[static_cast<std::size_t>(h.parent[static_cast<std::size_t>(f)])]) {
      fine_id[static_cast<std::size_t>(f)] = next++;
    }
  }
  std::vector<int> labels(h.coarse.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int s = h.coarse[i];
    labels[i] = is_split[static_cast<std::size_t>(s)] ? fine_id[static_cast<std::size_t>(h.fine[i])]
                                                      : coarse_id[static_cast<std::size_t>(s)];
  }
  return labels;
}

double RelabelTrace::mean_stddev() const { return mean_of(stddev); }

bool RelabelReport::passed() const {
  return std::all_of(measures.begin(), measures.end(),
                     [](const RelabelTrace& t) { return t.passed(); });
}

RelabelReport relabel_monotonicity(const HierarchicalDataset& h,
                                   std::span<const Measure> measures, Index shuffles,
                                   std::uint64_t seed) {
  if (shuffles < 1) throw ValidationError("shuffles must be >= 1");
  const DistanceMatrix d = compute_distance_matrix(h.features, kRawEuclidean);
  const bool needs_order = std::find(measures.begin(), measures.end(), Measure::rank) != measures.end();
  const std::optional<NeighborOrder> order =
      needs_order ? std::optional<NeighborOrder>(NeighborOrder(d)) : std::nullopt;

  const Index steps = h.n_super + 1;
  const auto measure_count = measures.size();
  // values[(shuffle * steps + step) * measure_count + m]
  std::vector<Score> values(static_cast<std::size_t>(shuffles * steps) * measure_count);
  ErrorSlots errors(shuffles);
  parallel_for(shuffles, [&](std::int64_t s) {
    errors.run(s, [&] {
      const auto sigma = random_permutation(h.n_super, trial_seed(seed, s));
      for (Index t = 0; t < steps; ++t) {
        const ClassIndex index(partial_relabel(h, std::span<const int>(sigma).first(t)));
        for (std::size_t m = 0; m < measure_count; ++m) {
          const auto slot = static_cast<std::size_t>(s * steps + t) * measure_count + m;
          values[slot] = measures[m] == Measure::rank ? rank(*order, index).score
                                                      : evaluate(measures[m], d, index).score;
        }
      }
    });
  });
  errors.rethrow();

  RelabelReport report;
  for (std::size_t m = 0; m < measure_count; ++m) {
    RelabelTrace trace;
    trace.measure = measures[m];
    trace.exempt = measures[m] == Measure::fisher;
    for (Index s = 0; s < shuffles; ++s) {
      std::vector<double> row;
      bool monotone = true;
      for (Index t = 0; t < steps; ++t) {
        const Score v = values[static_cast<std::size_t>(s * steps + t) * measure_count + m];
        if (t > 0) {
          const Score prev = values[static_cast<std::size_t>(s * steps + t - 1) * measure_count + m];
          const bool increased =
              v.infinite ? !prev.infinite : (!prev.infinite && v.value > prev.value + kMonotonicitySlack);
          if (increased) monotone = false;
        }
        row.push_back(v.as_double());
      }
      if (!monotone) ++trace.violating_shuffles;
      trace.traces.push_back(std::move(row));
    }
    trace.monotone = trace.violating_shuffles == 0;
    for (Index t = 0; t < steps; ++t) {
      std::vector<double> column;
      for (const auto& row : trace.traces) column.push_back(row[static_cast<std::size_t>(t)]);
      const double mean = mean_of(column);
      trace.mean.push_back(mean);
      trace.stddev.push_back(population_stddev(column, mean));
    }
    report.measures.push_back(std::move(trace));
  }
  return report;
}

LabeledDataset generate_planted(const PlantedConfig& config) {
  if (config.groups < 1 || config.classes_per_group < 1 || config.samples_per_class < 1 ||
      config.dims < 1 || config.groups * config.classes_per_group < 2) {
    throw ValidationError("planted corpus counts must be >= 1 with at least 2 classes");
  }
  if (!(config.group_spread >= 0.0) || !(config.class_radius >= 0.0) ||
      !(config.noise_sigma >= 0.0)) {
    throw ValidationError("planted corpus spreads must be >= 0");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> groups(static_cast<std::size_t>(config.groups));
  for (auto& g : groups) {
    g.resize(config.dims);
    for (Index j = 0; j < config.dims; ++j) g(j) = config.group_spread * normal(rng);
  }
  const Index k = config.groups * config.classes_per_group;
  FeatureMatrix features(k * config.samples_per_class, config.dims);
  std::vector<std::int64_t> labels;
  Index row = 0;
  for (Index c = 0; c < k; ++c) {
    const Eigen::VectorXd center = groups[static_cast<std::size_t>(c / config.classes_per_group)] +
                                   config.class_radius * random_unit_vector(config.dims, rng);
    for (Index t = 0; t < config.samples_per_class; ++t, ++row) {
      for (Index j = 0; j < config.dims; ++j) {
        features(row, j) = center(j) + config.noise_sigma * normal(rng);
      }
      labels.push_back(c);
    }
  }
  return make_dataset(features, labels);
}

std::vector<CorpusInstance> axiom_corpus(std::uint64_t seed) {
  struct Shape {
    const char* name;
    Index k;
    Index n;
    Index dims;
    double spread;
    bool uniform_labels;
  };
  const Shape shapes[] = {
      {"blobs-k2-tight", 2, 60, 2, 4.0, false},   {"blobs-k2-overlap", 2, 120, 2, 0.5, false},
      {"blobs-k3-d5", 3, 90, 5, 1.5, false},      {"blobs-k5-d16", 5, 150, 16, 1.0, false},
      {"blobs-k8-d3", 8, 200, 3, 2.0, false},     {"blobs-k10-d8", 10, 200, 8, 0.8, false},
      {"uneven-k4-d2", 4, 70, 2, 1.2, false},     {"noise-k3-d4", 3, 100, 4, 0.0, true},
      {"noise-k6-d2", 6, 180, 2, 0.0, true},      {"blobs-k7-d32", 7, 140, 32, 0.3, false},
  };
  std::vector<CorpusInstance> corpus;
  std::int64_t ordinal = 0;
  for (const auto& shape : shapes) {
    std::mt19937_64 rng(trial_seed(seed, ordinal++));
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXd> centers;
    for (Index c = 0; c < shape.k; ++c) {
      Eigen::VectorXd center(shape.dims);
      for (Index j = 0; j < shape.dims; ++j) center(j) = shape.spread * normal(rng);
      centers.push_back(center);
    }
    // Every class gets 2 samples; the rest are assigned at random, which
    // yields uneven class sizes.
    std::vector<std::int64_t> labels;
    for (Index c = 0; c < shape.k; ++c) labels.insert(labels.end(), 2, c);
    std::uniform_int_distribution<Index> pick(0, shape.k - 1);
    while (static_cast<Index>(labels.size()) < shape.n) labels.push_back(pick(rng));
    std::shuffle(labels.begin(), labels.end(), rng);

    FeatureMatrix features(shape.n, shape.dims);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (Index i = 0; i < shape.n; ++i) {
      const auto& center = centers[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      for (Index j = 0; j < shape.dims; ++j) {
        features(i, j) = shape.uniform_labels ? uniform(rng) : center(j) + normal(rng);
      }
    }
    corpus.push_back({shape.name, make_dataset(features, labels)});
  }
  return corpus;
}

}  // namespace granularity::synth
