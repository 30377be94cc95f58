#include "granularity/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "granularity/measures.hpp"
#include "granularity/parallel.hpp"

namespace granularity {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::granularity_consistent:
      return "granularity_consistent";
    case TransformKind::isomorphic:
      return "isomorphic";
    case TransformKind::scale:
      return "scale";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view name) {
  for (auto kind : {TransformKind::granularity_consistent, TransformKind::isomorphic,
                    TransformKind::scale}) {
    if (name == to_string(kind)) return kind;
  }
  throw ValidationError("unknown transform '" + std::string(name) + "'");
}

void validate(const TransformSpec& spec) {
  if (!(spec.strength > 0.0 && spec.strength < 1.0)) {
    throw ValidationError("transform strength must lie in (0, 1)");
  }
  if (spec.alpha && !(*spec.alpha > 0.0 && std::isfinite(*spec.alpha))) {
    throw ValidationError("scale alpha must be finite and > 0");
  }
}

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
  // splitmix64 finalizer over the combined state.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DistanceMatrix apply_granularity_consistent(const DistanceMatrix& d, const ClassIndex& index,
                                            std::uint64_t seed, double strength) {
  if (!(strength > 0.0 && strength < 1.0)) {
    throw ValidationError("transform strength must lie in (0, 1)");
  }
  if (index.n() != d.size()) throw ValidationError("labels do not match distance matrix");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DistanceMatrixBuilder out(d.size());
  for (Index i = 0; i < d.size(); ++i) {
    for (Index j = i + 1; j < d.size(); ++j) {
      const double u = unit(rng);
      const double factor = index.label(i) == index.label(j) ? 1.0 - strength * u
                                                              : 1.0 + strength * u;
      out.set(i, j, d(i, j) * factor);
    }
  }
  return std::move(out).build();
}

std::vector<int> random_permutation(Index k, std::uint64_t seed) {
  std::vector<int> sigma(static_cast<std::size_t>(k));
  std::iota(sigma.begin(), sigma.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(sigma.begin(), sigma.end(), rng);
  return sigma;
}

std::vector<int> apply_permutation(std::span<const int> labels, std::span<const int> sigma) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(sigma[static_cast<std::size_t>(l)]);
  return out;
}

std::vector<int> apply_isomorphic(std::span<const int> labels, std::uint64_t seed) {
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  return apply_permutation(labels, random_permutation(k, seed));
}

MeasureFunction measure_function(Measure m) {
  return [m](const DistanceMatrix& d, const ClassIndex& index) {
    return evaluate(m, d, index).score;
  };
}

namespace {

struct TrialOutcome {
  bool violated = false;
  double magnitude = 0.0;
};

TrialOutcome compare_monotone(const Score& before, const Score& after) {
  if (after.infinite) return {};
  if (before.infinite) return {true, std::numeric_limits<double>::infinity()};
  const double drop = before.value - after.value;
  if (drop > kMonotonicitySlack) return {true, drop};
  return {};
}

TrialOutcome compare_equal(const Score& before, const Score& after) {
  if (before.infinite || after.infinite) {
    if (before.infinite == after.infinite) return {};
    return {true, std::numeric_limits<double>::infinity()};
  }
  const double diff = std::abs(after.value - before.value);
  const double scale = std::max(std::abs(before.value), std::abs(after.value));
  if (diff <= kEqualityTolerance * scale) return {};
  return {true, scale > 0.0 ? diff / scale : diff};
}

}  // namespace

std::vector<AxiomReport> check_axioms(const DistanceMatrix& d, const ClassIndex& index,
                                      const MeasureFunction& measure,
                                      std::span<const TransformSpec> specs,
                                      std::int64_t trials) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  for (const auto& spec : specs) validate(spec);
  const Score baseline = measure(d, index);

  std::vector<AxiomReport> reports;
  for (const auto& spec : specs) {
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
    // Measure errors cannot cross the parallel region; collect and rethrow.
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](std::int64_t t) {
      try {
        const std::uint64_t seed = trial_seed(spec.seed, t);
        TrialOutcome& slot = outcomes[static_cast<std::size_t>(t)];
        switch (spec.kind) {
          case TransformKind::granularity_consistent: {
            const auto transformed = apply_granularity_consistent(d, index, seed, spec.strength);
            slot = compare_monotone(baseline, measure(transformed, index));
            break;
          }
          case TransformKind::isomorphic: {
            const ClassIndex relabeled(apply_isomorphic(index.labels(), seed));
            slot = compare_equal(baseline, measure(d, relabeled));
            break;
          }
          case TransformKind::scale: {
            double alpha = 0.0;
            if (spec.alpha) {
              alpha = *spec.alpha;
            } else {
              std::mt19937_64 rng(seed);
              alpha = std::pow(10.0, std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
            }
            slot = compare_equal(baseline, measure(d.scaled(alpha), index));
            break;
          }
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    AxiomReport report;
    report.kind = spec.kind;
    report.trials = trials;
    for (const auto& o : outcomes) {
      if (!o.violated) continue;
      ++report.violations;
      report.max_violation_magnitude = std::max(report.max_violation_magnitude, o.magnitude);
    }
    reports.push_back(report);
  }
  return reports;
}

std::vector<AxiomReport> check_axioms(const DistanceMatrix& d, const ClassIndex& index,
                                      Measure measure, std::span<const TransformSpec> specs,
                                      std::int64_t trials) {
  auto reports = check_axioms(d, index, measure_function(measure), specs, trials);
  for (auto& r : reports) {
    r.measure = measure;
    r.measure_name = std::string(to_string(measure));
  }
  return reports;
}

}  // namespace granularity
