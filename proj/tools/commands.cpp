#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "granularity/axioms.hpp"
#include "granularity/io.hpp"
#include "granularity/measures.hpp"
#include "granularity/parallel.hpp"
#include "granularity/report.hpp"
#include "granularity/synth.hpp"
#include "granularity/taster.hpp"

namespace granularity::cli {
namespace {

namespace fs = std::filesystem;
using report::json;

/// Materializing the full matrix pays off for O(n^2) measures up to this n.
constexpr Index kMaterializeLimit = 20'000;

struct DatasetOptions {
  std::string features;
  std::string labels;
  std::string distances;
  std::string metric = "euclidean";
  bool no_normalize = false;

  DistanceConfig config() const { return {parse_metric(metric), !no_normalize}; }
};

void add_dataset_options(CLI::App& cmd, DatasetOptions& o, bool required) {
  auto* features = cmd.add_option("--features", o.features, "feature file (GRNF binary or CSV)");
  auto* distances =
      cmd.add_option("--distances", o.distances, "distance matrix (GRND binary or CSV)");
  features->excludes(distances);
  auto* labels = cmd.add_option("--labels", o.labels, "label file (one id per line or CSV)");
  if (required) labels->required();
  cmd.add_option("--metric", o.metric, "euclidean or cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  cmd.add_flag("--no-normalize", o.no_normalize,
               "use raw rows instead of unit-normalized rows for euclidean distance");
}

/// Either lazily evaluated features or a materialized matrix.
struct LoadedData {
  LabeledDataset dataset;
  std::optional<DistanceConfig> config;
  std::optional<FeatureDistance> lazy;
  std::optional<DistanceMatrix> matrix;

  template <typename F>
  decltype(auto) visit(F&& f) const {
    if (matrix) return f(*matrix);
    return f(*lazy);
  }
  void materialize_if_small() {
    if (!matrix && lazy && lazy->size() <= kMaterializeLimit) {
      matrix = granularity::materialize(*lazy);
    }
  }
};

LoadedData load(const DatasetOptions& o, std::ostream& err) {
  if (o.features.empty() == o.distances.empty()) {
    throw ValidationError("exactly one of --features or --distances is required");
  }
  LoadedData data;
  const auto raw_labels = io::read_labels(o.labels);
  if (!o.distances.empty()) {
    data.dataset = make_label_only_dataset(raw_labels);
    data.matrix = io::read_distances(o.distances);
    if (data.matrix->size() != data.dataset.n()) {
      throw ValidationError("row-count mismatch: distance matrix has " +
                            std::to_string(data.matrix->size()) + " rows vs " +
                            std::to_string(data.dataset.n()) + " labels");
    }
    return data;
  }
  const DistanceConfig config = o.config();
  data.dataset = make_dataset(io::read_features(o.features), raw_labels);
  io::validate_config(data.dataset, config);
  const auto duplicates =
      count_cross_class_duplicates(data.dataset.features, data.dataset.class_index());
  if (duplicates > 0) {
    err << "warning: " << duplicates
        << " identical feature rows carry different labels (distance 0 across classes)\n";
  }
  data.config = config;
  data.lazy.emplace(data.dataset.features, config);
  return data;
}

/// Writes to the path, or to `out` when the path is empty.
void emit(const std::string& path, std::ostream& out,
          const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  write(file);
}

std::vector<Measure> measures_from(const std::string& list) { return parse_measure_list(list); }

// ---------------------------------------------------------------- measure

struct MeasureArgs {
  DatasetOptions data;
  std::string measures = "rankm";
  std::string output;
  std::optional<std::uint64_t> seed;
  std::uint64_t bhg_budget = 10'000'000;
  bool timing = false;
};

int cmd_measure(const MeasureArgs& a, std::ostream& out, std::ostream& err) {
  const auto measures = measures_from(a.measures);
  LoadedData data = load(a.data, err);
  const ClassIndex index = data.dataset.class_index();
  const bool all_medoid = std::all_of(measures.begin(), measures.end(), uses_medoids);
  if (!all_medoid) data.materialize_if_small();

  MeasureOptions options;
  options.bhg_budget = a.bhg_budget;
  const bool bhg_requested = std::find(measures.begin(), measures.end(), Measure::bhg) != measures.end();
  const double combos = static_cast<double>(index.within_pair_count()) *
                        static_cast<double>(index.total_pair_count() - index.within_pair_count());
  if (bhg_requested && combos > static_cast<double>(options.bhg_exact_limit)) {
    if (!a.seed) throw ValidationError("bhg is sampled on this input; --seed is required");
  }
  options.seed = a.seed.value_or(0);

  // Medoids are shared by every medoid measure.
  std::vector<Index> medoids;
  if (std::any_of(measures.begin(), measures.end(), uses_medoids)) {
    medoids = data.visit([&](const auto& d) { return class_medoids(d, index); });
  }
  json results = json::array();
  for (Measure m : measures) {
    MeasureResult r = data.visit([&](const auto& d) {
      return evaluate(m, d, index, options, medoids);
    });
    r.distance = data.config;
    results.push_back(report::to_json(r, a.timing));
    if (a.timing) err << to_string(m) << ": " << r.runtime_ms << " ms\n";
  }
  emit(a.output, out, [&](std::ostream& s) { s << results.dump(2) << '\n'; });
  return kSuccess;
}

// ---------------------------------------------------------------- pairwise

struct PairwiseArgs {
  DatasetOptions data;
  std::string measure = "rankm";
  std::string output;
};

int cmd_pairwise(const PairwiseArgs& a, std::ostream& out, std::ostream& err) {
  const Measure measure = parse_measure(a.measure);
  LoadedData data = load(a.data, err);
  if (!uses_medoids(measure)) data.materialize_if_small();
  const ClassIndex index = data.dataset.class_index();
  const auto table = data.visit(
      [&](const auto& d) { return pairwise_class_granularity(d, index, measure); });
  emit(a.output, out, [&](std::ostream& s) {
    report::write_table_csv(s, table, data.dataset.original_ids);
  });
  return kSuccess;
}

// ---------------------------------------------------------------- taster

struct TasterArgs {
  DatasetOptions data;
  std::string measure = "rankm";
  std::optional<Index> target_size;
  double seed_fraction = 0.10;
  bool random = false;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
};

int cmd_taster(const TasterArgs& a, std::ostream& out, std::ostream& err) {
  const Measure measure = parse_measure(a.measure);
  if (a.random && !a.seed) throw ValidationError("--random requires --seed");
  LoadedData data = load(a.data, err);
  const ClassIndex index = data.dataset.class_index();
  const Index k = index.k();
  if (!a.target_size && k < 4) {
    throw ValidationError("too few classes for default fractions (k = " + std::to_string(k) + ")");
  }
  const Index target = a.target_size.value_or(default_target_size(k));
  if (!uses_medoids(measure)) data.materialize_if_small();

  const auto table = data.visit(
      [&](const auto& d) { return pairwise_class_granularity(d, index, measure); });
  const SubsetEvaluator evaluate_subset = [&](std::span<const int> classes) {
    return data.visit(
        [&](const auto& d) { return subset_granularity(d, index, classes, measure); });
  };

  fs::create_directories(a.output_dir);
  const fs::path dir(a.output_dir);
  auto write_selection = [&](const TasterSelection& s, const char* name) {
    std::ofstream file(dir / name, std::ios::binary | std::ios::trunc);
    if (!file) throw ValidationError("cannot write '" + (dir / name).string() + "'");
    file << report::to_json(s, data.dataset.original_ids).dump(2) << '\n';
  };
  const auto bitter = extract_bitter(table, target, a.seed_fraction, evaluate_subset);
  const auto sweet = extract_sweet(table, target, evaluate_subset);
  write_selection(bitter, "bitter.json");
  write_selection(sweet, "sweet.json");
  if (a.random) write_selection(extract_random(k, target, *a.seed, evaluate_subset), "random.json");
  {
    std::ofstream file(dir / "pairwise.csv", std::ios::binary | std::ios::trunc);
    if (!file) throw ValidationError("cannot write pairwise.csv");
    report::write_table_csv(file, table, data.dataset.original_ids);
  }
  out << "bitter " << report::score_json(bitter.final_granularity).dump() << " sweet "
      << report::score_json(sweet.final_granularity).dump() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- axioms

struct AxiomArgs {
  DatasetOptions data;
  std::string measures = "all";
  std::string transforms = "granularity_consistent,isomorphic,scale";
  std::int64_t trials = 100;
  std::uint64_t seed = 0;
  double strength = 0.5;
  std::optional<double> alpha;
  std::string output;
};

int cmd_axioms(const AxiomArgs& a, std::ostream& out, std::ostream& err) {
  const auto measures = measures_from(a.measures);
  std::vector<TransformSpec> specs;
  {
    std::stringstream stream(a.transforms);
    std::string item;
    std::uint64_t offset = 0;
    while (std::getline(stream, item, ',')) {
      if (item.empty()) continue;
      specs.push_back({parse_transform_kind(item), trial_seed(a.seed, static_cast<std::int64_t>(offset++)),
                       a.strength, a.alpha});
    }
  }
  if (specs.empty()) throw ValidationError("no transforms selected");

  struct Instance {
    DistanceMatrix d;
    ClassIndex index;
  };
  std::vector<Instance> instances;
  const bool has_input = !a.data.features.empty() || !a.data.distances.empty();
  if (has_input) {
    LoadedData data = load(a.data, err);
    data.materialize_if_small();
    if (!data.matrix) data.matrix = granularity::materialize(*data.lazy);
    instances.push_back({*data.matrix, data.dataset.class_index()});
  } else {
    for (const auto& inst : synth::axiom_corpus()) {
      instances.push_back({compute_distance_matrix(inst.dataset, a.data.config()),
                           inst.dataset.class_index()});
    }
  }

  bool any_violation = false;
  std::string lines;
  for (Measure m : measures) {
    std::vector<AxiomReport> totals;
    for (const auto& inst : instances) {
      const auto reports = check_axioms(inst.d, inst.index, m, specs, a.trials);
      if (totals.empty()) {
        totals = reports;
        continue;
      }
      for (std::size_t t = 0; t < reports.size(); ++t) {
        totals[t].trials += reports[t].trials;
        totals[t].violations += reports[t].violations;
        totals[t].max_violation_magnitude =
            std::max(totals[t].max_violation_magnitude, reports[t].max_violation_magnitude);
      }
    }
    for (const auto& r : totals) {
      if (r.violations > 0) any_violation = true;
      lines += report::to_json(r).dump() + "\n";
    }
  }
  emit(a.output, out, [&](std::ostream& s) { s << lines; });
  if (any_violation) err << "axiom violations found\n";
  return any_violation ? kAssertionFailed : kSuccess;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string m = "0.5:4.0:0.5";
  Index samples_per_class = 1000;
  Index repeats = 10;
  std::string measures = "fisher,rs,rsm,rank,rankm";
  std::uint64_t seed = 0;
  std::string output;
  std::string summary;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  const auto grid = synth::parse_range(a.m);
  synth::GaussianPairConfig config;
  config.samples_per_class = a.samples_per_class;
  config.repeats = a.repeats;
  config.seed = a.seed;
  const auto measures = measures_from(a.measures);
  const auto sweep = synth::separation_sweep(grid, config, measures);
  emit(a.output, out, [&](std::ostream& s) { report::write_sweep_csv(s, sweep); });
  if (!a.summary.empty()) {
    emit(a.summary, out, [&](std::ostream& s) { s << report::sweep_summary(sweep).dump(2) << '\n'; });
  }
  return kSuccess;
}

// ---------------------------------------------------------------- relabel-eval

struct RelabelArgs {
  synth::HierarchyConfig hierarchy;
  std::string measures = "rs,rsm,rank,rankm";
  Index shuffles = 100;
  std::uint64_t seed = 0;
  std::string output;
  std::string traces;
};

int cmd_relabel(RelabelArgs a, std::ostream& out, std::ostream& err) {
  const auto measures = measures_from(a.measures);
  if (std::find(measures.begin(), measures.end(), Measure::fisher) != measures.end()) {
    err << "warning: fisher exempt from monotonicity\n";
  }
  a.hierarchy.seed = a.seed;
  const auto h = synth::generate_hierarchy(a.hierarchy);
  const auto result = synth::relabel_monotonicity(h, measures, a.shuffles, trial_seed(a.seed, 1));
  emit(a.output, out, [&](std::ostream& s) { s << report::relabel_summary(result).dump(2) << '\n'; });
  if (!a.traces.empty()) {
    emit(a.traces, out, [&](std::ostream& s) { report::write_relabel_csv(s, result); });
  }
  for (const auto& t : result.measures) {
    if (!t.passed()) {
      err << to_string(t.measure) << ": monotonicity FAIL in " << t.violating_shuffles
          << " shuffles\n";
    }
  }
  return result.passed() ? kSuccess : kAssertionFailed;
}

// ---------------------------------------------------------------- convert

struct ConvertArgs {
  std::string kind = "features";
  std::string input;
  std::string output;
  std::string to;
};

int cmd_convert(const ConvertArgs& a, std::ostream&, std::ostream&) {
  std::string to = a.to;
  if (to.empty()) {
    const auto ext = fs::path(a.output).extension().string();
    to = (ext == ".csv" || ext == ".txt") ? "csv" : "binary";
  }
  if (a.kind == "features") {
    const auto features = io::read_features(a.input);
    if (!features.allFinite()) throw ValidationError("non-finite feature");
    to == "csv" ? io::write_features_csv(a.output, features)
                : io::write_features_binary(a.output, features);
  } else if (a.kind == "distances") {
    const auto d = io::read_distances(a.input);
    to == "csv" ? io::write_distances_csv(a.output, d) : io::write_distances_binary(a.output, d);
  } else if (a.kind == "labels") {
    io::write_labels(a.output, io::read_labels(a.input));
  } else {
    throw ValidationError("unknown kind '" + a.kind + "'");
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset granularity measures, axiom checks and taster extraction", "granularity"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: all cores)");

  MeasureArgs measure;
  auto* measure_cmd = app.add_subcommand("measure", "evaluate granularity measures");
  add_dataset_options(*measure_cmd, measure.data, true);
  measure_cmd->add_option("--measures", measure.measures, "comma-separated list or 'all'");
  measure_cmd->add_option("--output", measure.output, "JSON output path (default stdout)");
  measure_cmd->add_option("--seed", measure.seed, "seed for sampled BHG");
  measure_cmd->add_option("--bhg-budget", measure.bhg_budget, "BHG Monte Carlo sample count");
  measure_cmd->add_flag("--timing", measure.timing, "record runtime_ms in the output");

  PairwiseArgs pairwise;
  auto* pairwise_cmd = app.add_subcommand("pairwise", "class-pair granularity table (CSV)");
  add_dataset_options(*pairwise_cmd, pairwise.data, true);
  pairwise_cmd->add_option("--measure", pairwise.measure);
  pairwise_cmd->add_option("--output", pairwise.output);

  TasterArgs taster;
  auto* taster_cmd = app.add_subcommand("taster", "extract bitter and sweet class subsets");
  add_dataset_options(*taster_cmd, taster.data, true);
  taster_cmd->add_option("--measure", taster.measure);
  taster_cmd->add_option("--target-size", taster.target_size);
  taster_cmd->add_option("--seed-fraction", taster.seed_fraction);
  taster_cmd->add_flag("--random", taster.random, "also draw a random taster");
  taster_cmd->add_option("--seed", taster.seed);
  taster_cmd->add_option("--output-dir", taster.output_dir);

  AxiomArgs axioms;
  auto* axioms_cmd = app.add_subcommand("axioms", "check granularity axioms by random trials");
  add_dataset_options(*axioms_cmd, axioms.data, false);
  axioms_cmd->add_option("--measures", axioms.measures);
  axioms_cmd->add_option("--transforms", axioms.transforms);
  axioms_cmd->add_option("--trials", axioms.trials);
  axioms_cmd->add_option("--seed", axioms.seed)->required();
  axioms_cmd->add_option("--strength", axioms.strength);
  axioms_cmd->add_option("--alpha", axioms.alpha);
  axioms_cmd->add_option("--output", axioms.output, "JSON lines output path");

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "two-Gaussian separation sweep");
  simulate_cmd->add_option("--m", simulate.m, "start:stop:step");
  simulate_cmd->add_option("--samples-per-class", simulate.samples_per_class);
  simulate_cmd->add_option("--repeats", simulate.repeats);
  simulate_cmd->add_option("--measures", simulate.measures);
  simulate_cmd->add_option("--seed", simulate.seed)->required();
  simulate_cmd->add_option("--output", simulate.output, "long-format CSV path");
  simulate_cmd->add_option("--summary", simulate.summary, "JSON summary path");

  RelabelArgs relabel;
  auto* relabel_cmd = app.add_subcommand("relabel-eval", "coarse-to-fine relabeling monotonicity");
  relabel_cmd->add_option("--n-super", relabel.hierarchy.n_super);
  relabel_cmd->add_option("--subs-per-super", relabel.hierarchy.subs_per_super);
  relabel_cmd->add_option("--samples-per-sub", relabel.hierarchy.samples_per_sub);
  relabel_cmd->add_option("--dims", relabel.hierarchy.dims);
  relabel_cmd->add_option("--super-separation", relabel.hierarchy.super_separation);
  relabel_cmd->add_option("--sub-radius", relabel.hierarchy.sub_radius);
  relabel_cmd->add_option("--noise-sigma", relabel.hierarchy.noise_sigma);
  relabel_cmd->add_option("--measure,--measures", relabel.measures);
  relabel_cmd->add_option("--shuffles", relabel.shuffles);
  relabel_cmd->add_option("--seed", relabel.seed)->required();
  relabel_cmd->add_option("--output", relabel.output, "JSON summary path");
  relabel_cmd->add_option("--traces", relabel.traces, "long-format CSV path");

  ConvertArgs convert;
  auto* convert_cmd = app.add_subcommand("convert", "convert between CSV and binary formats");
  convert_cmd->add_option("--kind", convert.kind)
      ->check(CLI::IsMember({"features", "distances", "labels"}));
  convert_cmd->add_option("--input", convert.input)->required();
  convert_cmd->add_option("--output", convert.output)->required();
  convert_cmd->add_option("--to", convert.to)->check(CLI::IsMember({"csv", "binary"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream message;
    const int code = app.exit(e, message, message);
    (code == 0 ? out : err) << message.str();
    return code == 0 ? kSuccess : kValidationError;
  }

  try {
    set_thread_count(threads);
    if (*measure_cmd) return cmd_measure(measure, out, err);
    if (*pairwise_cmd) return cmd_pairwise(pairwise, out, err);
    if (*taster_cmd) return cmd_taster(taster, out, err);
    if (*axioms_cmd) return cmd_axioms(axioms, out, err);
    if (*simulate_cmd) return cmd_simulate(simulate, out, err);
    if (*relabel_cmd) return cmd_relabel(relabel, out, err);
    if (*convert_cmd) return cmd_convert(convert, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const ComputeError& e) {
    err << "error: " << e.what() << '\n';
    return kComputeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputeError;
  }
  return kValidationError;
}

}  // namespace granularity::cli
