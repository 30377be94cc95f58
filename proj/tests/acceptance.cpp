// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance              run every criterion
//   acceptance --criterion N run criterion N only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "granularity/axioms.hpp"
#include "granularity/io.hpp"
#include "granularity/measures.hpp"
#include "granularity/synth.hpp"
#include "granularity/taster.hpp"
#include "oracles.hpp"

using namespace granularity;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

DistanceMatrix line_matrix(const std::vector<double>& points) {
  return oracle::to_matrix(oracle::line(points));
}

// ---------------------------------------------------------------- 1

Outcome axiom_suite() {
  const auto start = Clock::now();
  const std::uint64_t seed = 20190601;
  std::vector<TransformSpec> specs = {
      {TransformKind::granularity_consistent, trial_seed(seed, 0), 0.5, std::nullopt},
      {TransformKind::isomorphic, trial_seed(seed, 1), 0.5, std::nullopt},
      {TransformKind::scale, trial_seed(seed, 2), 0.5, std::nullopt},
  };
  std::vector<std::pair<DistanceMatrix, ClassIndex>> corpus;
  for (const auto& inst : synth::axiom_corpus()) {
    corpus.emplace_back(compute_distance_matrix(inst.dataset, {}), inst.dataset.class_index());
  }
  std::int64_t total = 0;
  std::string failing;
  for (Measure m : kAllMeasures) {
    std::int64_t per_measure = 0;
    for (const auto& [d, index] : corpus) {
      for (const auto& r : check_axioms(d, index, m, specs, 100)) per_measure += r.violations;
    }
    total += per_measure;
    if (per_measure > 0) {
      failing += std::string(failing.empty() ? "" : ", ") + std::string(to_string(m)) + " " +
                 std::to_string(per_measure);
    }
  }
  const double elapsed = seconds_since(start);
  Outcome out{total == 0 && elapsed < 120.0, ""};
  out.detail = "7 measures x 3 transforms x 100 trials x " + std::to_string(corpus.size()) +
               " instances, violations: " + (failing.empty() ? "none" : failing) + ", " +
               fmt(elapsed, 3) + " s";
  return out;
}

// ---------------------------------------------------------------- 2

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20190601);
  int mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto d = oracle::to_matrix(inst.d);
    const ClassIndex index(inst.labels);
    const std::pair<Measure, oracle::Value> cases[] = {
        {Measure::fisher, oracle::fisher(inst.d, inst.labels)},
        {Measure::rs, oracle::rs(inst.d, inst.labels)},
        {Measure::rsm, oracle::rsm(inst.d, inst.labels)},
        {Measure::rank, oracle::rank(inst.d, inst.labels)},
        {Measure::rankm, oracle::rankm(inst.d, inst.labels)},
        {Measure::bhg, oracle::bhg(inst.d, inst.labels)},
        {Measure::cindex, oracle::c_index(inst.d, inst.labels)},
    };
    for (const auto& [m, want] : cases) {
      const Score got = evaluate(m, d, index).score;
      if (got.infinite != want.infinite) {
        ++mismatches;
        continue;
      }
      if (got.infinite) continue;
      const double err = std::abs(got.value - want.value) / std::max(1.0, std::abs(want.value));
      worst = std::max(worst, err);
      if (err > 1e-12) ++mismatches;
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 30.0,
          "200 instances x 7 measures, mismatches " + std::to_string(mismatches) +
              ", worst relative error " + fmt(worst, 3) + ", " + fmt(elapsed, 3) + " s"};
}

// ---------------------------------------------------------------- 3

Outcome derived_fixtures() {
  const std::vector<int> labels = {0, 0, 1, 1};
  const ClassIndex index(labels);
  const auto inter = line_matrix({0, 2, 1, 3});
  const auto sep = line_matrix({0, 1, 4, 5});
  const auto all_zero = line_matrix({0, 0, 5, 5});

  struct Check {
    const char* name;
    Score got;
    Score want;
  };
  const Check checks[] = {
      {"interleaved rankm", rankm(inter, index).score, Score::finite(0.75)},
      {"interleaved rank", rank(inter, index).score, Score::finite(5.0 / 12.0)},
      {"interleaved bhg", bhg(inter, index).score, Score::finite(2.0 / 6.0)},
      {"interleaved cindex", c_index(inter, index).score, Score::finite(1.5)},
      {"separated fisher", fisher(sep, index).score, Score::finite(8.0)},
      {"separated rs", rs(sep, index).score, Score::finite(4.0)},
      {"separated rsm", rsm(sep, index).score, Score::finite(4.0)},
      {"separated rank", rank(sep, index).score, Score::finite(1.0)},
      {"separated rankm", rankm(sep, index).score, Score::finite(1.0)},
      {"separated bhg", bhg(sep, index).score, Score::infinity()},
      {"separated cindex", c_index(sep, index).score, Score::infinity()},
      {"coincident fisher", fisher(all_zero, index).score, Score::infinity()},
      {"coincident rsm", rsm(all_zero, index).score, Score::infinity()},
  };
  std::string failed;
  for (const auto& c : checks) {
    // Exact equality, except rational values that are not representable.
    const bool ok = c.got.infinite == c.want.infinite &&
                    (c.got.infinite || std::abs(c.got.value - c.want.value) <= 1e-15);
    if (!ok) failed += std::string(" ") + c.name + "=" + fmt(c.got.as_double(), 17);
  }
  // The same values from the brute-force oracles, as an independent check
  // of the hand arithmetic.
  const auto inter_nested = oracle::line({0, 2, 1, 3});
  if (std::abs(oracle::rank(inter_nested, labels).value - 5.0 / 12.0) > 1e-15) failed += " oracle-rank";
  if (std::abs(oracle::bhg(inter_nested, labels).value - 1.0 / 3.0) > 1e-15) failed += " oracle-bhg";
  if (oracle::c_index(inter_nested, labels).value != 1.5) failed += " oracle-cindex";
  return {failed.empty(), std::to_string(std::size(checks)) + " fixture values" +
                              (failed.empty() ? " reproduced" : ", wrong:" + failed)};
}

// ---------------------------------------------------------------- 4

Outcome separation_sweep() {
  const auto start = Clock::now();
  const auto grid = synth::parse_range("0.5:4.0:0.5");
  synth::GaussianPairConfig config;
  config.samples_per_class = 1000;
  config.repeats = 10;
  config.seed = 20190601;
  const Measure measures[] = {Measure::rs, Measure::rsm, Measure::rank, Measure::rankm};
  const auto sweep = synth::separation_sweep(grid, config, measures);
  std::string detail;
  bool pass = true;
  for (Measure m : measures) {
    const bool up = sweep.strictly_increasing(m);
    pass = pass && up;
    const auto means = sweep.means(m);
    detail += std::string(to_string(m)) + " " + fmt(means.front()) + "->" + fmt(means.back()) +
              (up ? "" : " (not increasing)") + "; ";
  }
  const double elapsed = seconds_since(start);
  return {pass && elapsed < 300.0, detail + fmt(elapsed, 3) + " s"};
}

// ---------------------------------------------------------------- 5

Outcome relabel() {
  const auto start = Clock::now();
  synth::HierarchyConfig config;
  config.seed = 20190601;
  const auto h = synth::generate_hierarchy(config);
  const Measure measures[] = {Measure::fisher, Measure::rs, Measure::rsm, Measure::rank,
                              Measure::rankm};
  const auto report = synth::relabel_monotonicity(h, measures, 100, trial_seed(config.seed, 1));
  std::string detail;
  double rank_std = 0.0;
  double rankm_std = 0.0;
  for (const auto& t : report.measures) {
    if (t.measure == Measure::rank) rank_std = t.mean_stddev();
    if (t.measure == Measure::rankm) rankm_std = t.mean_stddev();
    if (t.exempt) continue;
    detail += std::string(to_string(t.measure)) + (t.monotone ? " monotone" : " NOT monotone") + "; ";
  }
  const bool smoother = rankm_std <= rank_std;
  const double elapsed = seconds_since(start);
  detail += "step-averaged std rankm " + fmt(rankm_std) + " vs rank " + fmt(rank_std) + "; " +
            fmt(elapsed, 3) + " s";
  return {report.passed() && smoother && elapsed < 600.0, detail};
}

// ---------------------------------------------------------------- 6

Outcome taster_ordering() {
  const auto start = Clock::now();
  const std::uint64_t seed = 20190601;
  int ordered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    synth::PlantedConfig config;
    config.seed = trial_seed(seed, trial);
    const auto data = synth::generate_planted(config);
    const ClassIndex index = data.class_index();
    const auto d = compute_distance_matrix(data, {Metric::euclidean, false});
    const auto table = pairwise_class_granularity(d, index, Measure::rankm);
    const Index target = default_target_size(index.k());
    auto granularity_of = [&](const TasterSelection& s) {
      return subset_granularity(d, index, s.classes, Measure::rankm);
    };
    const Score bitter = granularity_of(extract_bitter(table, target));
    const Score sweet = granularity_of(extract_sweet(table, target));
    const Score random =
        granularity_of(extract_random(index.k(), target, trial_seed(seed ^ 0x5eed, trial)));
    if (bitter < random && random < sweet) ++ordered;
  }
  const double elapsed = seconds_since(start);
  return {ordered >= 95 && elapsed < 600.0,
          "bitter < random < sweet in " + std::to_string(ordered) + "/100 planted datasets, " +
              fmt(elapsed, 3) + " s"};
}

// ---------------------------------------------------------------- 7

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs the command with every "{dir}" replaced, returning stdout plus the
/// contents of every file the command wrote.
std::string run_in(const fs::path& dir, const std::vector<std::string>& args) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> expanded = {"granularity"};
  for (std::string a : args) {
    const auto at = a.find("{dir}");
    if (at != std::string::npos) a.replace(at, 5, dir.string());
    expanded.push_back(a);
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(expanded, out, err);
  std::string result = "exit " + std::to_string(code) + "\n" + out.str();
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    result += "== " + fs::relative(f, dir).string() + "\n" + slurp(f);
  }
  return result;
}

Outcome determinism() {
  const auto start = Clock::now();
  const fs::path root = fs::temp_directory_path() / "granularity_acceptance";
  fs::remove_all(root);
  fs::create_directories(root / "in");

  synth::PlantedConfig planted;
  planted.seed = 7;
  const auto data = synth::generate_planted(planted);
  const auto features = (root / "in" / "x.grnf").string();
  const auto labels = (root / "in" / "y.txt").string();
  const auto distances = (root / "in" / "d.grnd").string();
  io::write_features_binary(features, data.features);
  std::vector<std::int64_t> raw(data.labels.begin(), data.labels.end());
  io::write_labels(labels, raw);
  io::write_distances_binary(distances, compute_distance_matrix(data, {}));

  const std::vector<std::vector<std::string>> commands = {
      {"measure", "--features", features, "--labels", labels, "--measures", "all",
       "--bhg-budget", "20000", "--seed", "3", "--output", "{dir}/m.json"},
      {"measure", "--distances", distances, "--labels", labels, "--measures", "all",
       "--bhg-budget", "20000", "--seed", "3", "--output", "{dir}/m.json"},
      {"pairwise", "--features", features, "--labels", labels, "--output", "{dir}/p.csv"},
      {"taster", "--features", features, "--labels", labels, "--random", "--seed", "5",
       "--output-dir", "{dir}"},
      {"axioms", "--features", features, "--labels", labels, "--trials", "5", "--seed", "1",
       "--measures", "fisher,rs,rsm,rank,rankm,cindex",
       "--output", "{dir}/a.jsonl"},
      {"simulate", "--samples-per-class", "100", "--repeats", "3", "--seed", "2", "--output",
       "{dir}/s.csv", "--summary", "{dir}/s.json"},
      {"relabel-eval", "--n-super", "4", "--subs-per-super", "3", "--samples-per-sub", "10",
       "--shuffles", "5", "--seed", "4", "--output", "{dir}/r.json", "--traces", "{dir}/r.csv"},
      {"convert", "--kind", "features", "--input", features, "--output", "{dir}/x.csv"},
      {"convert", "--kind", "distances", "--input", distances, "--output", "{dir}/d.csv"},
  };
  int identical = 0;
  std::string differing;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    // The second run uses a different worker count on purpose.
    auto first_args = commands[c];
    auto second_args = commands[c];
    second_args.insert(second_args.begin(), {"--threads", "3"});
    const std::string first = run_in(root / "a", first_args);
    const std::string second = run_in(root / "b", second_args);
    if (first == second) {
      ++identical;
    } else {
      differing += " " + commands[c][0];
    }
  }
  fs::remove_all(root);
  const double elapsed = seconds_since(start);
  return {differing.empty(),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " commands byte-identical across runs" +
              (differing.empty() ? "" : ", differing:" + differing) + ", " + fmt(elapsed, 3) +
              " s"};
}

// ---------------------------------------------------------------- 8

LabeledDataset blobs(Index n, Index k, Index dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureMatrix centers(k, dims);
  for (Index c = 0; c < k; ++c) {
    for (Index t = 0; t < dims; ++t) centers(c, t) = 0.25 * normal(rng);
  }
  FeatureMatrix x(n, dims);
  std::vector<std::int64_t> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index c = i % k;
    labels[static_cast<std::size_t>(i)] = c;
    for (Index t = 0; t < dims; ++t) x(i, t) = centers(c, t) + normal(rng);
  }
  return make_dataset(x, labels);
}

/// Distances from every sample to the medoids 0..k-1, stored as an n x k
/// table. Only those columns exist; rankm with supplied medoids reads
/// nothing else.
struct MedoidTable {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values;
  Index k;
  Index size() const { return values.rows(); }
  double operator()(Index i, Index j) const {
    if (j < k) return values(i, j);
    if (i < k) return values(j, i);
    return std::numeric_limits<double>::quiet_NaN();
  }
};

Outcome performance() {
  const auto start = Clock::now();
  const auto data = blobs(50'000, 100, 64, 20190601);
  const ClassIndex index = data.class_index();
  const FeatureDistance lazy(data.features, {});
  const auto result = rankm(lazy, index);
  const double end_to_end = seconds_since(start);

  // Advisory scaling check on precomputed medoid distances: with the n x k
  // table given, rankm is O(nk), so doubling n should cost well under 2.5x.
  auto step_time = [&](Index n) {
    const Index k = 100;
    const auto d = blobs(n, k, 64, 7);
    const ClassIndex idx = d.class_index();
    const FeatureDistance f(d.features, {});
    // Sample c is the first member of class c; use it as the medoid.
    std::vector<Index> medoids(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) medoids[static_cast<std::size_t>(c)] = c;
    MedoidTable table{decltype(MedoidTable::values)(n, k), k};
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < k; ++c) table.values(i, c) = f(i, c);
    }
    double best = std::numeric_limits<double>::infinity();
    // One evaluation takes milliseconds; batch ten per timing so scheduler
    // noise does not dominate the ratio.
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = Clock::now();
      double sink = 0.0;
      for (int inner = 0; inner < 10; ++inner) {
        sink += evaluate(Measure::rankm, table, idx, {}, medoids).score.as_double();
      }
      best = std::min(best, seconds_since(t0));
      if (!std::isfinite(sink)) return std::numeric_limits<double>::quiet_NaN();
    }
    return best;
  };
  const double t50 = step_time(50'000);
  const double t100 = step_time(100'000);
  const double ratio = t100 / t50;
  return {end_to_end < 60.0 && ratio < 2.5 && !result.score.infinite,
          "rankm n=50000 k=100 d=64 in " + fmt(end_to_end, 3) + " s (value " +
              fmt(result.score.value) + "); medoid-ranking step 100k/50k time ratio " +
              fmt(ratio, 3)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"axiom suite", axiom_suite},
      {"oracle equivalence", oracle_equivalence},
      {"derived fixtures", derived_fixtures},
      {"separation sweep", separation_sweep},
      {"relabel monotonicity", relabel},
      {"taster ordering", taster_ordering},
      {"determinism", determinism},
      {"performance", performance},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    if (std::string(argv[a]) == "--criterion" && a + 1 < argc) {
      selected.push_back(std::atoi(argv[++a]));
    }
  }
  if (selected.empty()) {
    for (int c = 1; c <= static_cast<int>(criteria.size()); ++c) selected.push_back(c);
  }
  bool all = true;
  for (int c : selected) {
    if (c < 1 || c > static_cast<int>(criteria.size())) {
      std::cerr << "no criterion " << c << '\n';
      return 2;
    }
    const auto& [name, check] = criteria[static_cast<std::size_t>(c - 1)];
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << c << " " << (o.pass ? "PASS" : "FAIL") << " [" << name
              << "] " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
