#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "granularity/measures.hpp"
#include "oracles.hpp"

using namespace granularity;

namespace {

void check_close(const Score& got, const oracle::Value& want, double tol = 1e-12) {
  REQUIRE(got.infinite == want.infinite);
  if (!want.infinite) {
    CHECK(std::abs(got.value - want.value) <= tol * std::max(1.0, std::abs(want.value)));
  }
}

}  // namespace

TEST_CASE("medoids pick the smallest distance sum, ties to the lower index") {
  const auto tie = fixtures::line({0.0, 1.0}, {0, 0});
  // A one-class index is enough for medoids.
  CHECK(class_medoids(tie.d, tie.index) == std::vector<Index>{0});

  const auto three = fixtures::line({0.0, 1.0, 10.0, 50.0}, {0, 0, 0, 1});
  CHECK(class_medoids(three.d, three.index) == std::vector<Index>{1, 3});
}

TEST_CASE("medoids agree with exhaustive search") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracle::random_instance(rng, 12);
    const auto d = oracle::to_matrix(inst.d);
    const ClassIndex index(inst.labels);
    const auto got = class_medoids(d, index);
    const auto want = oracle::medoids(inst.d, inst.labels);
    REQUIRE(got.size() == want.size());
    for (std::size_t c = 0; c < got.size(); ++c) CHECK(got[c] == want[c]);
  }
}

TEST_CASE("separated fixture") {
  const auto f = fixtures::separated();
  CHECK(fisher(f.d, f.index).score == Score::finite(8.0));
  CHECK(rs(f.d, f.index).score == Score::finite(4.0));
  const auto r = rsm(f.d, f.index);
  CHECK(r.score == Score::finite(4.0));
  CHECK(r.excluded_samples == 2);
  CHECK(rank(f.d, f.index).score == Score::finite(1.0));
  CHECK(rankm(f.d, f.index).score == Score::finite(1.0));
  CHECK(bhg(f.d, f.index).score.infinite);
  CHECK(c_index(f.d, f.index).score.infinite);
}

TEST_CASE("interleaved fixture") {
  const auto f = fixtures::interleaved();
  CHECK(rankm(f.d, f.index).score == Score::finite(0.75));
  // Per-sample AP: 1/2, 1/3, 1/3, 1/2.
  CHECK(rank(f.d, f.index).score.value == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  // Within {2, 2} vs between {1, 1, 1, 3}: N+ = 2, N- = 6.
  CHECK(bhg(f.d, f.index).score.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Sorted {1, 1, 1, 2, 2, 3}: D_w = 4, D_min = 2, D_max = 5.
  CHECK(c_index(f.d, f.index).score == Score::finite(1.5));
  // The hand values agree with the brute-force oracles.
  CHECK(oracle::rank(f.nested, f.labels).value == doctest::Approx(5.0 / 12.0));
  CHECK(oracle::bhg(f.nested, f.labels).value == doctest::Approx(1.0 / 3.0));
  CHECK(oracle::c_index(f.nested, f.labels).value == doctest::Approx(1.5));
}

TEST_CASE("rank lists follow (distance, index) order") {
  const auto f = fixtures::interleaved();
  const auto lists = rank_lists(f.d, f.index);
  // x = 0 sees {1 (idx 2), 2 (idx 1), 3 (idx 3)}; its classmate is second.
  CHECK(std::vector<std::int64_t>(lists.of(0).begin(), lists.of(0).end()) ==
        std::vector<std::int64_t>{2});

  // Two equidistant neighbours: the smaller index ranks first.
  const auto tie = fixtures::line({0.0, -1.0, 1.0, 5.0}, {0, 1, 0, 1});
  const auto tl = rank_lists(tie.d, tie.index);
  CHECK(std::vector<std::int64_t>(tl.of(0).begin(), tl.of(0).end()) ==
        std::vector<std::int64_t>{2});
}

TEST_CASE("intra-class shrink doubles RS on the separated fixture") {
  // Intra-class distances halved, cross-class distances kept.
  const auto f = fixtures::separated();
  Eigen::MatrixXd m = f.d.values();
  m(0, 1) = m(1, 0) = 0.5;
  m(2, 3) = m(3, 2) = 0.5;
  CHECK(rs(DistanceMatrix(m), f.index).score == Score::finite(8.0));
}

TEST_CASE("singleton classes") {
  const auto f = fixtures::line({0, 1, 5}, {0, 0, 1});
  CHECK_THROWS_WITH_AS(rs(f.d, f.index), doctest::Contains("singleton class unsupported by RS"),
                       ComputeError);
  CHECK_THROWS_AS(rank(f.d, f.index), ComputeError);
  // Medoid measures handle singletons naturally.
  CHECK_FALSE(rankm(f.d, f.index).score.infinite);
  CHECK_NOTHROW(fisher(f.d, f.index));
}

TEST_CASE("degenerate denominators give the infinity sentinel") {
  // Every sample coincides with its medoid.
  const auto f = fixtures::line({0, 0, 5, 5}, {0, 0, 1, 1});
  CHECK(fisher(f.d, f.index).score.infinite);
  const auto r = rsm(f.d, f.index);
  CHECK(r.score.infinite);
  CHECK(r.excluded_samples == 4);
  CHECK(rs(f.d, f.index).score.infinite);
}

TEST_CASE("optimized measures match the oracles on random instances") {
  std::mt19937_64 rng(20190601);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto d = oracle::to_matrix(inst.d);
    const ClassIndex index(inst.labels);
    CAPTURE(trial);
    check_close(fisher(d, index).score, oracle::fisher(inst.d, inst.labels));
    const auto r = rs(d, index);
    const auto want_rs = oracle::rs(inst.d, inst.labels);
    check_close(r.score, want_rs);
    CHECK(r.excluded_samples == want_rs.excluded);
    const auto m = rsm(d, index);
    const auto want_rsm = oracle::rsm(inst.d, inst.labels);
    check_close(m.score, want_rsm);
    CHECK(m.excluded_samples == want_rsm.excluded);
    check_close(rank(d, index).score, oracle::rank(inst.d, inst.labels));
    check_close(rankm(d, index).score, oracle::rankm(inst.d, inst.labels));
    check_close(bhg(d, index).score, oracle::bhg(inst.d, inst.labels));
    check_close(c_index(d, index).score, oracle::c_index(inst.d, inst.labels));
  }
}

TEST_CASE("value ranges and scale invariance") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto d = oracle::to_matrix(inst.d);
    const ClassIndex index(inst.labels);
    for (Measure m : kAllMeasures) {
      const auto base = evaluate(m, d, index).score;
      if (!base.infinite) {
        CHECK(base.value >= 0.0);
        CHECK(std::isfinite(base.value));
      }
      if (m == Measure::rank || m == Measure::rankm) CHECK(base.value <= 1.0);
      for (double alpha : {0.1, 1.0, 7.3}) {
        const auto scaled = evaluate(m, d.scaled(alpha), index).score;
        REQUIRE(scaled.infinite == base.infinite);
        if (!base.infinite) {
          CHECK(std::abs(scaled.value - base.value) <= 1e-9 * std::max(1e-300, base.value));
        }
      }
    }
  }
}

TEST_CASE("lazy features, materialized matrix and subset views agree") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  FeatureMatrix x(40, 5);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng) + (i % 4);
  }
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i % 4;
  const ClassIndex index(labels);
  for (Metric metric : {Metric::euclidean, Metric::cosine}) {
    const FeatureDistance lazy(x, {metric, true});
    const DistanceMatrix full = materialize(lazy);
    std::vector<Index> all(40);
    for (Index i = 0; i < 40; ++i) all[static_cast<std::size_t>(i)] = i;
    const SubsetDistance<DistanceMatrix> view(full, all);
    for (Measure m : kAllMeasures) {
      const auto a = evaluate(m, lazy, index).score;
      CHECK(a == evaluate(m, full, index).score);
      CHECK(a == evaluate(m, view, index).score);
    }
  }
}

TEST_CASE("supplied medoids and a shared neighbour order are reused faithfully") {
  std::mt19937_64 rng(5);
  const auto inst = oracle::random_instance(rng);
  const auto d = oracle::to_matrix(inst.d);
  const ClassIndex index(inst.labels);
  const auto medoids = class_medoids(d, index);
  for (Measure m : kAllMeasures) {
    CHECK(evaluate(m, d, index, {}, medoids).score == evaluate(m, d, index).score);
  }
  const NeighborOrder order(d);
  CHECK(rank(order, index).score == rank(d, index).score);
}

TEST_CASE("sampled BHG is seeded, flagged and close to the exact value") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  FeatureMatrix x(60, 2);
  std::vector<int> labels(60);
  for (Index i = 0; i < 60; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i % 3);
    x(i, 0) = normal(rng) + 1.5 * static_cast<double>(i % 3);
    x(i, 1) = normal(rng);
  }
  const ClassIndex index(labels);
  const auto d = compute_distance_matrix(x, {Metric::euclidean, false});
  const auto exact = bhg(d, index);
  CHECK_FALSE(exact.approximate);
  MeasureOptions sampled;
  sampled.bhg_exact_limit = 10;
  sampled.bhg_budget = 400'000;
  sampled.seed = 42;
  const auto a = bhg(d, index, sampled);
  const auto b = bhg(d, index, sampled);
  CHECK(a.approximate);
  CHECK(a.score == b.score);
  CHECK(a.score.value == doctest::Approx(exact.score.value).epsilon(0.02));
  sampled.seed = 43;
  CHECK_FALSE(bhg(d, index, sampled).score == a.score);
}

TEST_CASE("measure names round-trip") {
  for (Measure m : kAllMeasures) CHECK(parse_measure(to_string(m)) == m);
  CHECK(parse_measure("c_index") == Measure::cindex);
  CHECK(parse_measure_list("all").size() == std::size(kAllMeasures));
  CHECK_THROWS_AS(parse_measure("silhouette"), ValidationError);
}
