#include "granularity/measures.hpp"

#include <sstream>
#include <string>

namespace granularity {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::fisher:
      return "fisher";
    case Measure::rs:
      return "rs";
    case Measure::rsm:
      return "rsm";
    case Measure::rank:
      return "rank";
    case Measure::rankm:
      return "rankm";
    case Measure::bhg:
      return "bhg";
    case Measure::cindex:
      return "cindex";
  }
  return "unknown";
}

Measure parse_measure(std::string_view name) {
  for (Measure m : kAllMeasures) {
    if (name == to_string(m)) return m;
  }
  if (name == "c" || name == "c_index") return Measure::cindex;
  throw ValidationError("unknown measure '" + std::string(name) + "'");
}

std::vector<Measure> parse_measure_list(std::string_view list) {
  if (list == "all") return {std::begin(kAllMeasures), std::end(kAllMeasures)};
  std::vector<Measure> out;
  std::stringstream stream{std::string(list)};
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") return {std::begin(kAllMeasures), std::end(kAllMeasures)};
    const Measure m = parse_measure(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ValidationError("empty measure list");
  return out;
}

namespace detail {

void require_classes(const ClassIndex& index, Measure m) {
  if (index.k() < 2) {
    throw ComputeError(std::string(to_string(m)) + " needs at least 2 classes");
  }
}

void require_no_singletons(const ClassIndex& index, Measure m) {
  if (index.min_class_size() < 2) {
    throw ComputeError("singleton class unsupported by " +
                       std::string(m == Measure::rs ? "RS" : "Rank"));
  }
}

Score ratio_or_infinity(double numerator, double denominator) {
  if (denominator == 0.0) return Score::infinity();
  return Score::finite(numerator / denominator);
}

Score mean_or_infinity(std::span<const double> terms,
                       std::span<const unsigned char> contributes) {
  double total = 0.0;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (contributes[i]) {
      total += terms[i];
      ++count;
    }
  }
  if (count == 0) return Score::infinity();
  return Score::finite(total / static_cast<double>(count));
}

RankList rank_lists_from_order(const NeighborOrder& order, const ClassIndex& index) {
  const Index n = index.n();
  if (order.n() != n) throw ValidationError("neighbour order size does not match labels");
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 0; i < n; ++i) {
    offsets[static_cast<std::size_t>(i) + 1] =
        offsets[static_cast<std::size_t>(i)] + index.size(index.label(i)) - 1;
  }
  std::vector<std::int64_t> ranks(static_cast<std::size_t>(offsets.back()));
  parallel_for(n, [&](std::int64_t i) {
    const int own = index.label(i);
    auto* out = ranks.data() + offsets[static_cast<std::size_t>(i)];
    const auto neighbours = order.of(i);
    std::int64_t written = 0;
    for (std::size_t t = 0; t < neighbours.size(); ++t) {
      if (index.label(neighbours[t]) == own) out[written++] = static_cast<std::int64_t>(t) + 1;
    }
  });
  return RankList(std::move(offsets), std::move(ranks));
}

Partial rank_from_lists(const RankList& lists) {
  const Index n = lists.n();
  std::vector<double> precision(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, [&](std::int64_t i) {
    const auto r = lists.of(i);
    double ap = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      ap += static_cast<double>(j + 1) / static_cast<double>(r[j]);
    }
    precision[static_cast<std::size_t>(i)] = ap / static_cast<double>(r.size());
  });
  double total = 0.0;
  for (double v : precision) total += v;
  return {Score::finite(total / static_cast<double>(n)), 0, false};
}

}  // namespace detail

MeasureResult rank(const NeighborOrder& order, const ClassIndex& index) {
  return detail::timed(Measure::rank, index, [&] {
    detail::require_classes(index, Measure::rank);
    detail::require_no_singletons(index, Measure::rank);
    return detail::rank_from_lists(detail::rank_lists_from_order(order, index));
  });
}

}  // namespace granularity
