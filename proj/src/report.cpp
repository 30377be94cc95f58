#include "granularity/report.hpp"

#include <charconv>
#include <cmath>

namespace granularity::report {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, ptr);
}

json score_json(const Score& score) {
  if (score.infinite) return nullptr;
  return score.value;
}

json to_json(const MeasureResult& result, bool with_timing) {
  json distance;
  if (result.distance) {
    distance = {{"metric", std::string(to_string(result.distance->metric))},
                {"normalize", result.distance->normalize}};
  } else {
    distance = {{"metric", "precomputed"}, {"normalize", false}};
  }
  return {
      {"measure", std::string(to_string(result.measure))},
      {"value", score_json(result.score)},
      {"infinite", result.score.infinite},
      {"approximate", result.approximate},
      {"n", result.n},
      {"k", result.k},
      {"excluded_samples", result.excluded_samples},
      {"runtime_ms", with_timing ? json(result.runtime_ms) : json(nullptr)},
      {"distance", distance},
  };
}

json to_json(const AxiomReport& report) {
  return {
      {"measure", report.measure_name.empty() ? std::string(to_string(report.measure))
                                              : report.measure_name},
      {"transform", std::string(to_string(report.kind))},
      {"trials", report.trials},
      {"violations", report.violations},
      {"max_violation_magnitude", report.max_violation_magnitude},
  };
}

json to_json(const TasterSelection& selection, std::span<const std::int64_t> original_ids) {
  auto original = [&](std::span<const int> dense) {
    json ids = json::array();
    for (int c : dense) ids.push_back(original_ids[static_cast<std::size_t>(c)]);
    return ids;
  };
  json trace = json::array();
  for (const Score& s : selection.granularity_trace) trace.push_back(score_json(s));
  return {
      {"kind", std::string(to_string(selection.kind))},
      {"classes", original(selection.classes)},
      {"seed_classes", original(selection.seed_classes)},
      {"granularity_trace", trace},
      {"final_granularity", score_json(selection.final_granularity)},
  };
}

void write_table_csv(std::ostream& out, const ClassPairGranularityTable& table,
                     std::span<const std::int64_t> original_ids) {
  out << "class";
  for (Index b = 0; b < table.k(); ++b) out << ',' << original_ids[static_cast<std::size_t>(b)];
  out << '\n';
  for (Index a = 0; a < table.k(); ++a) {
    out << original_ids[static_cast<std::size_t>(a)];
    for (Index b = 0; b < table.k(); ++b) {
      out << ',';
      const auto& v = table(a, b);
      if (v) out << (v->infinite ? std::string("inf") : format_double(v->value));
    }
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const synth::SweepReport& report) {
  out << "measure," << report.parameter_name << ",repeat,value\n";
  for (const auto& point : report.points) {
    for (const auto& stat : point.stats) {
      for (std::size_t r = 0; r < stat.values.size(); ++r) {
        out << to_string(stat.measure) << ',' << format_double(point.parameter) << ',' << r
            << ',' << format_double(stat.values[r]) << '\n';
      }
    }
  }
}

json sweep_summary(const synth::SweepReport& report) {
  json measures = json::object();
  if (!report.points.empty()) {
    for (const auto& stat : report.points.front().stats) {
      json entry;
      entry["strictly_increasing"] = report.strictly_increasing(stat.measure);
      json mean = json::array();
      json stddev = json::array();
      for (const auto& point : report.points) {
        for (const auto& s : point.stats) {
          if (s.measure != stat.measure) continue;
          mean.push_back(s.infinite_count ? json(nullptr) : json(s.mean));
          stddev.push_back(std::isfinite(s.stddev) ? json(s.stddev) : json(nullptr));
        }
      }
      entry["mean"] = mean;
      entry["std"] = stddev;
      measures[std::string(to_string(stat.measure))] = entry;
    }
  }
  json params = json::array();
  for (const auto& point : report.points) params.push_back(point.parameter);
  return {{"parameter", report.parameter_name}, {"values", params}, {"measures", measures}};
}

void write_relabel_csv(std::ostream& out, const synth::RelabelReport& report) {
  out << "measure,shuffle,step,value\n";
  for (const auto& trace : report.measures) {
    for (std::size_t s = 0; s < trace.traces.size(); ++s) {
      for (std::size_t t = 0; t < trace.traces[s].size(); ++t) {
        out << to_string(trace.measure) << ',' << s << ',' << t << ','
            << format_double(trace.traces[s][t]) << '\n';
      }
    }
  }
}

json relabel_summary(const synth::RelabelReport& report) {
  json measures = json::object();
  for (const auto& trace : report.measures) {
    measures[std::string(to_string(trace.measure))] = {
        {"pass", trace.passed()},
        {"monotone", trace.monotone},
        {"exempt", trace.exempt},
        {"violating_shuffles", trace.violating_shuffles},
        {"mean", trace.mean},
        {"std", trace.stddev},
        {"mean_std", trace.mean_stddev()},
    };
  }
  return {{"pass", report.passed()}, {"measures", measures}};
}

}  // namespace granularity::report
