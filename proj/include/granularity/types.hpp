#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace granularity {

using Index = Eigen::Index;

/// Malformed input: bad files, inconsistent shapes, invalid labels or
/// configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measure or pipeline cannot be evaluated on otherwise valid input
/// (e.g. a singleton class under RS). Maps to CLI exit code 3.
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A granularity value with an explicit infinity sentinel. Measures whose
/// denominator vanishes on perfectly separated data report `infinite`
/// instead of a floating-point infinity, so ordering logic can treat that
/// case explicitly. Infinite scores compare equal to each other and greater
/// than every finite score.
struct Score {
  double value = 0.0;
  bool infinite = false;

  static Score finite(double v) { return Score{v, false}; }
  static Score infinity() { return Score{0.0, true}; }

  /// Numeric view: +inf for the sentinel.
  double as_double() const {
    return infinite ? std::numeric_limits<double>::infinity() : value;
  }

  friend bool operator==(const Score& a, const Score& b) {
    if (a.infinite || b.infinite) return a.infinite == b.infinite;
    return a.value == b.value;
  }
  friend std::partial_ordering operator<=>(const Score& a, const Score& b) {
    if (a.infinite && b.infinite) return std::partial_ordering::equivalent;
    if (a.infinite) return std::partial_ordering::greater;
    if (b.infinite) return std::partial_ordering::less;
    return a.value <=> b.value;
  }
};

enum class Measure { fisher, rs, rsm, rank, rankm, bhg, cindex };

inline constexpr Measure kAllMeasures[] = {Measure::fisher, Measure::rs,
                                           Measure::rsm,    Measure::rank,
                                           Measure::rankm,  Measure::bhg,
                                           Measure::cindex};

/// The five medoid/sample measures (everything except BHG and C index).
inline constexpr Measure kCoreMeasures[] = {Measure::fisher, Measure::rs,
                                            Measure::rsm, Measure::rank,
                                            Measure::rankm};

std::string_view to_string(Measure m);
/// Parses a measure name ("fisher", "rs", ..., "cindex"; "c" is accepted for
/// the C index). Throws ValidationError on unknown names.
Measure parse_measure(std::string_view name);
/// Parses a comma-separated list; "all" expands to every measure.
std::vector<Measure> parse_measure_list(std::string_view list);

/// True for measures that only look at class medoids (O(nk) after medoids).
inline bool uses_medoids(Measure m) {
  return m == Measure::fisher || m == Measure::rsm || m == Measure::rankm;
}

}  // namespace granularity
