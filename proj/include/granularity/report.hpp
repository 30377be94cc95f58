#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

#include "json.hpp"

#include "granularity/axioms.hpp"
#include "granularity/measures.hpp"
#include "granularity/synth.hpp"
#include "granularity/taster.hpp"

namespace granularity::report {

using nlohmann::json;

/// {measure, value|null, infinite, approximate, n, k, excluded_samples,
///  runtime_ms, distance: {metric, normalize}}. runtime_ms is null unless
/// `with_timing`, which keeps repeated runs byte-identical by default.
json to_json(const MeasureResult& result, bool with_timing = false);

json to_json(const AxiomReport& report);

/// Class ids are translated back to the caller's original ids.
json to_json(const TasterSelection& selection, std::span<const std::int64_t> original_ids);

/// Score as a JSON number, or null for the infinity sentinel.
json score_json(const Score& score);

/// k x k CSV with an "class" header row/column of original ids. Empty cells
/// are undefined entries; "inf" marks the infinity sentinel.
void write_table_csv(std::ostream& out, const ClassPairGranularityTable& table,
                     std::span<const std::int64_t> original_ids);

/// Long format: measure,param,repeat,value.
void write_sweep_csv(std::ostream& out, const synth::SweepReport& report);
json sweep_summary(const synth::SweepReport& report);

/// Long format: measure,shuffle,step,value.
void write_relabel_csv(std::ostream& out, const synth::RelabelReport& report);
json relabel_summary(const synth::RelabelReport& report);

/// Shortest round-trip decimal form of a double ("inf" for +infinity).
std::string format_double(double v);

}  // namespace granularity::report
