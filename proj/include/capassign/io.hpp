#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "capassign/engine.hpp"
#include "capassign/scenarios.hpp"

namespace capassign {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double; "nan", "inf"
/// and "-inf" for non-finite values.
std::string format_double(double value);

/// Column names of the per-agent trace CSV, in order:
///   time, agent_id, <state>..., <control>..., instantaneous_cost,
///   cumulative_cost, assigned_target, active_flag
/// State columns are <slice>_<k>; control columns are u_<k>.
std::vector<std::string> trace_columns(const Engagement& engagement);

/// One row per (sample, agent), samples in time order, agents by index.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                     const Engagement& engagement);

/// One row per (sample, target): time, target_id, <state>..., active_flag.
void write_target_csv(std::ostream& os, const SimulationTrace& trace,
                      const Engagement& engagement);

/// Sidecar with the assignment history, switch counts, exit times and
/// terminal status. `config` is embedded verbatim.
Json trace_json(const SimulationTrace& trace, const Json& config, std::uint64_t seed);

/// Long format: policy, time, cumulative_cost, normalized_cost.
void write_cumulative_cost_csv(std::ostream& os, const std::vector<const SimulationTrace*>& traces,
                               double normalizer);

Json to_json(const ScenarioSpec& spec);
Json to_json(const EngagementConfig& config);
Json to_json(const Aggregates& aggregates);
Json to_json(const Histogram& histogram);
Json to_json(const RunRecord& record, bool timings);
Json to_json(const MonteCarloReport& report, bool timings);

/// One row per run; timing columns only when requested.
void write_report_csv(std::ostream& os, const MonteCarloReport& report, bool timings);
/// bin, low, high, count.
void write_histogram_csv(std::ostream& os, const Histogram& histogram);

}  // namespace capassign
