#include "capassign/io.hpp"

#include <charconv>
#include <cmath>

namespace capassign {
namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json bounds_json(const std::vector<SliceBounds>& bounds) {
  Json j = Json::object();
  for (const auto& b : bounds) j[b.slice] = {b.bounds.low, b.bounds.high};
  return j;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trace_columns(const Engagement& engagement) {
  std::vector<std::string> cols{"time", "agent_id"};
  const LinearSystem& agent = engagement.agent_dynamics.front();
  for (const StateSlice& s : agent.layout().slices()) {
    for (Index k = 0; k < s.size; ++k) cols.push_back(s.name + "_" + std::to_string(k));
  }
  for (Index k = 0; k < agent.input_dim(); ++k) cols.push_back("u_" + std::to_string(k));
  for (const char* c : {"instantaneous_cost", "cumulative_cost", "assigned_target", "active_flag"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                     const Engagement& engagement) {
  const auto cols = trace_columns(engagement);
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (const TraceSample& s : trace.samples) {
    const std::string t = format_double(s.time);
    for (Index i = 0; i < s.agent_states.cols(); ++i) {
      os << t << ',' << i;
      for (Index k = 0; k < s.agent_states.rows(); ++k) os << ',' << format_double(s.agent_states(k, i));
      for (Index k = 0; k < s.controls.rows(); ++k) os << ',' << format_double(s.controls(k, i));
      os << ',' << format_double(s.stage_cost(i)) << ',' << format_double(s.cumulative_cost(i))
         << ',' << s.assigned[static_cast<std::size_t>(i)] << ','
         << static_cast<int>(s.active[static_cast<std::size_t>(i)]) << '\n';
    }
  }
}

void write_target_csv(std::ostream& os, const SimulationTrace& trace,
                      const Engagement& engagement) {
  os << "time,target_id";
  for (const StateSlice& s : engagement.target_dynamics.front().layout().slices()) {
    for (Index k = 0; k < s.size; ++k) os << ',' << s.name << '_' << k;
  }
  os << ",active_flag\n";
  for (const TraceSample& s : trace.samples) {
    std::vector<std::uint8_t> target_active(static_cast<std::size_t>(s.target_states.cols()), 0);
    for (std::size_t i = 0; i < s.active.size(); ++i) {
      if (s.active[i] && s.assigned[i] >= 0) {
        target_active[static_cast<std::size_t>(s.assigned[i])] = 1;
      }
    }
    const std::string t = format_double(s.time);
    for (Index j = 0; j < s.target_states.cols(); ++j) {
      os << t << ',' << j;
      for (Index k = 0; k < s.target_states.rows(); ++k) {
        os << ',' << format_double(s.target_states(k, j));
      }
      os << ',' << static_cast<int>(target_active[static_cast<std::size_t>(j)]) << '\n';
    }
  }
}

Json trace_json(const SimulationTrace& trace, const Json& config, std::uint64_t seed) {
  Json j;
  j["policy"] = to_string(trace.policy);
  j["seed"] = seed;
  j["config"] = config;
  j["terminal_status"] = to_string(trace.status);
  j["end_time"] = trace.end_time;
  j["total_cost"] = trace.total_cost;
  j["initial_assignment_cost"] = trace.initial_assignment_cost;
  j["assignment_solves"] = trace.assignment_solves;
  j["used_sentinel"] = trace.used_sentinel;
  Json history = Json::array();
  for (const AssignmentRecord& r : trace.history) {
    history.push_back({{"time", r.time}, {"sigma", r.sigma}, {"used_sentinel", r.used_sentinel}});
  }
  j["sigma_history"] = std::move(history);
  j["switch_counts"] = trace.switch_counts;
  j["total_switches"] = trace.total_switches();
  Json exits = Json::array();
  for (double t : trace.exit_times) exits.push_back(finite_or_null(t));
  j["exit_times"] = std::move(exits);
  double min_distance = std::numeric_limits<double>::infinity();
  for (const TraceSample& s : trace.samples) min_distance = std::min(min_distance, s.min_agent_distance);
  j["min_agent_distance"] = finite_or_null(min_distance);
  j["samples"] = trace.samples.size();
  j["integrator"] = {{"accepted_steps", trace.integrator_stats.accepted_steps},
                     {"rejected_steps", trace.integrator_stats.rejected_steps},
                     {"rhs_evaluations", trace.integrator_stats.rhs_evaluations}};
  return j;
}

void write_cumulative_cost_csv(std::ostream& os,
                               const std::vector<const SimulationTrace*>& traces,
                               double normalizer) {
  os << "policy,time,cumulative_cost,normalized_cost\n";
  for (const SimulationTrace* trace : traces) {
    const std::string name = to_string(trace->policy);
    for (const TraceSample& s : trace->samples) {
      const double total = s.total_cost();
      os << name << ',' << format_double(s.time) << ',' << format_double(total) << ','
         << format_double(total / normalizer) << '\n';
    }
  }
}

Json to_json(const ScenarioSpec& spec) {
  Json j;
  j["agent_bounds"] = bounds_json(spec.agent_bounds);
  j["target_bounds"] = bounds_json(spec.target_bounds);
  j["terminal_bounds"] = {spec.terminal_bounds.low, spec.terminal_bounds.high};
  const Vector q = spec.weights.state_weight().diagonal();
  const Vector r = spec.weights.control_weight().diagonal();
  j["state_weight_diag"] = std::vector<double>(q.data(), q.data() + q.size());
  j["control_weight_diag"] = std::vector<double>(r.data(), r.data() + r.size());
  j["quadcopter"] = {{"mass", spec.quadcopter.mass},
                     {"ixx", spec.quadcopter.ixx},
                     {"iyy", spec.quadcopter.iyy},
                     {"izz", spec.quadcopter.izz},
                     {"gravity", spec.quadcopter.gravity}};
  return j;
}

Json to_json(const EngagementConfig& c) {
  return {{"capture_radius", c.capture_radius},
          {"horizon", c.horizon},
          {"reassign_interval", c.reassign_interval},
          {"metric_exponent", c.metric_exponent},
          {"integrator",
           {{"rel_tol", c.integrator.rel_tol},
            {"abs_tol", c.integrator.abs_tol},
            {"max_step", c.integrator.max_step},
            {"output_dt", c.integrator.output_dt}}}};
}

Json to_json(const Aggregates& a) {
  return {{"requested", a.requested},       {"succeeded", a.succeeded},
          {"failed", a.failed},             {"both_completed", a.both_completed},
          {"reliable", a.reliable},         {"mean_j_dyn", a.mean_j_dyn},
          {"mean_j_emd", a.mean_j_emd},     {"mean_gap", a.mean_gap},
          {"stddev_gap", a.stddev_gap},     {"mean_ratio", a.mean_ratio},
          {"mean_switches", a.mean_switches}};
}

Json to_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

Json to_json(const RunRecord& r, bool timings) {
  Json j = {{"run", r.run},
            {"seed", r.seed},
            {"ok", r.ok},
            {"failure", r.failure},
            {"j_dyn", r.j_dyn},
            {"j_emd", r.j_emd},
            {"gap", r.gap()},
            {"c_dyn_total", r.c_dyn_total},
            {"emd_switches", r.emd_switches},
            {"dyn_history_length", r.dyn_history_length},
            {"emd_solves", r.emd_solves},
            {"dyn_status", to_string(r.dyn_status)},
            {"emd_status", to_string(r.emd_status)},
            {"dyn_end_time", r.dyn_end_time},
            {"emd_end_time", r.emd_end_time}};
  if (timings) {
    j["runtime_dyn_s"] = r.runtime_dyn_s;
    j["runtime_emd_s"] = r.runtime_emd_s;
  }
  return j;
}

Json to_json(const MonteCarloReport& report, bool timings) {
  Json j;
  j["world"] = to_string(report.spec.world);
  j["n"] = report.spec.n;
  j["master_seed"] = report.master_seed;
  j["scenario"] = to_json(report.spec);
  j["engagement"] = to_json(report.config);
  j["aggregates"] = to_json(report.aggregates);
  j["gap_histogram"] = to_json(report.gap_histogram);
  Json runs = Json::array();
  for (const RunRecord& r : report.runs) runs.push_back(to_json(r, timings));
  j["runs"] = std::move(runs);
  return j;
}

void write_report_csv(std::ostream& os, const MonteCarloReport& report, bool timings) {
  os << "run,seed,ok,j_dyn,j_emd,gap,c_dyn_total,emd_switches,dyn_history_length,"
        "emd_solves,dyn_status,emd_status,dyn_end_time,emd_end_time";
  if (timings) os << ",runtime_dyn_s,runtime_emd_s";
  os << ",failure\n";
  for (const RunRecord& r : report.runs) {
    os << r.run << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',' << format_double(r.j_dyn)
       << ',' << format_double(r.j_emd) << ',' << format_double(r.gap()) << ','
       << format_double(r.c_dyn_total) << ',' << r.emd_switches << ',' << r.dyn_history_length
       << ',' << r.emd_solves << ',' << to_string(r.dyn_status) << ','
       << to_string(r.emd_status) << ',' << format_double(r.dyn_end_time) << ','
       << format_double(r.emd_end_time);
    if (timings) os << ',' << format_double(r.runtime_dyn_s) << ',' << format_double(r.runtime_emd_s);
    std::string reason = r.failure;
    for (char& ch : reason) {
      if (ch == '"') ch = '\'';
    }
    os << ",\"" << reason << "\"\n";
  }
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin,low,high,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << b << ',' << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ','
       << h.counts[b] << '\n';
  }
}

}  // namespace capassign
