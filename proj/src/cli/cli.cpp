#include "capassign/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "capassign/error.hpp"

namespace capassign::cli {
namespace fs = std::filesystem;
namespace {

const std::vector<std::string> kEmitChoices = {"trace", "summary", "histogram",
                                               "cumulative_cost"};

std::vector<SliceBounds> merge_bounds(std::vector<SliceBounds> base, const Json& node,
                                      const std::string& field) {
  if (!node.is_object()) throw ConfigError("field '" + field + "' must be an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    auto slot = std::find_if(base.begin(), base.end(),
                             [&](const SliceBounds& b) { return b.slice == it.key(); });
    if (slot == base.end()) {
      throw ConfigError("field '" + field + "." + it.key() + "': no such state slice");
    }
    const auto pair = it.value().get<std::vector<double>>();
    if (pair.size() != 2) {
      throw ConfigError("field '" + field + "." + it.key() + "' must be [low, high]");
    }
    slot->bounds = {pair[0], pair[1]};
  }
  return base;
}

Json bounds_to_json(const std::vector<SliceBounds>& bounds) {
  Json j = Json::object();
  for (const auto& b : bounds) j[b.slice] = {b.bounds.low, b.bounds.high};
  return j;
}

// Every key of `node` must exist in `schema`; slice maps are checked later.
void reject_unknown_keys(const Json& node, const Json& schema, const std::string& prefix) {
  if (!node.is_object()) {
    throw ConfigError(prefix.empty() ? std::string("config root must be an object")
                                     : "field '" + prefix + "' must be an object");
  }
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown field '" + path + "'");
    const Json& sub = schema.at(it.key());
    const bool slice_map = it.key() == "agent_bounds" || it.key() == "target_bounds";
    if (sub.is_object() && !slice_map) reject_unknown_keys(it.value(), sub, path);
  }
}

class Resolver {
 public:
  Resolver(const Json* file, Settings& settings) : file_(file), settings_(settings) {}

  const Json* find(const std::string& path) const {
    if (!file_) return nullptr;
    const Json* node = file_;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &node->at(part);
    }
    return node;
  }

  template <class T>
  T get(const std::string& path, const std::optional<T>& flag, T fallback) {
    if (flag) {
      settings_.source[path] = "flag";
      return *flag;
    }
    if (const Json* node = find(path)) {
      try {
        T value = node->get<T>();
        settings_.source[path] = "file";
        return value;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("field '" + path + "': " + e.what());
      }
    }
    settings_.source[path] = "default";
    return fallback;
  }

  template <class T>
  T get(const std::string& path, T fallback) {
    return get<T>(path, std::nullopt, fallback);
  }

 private:
  const Json* file_;
  Settings& settings_;
};

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write '" + path.string() + "'");
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

bool emits(const Settings& s, const std::string& what) {
  return std::find(s.emit.begin(), s.emit.end(), what) != s.emit.end();
}

Json base_summary(const Settings& s, const std::string& command) {
  Json j;
  j["command"] = command;
  j["seed"] = s.scenario.seed;
  j["config"] = s.to_json();
  j["defaulted_fields"] = s.defaulted_fields();
  return j;
}

// Doubles print with a fixed 6 significant digits in the console tables.
std::string short_number(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

Json Settings::to_json() const {
  Json j;
  j["world"] = capassign::to_string(world);
  j["n"] = scenario.n;
  j["seed"] = scenario.seed;
  j["policy"] = policy;
  j["output_dir"] = output_dir;
  j["emit"] = emit;
  j["jobs"] = jobs;
  j["timings"] = timings;
  j["engagement"] = capassign::to_json(engagement);
  Json sc = capassign::to_json(scenario);
  sc["agent_bounds"] = bounds_to_json(scenario.agent_bounds);
  sc["target_bounds"] = bounds_to_json(scenario.target_bounds);
  j["scenario"] = std::move(sc);
  j["sweep"] = {{"sizes", sizes}, {"runs", runs}, {"histogram_bins", histogram_bins}};
  return j;
}

std::vector<std::string> Settings::defaulted_fields() const {
  std::vector<std::string> out;
  for (const auto& [field, origin] : source) {
    if (origin == "default") out.push_back(field);
  }
  return out;
}

Settings resolve(const Flags& flags) {
  std::optional<Json> file;
  if (flags.config_path) file = load_config(*flags.config_path);
  Settings s;
  Resolver r(file ? &*file : nullptr, s);

  try {
    s.world = parse_world(r.get<std::string>("world", flags.world, "double-integrator"));
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'world': ") + e.what());
  }
  const Index n = r.get<Index>("n", flags.n, 5);
  const std::uint64_t seed = r.get<std::uint64_t>("seed", flags.seed, 0);
  s.scenario = ScenarioSpec::defaults(s.world, n, seed);
  s.engagement = default_engagement_config(s.world);

  if (file) {
    Settings schema_holder = s;
    schema_holder.emit = kEmitChoices;
    reject_unknown_keys(*file, schema_holder.to_json(), "");
  }

  s.policy = r.get<std::string>("policy", flags.policy, "both");
  s.output_dir = r.get<std::string>("output_dir", flags.output_dir, "out");
  s.emit = r.get<std::vector<std::string>>("emit", flags.emit, kEmitChoices);
  s.jobs = r.get<int>("jobs", flags.jobs, 1);
  s.timings = r.get<bool>("timings", flags.timings ? std::optional<bool>(true) : std::nullopt,
                          false);

  EngagementConfig& e = s.engagement;
  e.capture_radius =
      r.get<double>("engagement.capture_radius", flags.capture_radius, e.capture_radius);
  e.horizon = r.get<double>("engagement.horizon", flags.horizon, e.horizon);
  e.reassign_interval =
      r.get<double>("engagement.reassign_interval", flags.reassign_interval, e.reassign_interval);
  e.metric_exponent =
      r.get<double>("engagement.metric_exponent", flags.metric_exponent, e.metric_exponent);
  e.integrator.rel_tol = r.get<double>("engagement.integrator.rel_tol", e.integrator.rel_tol);
  e.integrator.abs_tol = r.get<double>("engagement.integrator.abs_tol", e.integrator.abs_tol);
  e.integrator.max_step = r.get<double>("engagement.integrator.max_step", e.integrator.max_step);
  e.integrator.output_dt =
      r.get<double>("engagement.integrator.output_dt", e.integrator.output_dt);

  ScenarioSpec& sc = s.scenario;
  for (const char* key : {"agent_bounds", "target_bounds"}) {
    const std::string path = std::string("scenario.") + key;
    auto& target = std::string(key) == "agent_bounds" ? sc.agent_bounds : sc.target_bounds;
    if (const Json* node = r.find(path)) {
      try {
        target = merge_bounds(target, *node, path);
      } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("field '" + path + "': " + ex.what());
      }
      s.source[path] = "file";
    } else {
      s.source[path] = "default";
    }
  }
  const auto terminal = r.get<std::vector<double>>(
      "scenario.terminal_bounds", {sc.terminal_bounds.low, sc.terminal_bounds.high});
  if (terminal.size() != 2) throw ConfigError("field 'scenario.terminal_bounds' must be [low, high]");
  sc.terminal_bounds = {terminal[0], terminal[1]};

  const Vector q0 = sc.weights.state_weight().diagonal();
  const Vector r0 = sc.weights.control_weight().diagonal();
  const auto q = r.get<std::vector<double>>("scenario.state_weight_diag",
                                            std::vector<double>(q0.data(), q0.data() + q0.size()));
  const auto rr = r.get<std::vector<double>>("scenario.control_weight_diag",
                                             std::vector<double>(r0.data(), r0.data() + r0.size()));
  if (static_cast<Index>(q.size()) != q0.size()) {
    throw ConfigError("field 'scenario.state_weight_diag' needs " + std::to_string(q0.size()) +
                      " entries");
  }
  if (static_cast<Index>(rr.size()) != r0.size()) {
    throw ConfigError("field 'scenario.control_weight_diag' needs " +
                      std::to_string(r0.size()) + " entries");
  }
  try {
    sc.weights = QuadraticCost(Eigen::Map<const Vector>(q.data(), q0.size()).asDiagonal(),
                               Eigen::Map<const Vector>(rr.data(), r0.size()).asDiagonal());
  } catch (const Error& ex) {
    throw ConfigError(std::string("field 'scenario.state_weight_diag/control_weight_diag': ") +
                      ex.what());
  }
  QuadcopterParams& qp = sc.quadcopter;
  qp.mass = r.get<double>("scenario.quadcopter.mass", qp.mass);
  qp.ixx = r.get<double>("scenario.quadcopter.ixx", qp.ixx);
  qp.iyy = r.get<double>("scenario.quadcopter.iyy", qp.iyy);
  qp.izz = r.get<double>("scenario.quadcopter.izz", qp.izz);
  qp.gravity = r.get<double>("scenario.quadcopter.gravity", qp.gravity);

  s.sizes = r.get<std::vector<Index>>("sweep.sizes", flags.sizes, {5, 10, 20});
  s.runs = r.get<Index>("sweep.runs", flags.runs, 100);
  s.histogram_bins = r.get<int>("sweep.histogram_bins", 20);

  // Validation; every message names its field.
  if (s.policy != "dyn" && s.policy != "emd" && s.policy != "both") {
    throw ConfigError("field 'policy' must be dyn, emd or both (got '" + s.policy + "')");
  }
  if (s.emit.empty()) throw ConfigError("field 'emit' must not be empty");
  for (const auto& item : s.emit) {
    if (std::find(kEmitChoices.begin(), kEmitChoices.end(), item) == kEmitChoices.end()) {
      throw ConfigError("field 'emit': unknown artifact '" + item + "'");
    }
  }
  if (s.jobs < 1) throw ConfigError("field 'jobs' must be >= 1");
  if (n < 1) throw ConfigError("field 'n' must be >= 1");
  if (s.runs < 1) throw ConfigError("field 'sweep.runs' must be >= 1");
  if (s.sizes.empty()) throw ConfigError("field 'sweep.sizes' must not be empty");
  for (Index size : s.sizes) {
    if (size < 1) throw ConfigError("field 'sweep.sizes' entries must be >= 1");
  }
  if (s.histogram_bins < 1) throw ConfigError("field 'sweep.histogram_bins' must be >= 1");
  if (s.output_dir.empty()) throw ConfigError("field 'output_dir' must not be empty");

  const std::pair<const char*, double> positives[] = {
      {"engagement.capture_radius", e.capture_radius},
      {"engagement.horizon", e.horizon},
      {"engagement.reassign_interval", e.reassign_interval},
      {"engagement.integrator.rel_tol", e.integrator.rel_tol},
      {"engagement.integrator.abs_tol", e.integrator.abs_tol},
      {"engagement.integrator.max_step", e.integrator.max_step},
      {"engagement.integrator.output_dt", e.integrator.output_dt}};
  for (const auto& [field, value] : positives) {
    if (!(value > 0.0)) throw ConfigError(std::string("field '") + field + "' must be > 0");
  }
  if (!(e.metric_exponent >= 1.0)) {
    throw ConfigError("field 'engagement.metric_exponent' must be >= 1");
  }
  try {
    sc.validate();
  } catch (const Error& ex) {
    throw ConfigError(std::string("field 'scenario': ") + ex.what());
  }
  return s;
}

int cmd_run(const Settings& s, std::ostream& out, std::ostream& err) {
  const fs::path dir(s.output_dir);
  Json summary = base_summary(s, "run");
  const Json config = s.to_json();
  try {
    fs::create_directories(dir);
    const Scenario sc = generate(s.scenario);
    TrackerCache trackers;
    const AssignmentDecision initial =
        assign(sc.engagement.initial, sc.engagement, PolicyKind::Dynamics, s.engagement, trackers);
    const double normalizer = initial.total_cost;

    std::vector<PolicyKind> kinds;
    if (s.policy != "emd") kinds.push_back(PolicyKind::Dynamics);
    if (s.policy != "dyn") kinds.push_back(PolicyKind::Distance);
    std::vector<SimulationTrace> traces;
    for (PolicyKind kind : kinds) traces.push_back(run_policy(kind, sc.engagement, s.engagement, trackers));

    Json results = Json::object();
    std::vector<const SimulationTrace*> views;
    std::vector<std::string> artifacts;
    for (const SimulationTrace& t : traces) {
      const std::string name = to_string(t.policy);
      views.push_back(&t);
      if (emits(s, "trace")) {
        std::ostringstream csv, targets;
        write_trace_csv(csv, t, sc.engagement);
        write_target_csv(targets, t, sc.engagement);
        write_file(dir / ("trace_" + name + ".csv"), csv.str());
        write_file(dir / ("trace_" + name + "_targets.csv"), targets.str());
        write_file(dir / ("trace_" + name + ".json"), dump(trace_json(t, config, s.scenario.seed)));
        artifacts.push_back("trace_" + name + ".csv");
        artifacts.push_back("trace_" + name + "_targets.csv");
        artifacts.push_back("trace_" + name + ".json");
      }
      results[name] = {{"total_cost", t.total_cost},
                       {"normalized_cost", t.total_cost / normalizer},
                       {"terminal_status", to_string(t.status)},
                       {"end_time", t.end_time},
                       {"assignment_solves", t.assignment_solves},
                       {"total_switches", t.total_switches()},
                       {"used_sentinel", t.used_sentinel}};
    }
    if (emits(s, "cumulative_cost")) {
      std::ostringstream csv;
      write_cumulative_cost_csv(csv, views, normalizer);
      write_file(dir / "cumulative_cost.csv", csv.str());
      artifacts.push_back("cumulative_cost.csv");
    }
    write_file(dir / "config.json", dump(config));
    artifacts.push_back("config.json");
    if (emits(s, "summary")) artifacts.push_back("summary.json");

    summary["status"] = "ok";
    summary["c_dyn_total"] = normalizer;
    summary["initial_sigma"] = initial.sigma;
    summary["results"] = results;
    if (results.contains("dyn") && results.contains("emd")) {
      summary["cost_ratio_emd_over_dyn"] =
          results["emd"]["total_cost"].get<double>() / results["dyn"]["total_cost"].get<double>();
    }
    summary["artifacts"] = artifacts;
    if (emits(s, "summary")) write_file(dir / "summary.json", dump(summary));

    out << "world " << to_string(s.world) << ", n = " << s.scenario.n << ", seed "
        << s.scenario.seed << ", sum c_dyn = " << short_number(normalizer) << "\n";
    out << "policy  total_cost    normalized  status             switches  solves\n";
    for (const SimulationTrace& t : traces) {
      out << std::left << std::setw(8) << to_string(t.policy) << std::setw(14)
          << short_number(t.total_cost) << std::setw(12) << short_number(t.total_cost / normalizer)
          << std::setw(19) << to_string(t.status) << std::setw(10) << t.total_switches()
          << t.assignment_solves << "\n";
    }
    out << "artifacts written to " << dir.string() << "\n";
    return kOk;
  } catch (const std::exception& e) {
    summary["status"] = "error";
    summary["error"] = e.what();
    try {
      fs::create_directories(dir);
      write_file(dir / "summary.json", dump(summary));
    } catch (const std::exception&) {
    }
    err << "run failed: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_sweep(const Settings& s, std::ostream& out, std::ostream& err) {
  const fs::path dir(s.output_dir);
  Json summary = base_summary(s, "sweep");
  try {
    fs::create_directories(dir);
    Json rows = Json::array();
    std::ostringstream table;
    table << "n,runs,succeeded,failed,both_completed,reliable,mean_gap,stddev_gap,"
             "mean_switches,mean_j_dyn,mean_j_emd,mean_ratio,dominance_violations,"
             "max_dyn_history_length\n";
    out << "n     succeeded  mean_gap      stddev_gap    mean_switches  mean_ratio\n";
    for (Index size : s.sizes) {
      ScenarioSpec spec = s.scenario;
      spec.n = size;
      const MonteCarloReport report =
          monte_carlo(spec, s.engagement, s.runs, s.jobs, s.histogram_bins);
      const std::string tag = "n" + std::to_string(size);
      int violations = 0;
      int max_history = 0;
      for (const RunRecord& r : report.runs) {
        if (r.both_completed() && r.j_emd < r.j_dyn - 0.005 * r.j_dyn) ++violations;
        max_history = std::max(max_history, r.dyn_history_length);
      }
      if (emits(s, "summary")) {
        Json rep = to_json(report, s.timings);
        rep["config"] = s.to_json();
        write_file(dir / ("report_" + tag + ".json"), dump(rep));
        std::ostringstream csv;
        write_report_csv(csv, report, s.timings);
        write_file(dir / ("report_" + tag + ".csv"), csv.str());
      }
      if (emits(s, "histogram")) {
        std::ostringstream csv;
        write_histogram_csv(csv, report.gap_histogram);
        write_file(dir / ("histogram_" + tag + ".csv"), csv.str());
      }
      const Aggregates& a = report.aggregates;
      rows.push_back({{"n", size},
                      {"aggregates", to_json(a)},
                      {"dominance_violations", violations},
                      {"max_dyn_history_length", max_history}});
      table << size << ',' << s.runs << ',' << a.succeeded << ',' << a.failed << ','
            << a.both_completed << ',' << (a.reliable ? 1 : 0) << ','
            << format_double(a.mean_gap) << ',' << format_double(a.stddev_gap) << ','
            << format_double(a.mean_switches) << ',' << format_double(a.mean_j_dyn) << ','
            << format_double(a.mean_j_emd) << ',' << format_double(a.mean_ratio) << ','
            << violations << ',' << max_history << '\n';
      out << std::left << std::setw(6) << size << std::setw(11) << a.succeeded << std::setw(14)
          << short_number(a.mean_gap) << std::setw(14) << short_number(a.stddev_gap)
          << std::setw(15) << short_number(a.mean_switches) << short_number(a.mean_ratio)
          << "\n";
    }
    auto increasing = [&](const char* key) {
      for (std::size_t k = 1; k < rows.size(); ++k) {
        if (!(rows[k]["aggregates"][key].get<double>() >
              rows[k - 1]["aggregates"][key].get<double>())) {
          return false;
        }
      }
      return true;
    };
    summary["status"] = "ok";
    summary["sizes"] = rows;
    summary["mean_gap_increasing"] = increasing("mean_gap");
    summary["mean_switches_increasing"] = increasing("mean_switches");
    if (emits(s, "summary")) {
      write_file(dir / "sweep_summary.json", dump(summary));
      write_file(dir / "sweep_summary.csv", table.str());
    }
    write_file(dir / "config.json", dump(s.to_json()));
    out << "artifacts written to " << dir.string() << "\n";
    return kOk;
  } catch (const std::exception& e) {
    summary["status"] = "error";
    summary["error"] = e.what();
    try {
      fs::create_directories(dir);
      write_file(dir / "sweep_summary.json", dump(summary));
    } catch (const std::exception&) {
    }
    err << "sweep failed: " << e.what() << "\n";
    return kRuntimeError;
  }
}

int cmd_verify(bool json, const std::string& fault, std::ostream& out, std::ostream& err) {
  std::vector<OracleResult> results;
  try {
    results = run_oracles(fault);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  const bool all = std::all_of(results.begin(), results.end(),
                               [](const OracleResult& r) { return r.passed; });
  if (json) {
    Json j = Json::array();
    for (const auto& r : results) {
      j.push_back({{"oracle", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    out << Json({{"passed", all}, {"oracles", j}}).dump(2) << "\n";
  } else {
    for (const auto& r : results) {
      out << std::left << std::setw(26) << r.name << (r.passed ? "PASS  " : "FAIL  ") << r.detail
          << "\n";
    }
    out << (all ? "all oracles passed" : "oracle failure") << "\n";
  }
  for (const auto& r : results) {
    if (!r.passed) err << "oracle failed: " << r.name << "\n";
  }
  return all ? kOk : kOracleFailure;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capability-aware swarm assignment simulator"};
  app.require_subcommand(1);
  Flags flags;
  bool json = false;
  std::string fault;

  auto add_shared = [&](CLI::App* cmd) {
    cmd->add_option_function<std::string>("--config", [&](const std::string& v) { flags.config_path = v; },
                                          "JSON config file");
    cmd->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { flags.seed = v; },
                                            "Master seed");
    cmd->add_option_function<std::string>("--world", [&](const std::string& v) { flags.world = v; },
                                          "double-integrator | quadcopter");
    cmd->add_option_function<Index>("--n", [&](const Index& v) { flags.n = v; }, "Swarm size");
    cmd->add_option_function<std::string>("--policy", [&](const std::string& v) { flags.policy = v; },
                                          "dyn | emd | both");
    cmd->add_option_function<double>("--metric-exponent",
                                     [&](const double& v) { flags.metric_exponent = v; },
                                     "Euclidean exponent of the baseline");
    cmd->add_option_function<double>("--capture-radius",
                                     [&](const double& v) { flags.capture_radius = v; },
                                     "Capture radius");
    cmd->add_option_function<double>("--horizon", [&](const double& v) { flags.horizon = v; },
                                     "Simulation horizon [s]");
    cmd->add_option_function<double>("--reassign-interval",
                                     [&](const double& v) { flags.reassign_interval = v; },
                                     "Baseline reassignment period [s]");
    cmd->add_option_function<std::string>("--output-dir",
                                          [&](const std::string& v) { flags.output_dir = v; },
                                          "Artifact directory");
    cmd->add_option_function<int>("--jobs", [&](const int& v) { flags.jobs = v; },
                                  "Worker threads for sweeps");
    cmd->add_option_function<std::vector<std::string>>(
        "--emit", [&](const std::vector<std::string>& v) { flags.emit = v; },
        "Artifacts: trace summary histogram cumulative_cost");
    cmd->add_flag("--json", json, "Machine-readable console output");
    cmd->add_flag("--timings", flags.timings, "Record runtimes in reports");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one engagement");
  add_shared(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo over swarm sizes");
  add_shared(sweep);
  sweep->add_option_function<std::vector<Index>>(
      "--sizes", [&](const std::vector<Index>& v) { flags.sizes = v; }, "Swarm sizes");
  sweep->add_option_function<Index>("--runs", [&](const Index& v) { flags.runs = v; },
                                    "Runs per size");
  CLI::App* verify = app.add_subcommand("verify", "Run the built-in oracle suite");
  verify->add_flag("--json", json, "Machine-readable results");
  verify->add_option("--inject-fault", fault, "Corrupt one oracle on purpose (test hook)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (verify->parsed()) return cmd_verify(json, fault, out, err);

  Settings settings;
  try {
    settings = resolve(flags);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (run->parsed()) {
    const int code = cmd_run(settings, out, err);
    if (json && code == kOk) {
      std::ifstream in(fs::path(settings.output_dir) / "summary.json");
      if (in) out << in.rdbuf();
    }
    return code;
  }
  const int code = cmd_sweep(settings, out, err);
  if (json && code == kOk) {
    std::ifstream in(fs::path(settings.output_dir) / "sweep_summary.json");
    if (in) out << in.rdbuf();
  }
  return code;
}

}  // namespace capassign::cli
