#include "capassign/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "capassign/error.hpp"

namespace capassign {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586;

Vector draw_state(SplitMix64& rng, const StateLayout& layout,
                  const std::vector<SliceBounds>& bounds) {
  Vector x(layout.dim());
  for (const StateSlice& slice : layout.slices()) {
    auto it = std::find_if(bounds.begin(), bounds.end(),
                           [&](const SliceBounds& b) { return b.slice == slice.name; });
    for (Index k = 0; k < slice.size; ++k) {
      x(slice.begin + k) = rng.uniform(it->bounds.low, it->bounds.high);
    }
  }
  return x;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::uint64_t SplitMix64::next() {
  state_ += kGolden;
  return mix(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  return static_cast<std::uint64_t>(uniform01() * static_cast<double>(bound));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  return mix(master + (k + 1) * kGolden);
}

std::string to_string(World world) {
  return world == World::DoubleIntegrator ? "double-integrator" : "quadcopter";
}

World parse_world(const std::string& name) {
  if (name == "double-integrator" || name == "double_integrator") return World::DoubleIntegrator;
  if (name == "quadcopter") return World::Quadcopter;
  throw Error(ErrorCode::InvalidParameter,
              "unknown world '" + name + "' (expected double-integrator or quadcopter)");
}

ScenarioSpec ScenarioSpec::defaults(World world, Index n, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.world = world;
  spec.n = n;
  spec.seed = seed;
  if (world == World::DoubleIntegrator) {
    spec.agent_bounds = {{"position", {-1000, 1000}}, {"velocity", {-5000, 5000}}};
    spec.target_bounds = {{"position", {-1000, 1000}}, {"velocity", {-1000, 1000}}};
    spec.terminal_bounds = {-1000, 1000};
    Vector q(6);
    q << 1e3, 1e3, 1e3, 0, 0, 0;
    spec.weights = QuadraticCost(q.asDiagonal(), Matrix::Identity(3, 3));
  } else {
    spec.agent_bounds = {{"position", {-100, 100}},
                         {"attitude", {-kTwoPi, kTwoPi}},
                         {"velocity", {-500, 500}},
                         {"rates", {-25, 25}}};
    spec.target_bounds = {{"position", {-100, 100}},
                          {"attitude", {-kTwoPi, kTwoPi}},
                          {"velocity", {-50, 50}},
                          {"rates", {-25, 25}}};
    spec.terminal_bounds = {-100, 100};
    Vector q = Vector::Zero(12);
    q.head(6).setConstant(1e3);
    spec.weights = QuadraticCost(q.asDiagonal(), Matrix::Identity(4, 4));
  }
  return spec;
}

LinearSystem ScenarioSpec::plant() const {
  return world == World::DoubleIntegrator ? double_integrator_3d()
                                          : quadcopter_linearized(quadcopter);
}

void ScenarioSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "n must be >= 1");
  const LinearSystem sys = plant();
  auto check = [&](const std::vector<SliceBounds>& bounds, const char* who) {
    for (const StateSlice& slice : sys.layout().slices()) {
      auto it = std::find_if(bounds.begin(), bounds.end(),
                             [&](const SliceBounds& b) { return b.slice == slice.name; });
      if (it == bounds.end()) {
        throw Error(ErrorCode::InvalidParameter,
                    std::string(who) + " bounds missing slice '" + slice.name + "'");
      }
      if (!(it->bounds.low < it->bounds.high)) {
        throw Error(ErrorCode::InvalidParameter,
                    std::string(who) + " bounds for '" + slice.name + "' need low < high");
      }
    }
  };
  check(agent_bounds, "agent");
  check(target_bounds, "target");
  if (!(terminal_bounds.low < terminal_bounds.high)) {
    throw Error(ErrorCode::InvalidParameter, "terminal bounds need low < high");
  }
  if (weights.state_weight().rows() != sys.state_dim() ||
      weights.control_weight().rows() != sys.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "weights do not match the world's dimensions");
  }
}

EngagementConfig default_engagement_config(World world) {
  EngagementConfig config;
  if (world == World::DoubleIntegrator) {
    config.capture_radius = 1.0;
    config.horizon = 10.0;
  } else {
    config.capture_radius = 0.5;
    config.horizon = 5.0;
  }
  return config;
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario sc;
  sc.spec = spec;
  const LinearSystem plant = spec.plant();
  const StateLayout& layout = plant.layout();
  const auto n = static_cast<std::size_t>(spec.n);
  SplitMix64 rng(spec.seed);

  std::vector<Vector> agents, targets;
  for (std::size_t i = 0; i < n; ++i) agents.push_back(draw_state(rng, layout, spec.agent_bounds));
  for (std::size_t j = 0; j < n; ++j) {
    targets.push_back(draw_state(rng, layout, spec.target_bounds));
  }
  const StateSlice& pos = layout.position();
  for (std::size_t k = 0; k < n; ++k) {
    Vector loc(pos.size);
    for (Index c = 0; c < pos.size; ++c) {
      loc(c) = rng.uniform(spec.terminal_bounds.low, spec.terminal_bounds.high);
    }
    sc.terminal_locations.push_back(loc);
  }
  sc.target_location.resize(n);
  for (std::size_t k = 0; k < n; ++k) sc.target_location[k] = static_cast<Index>(k);
  for (std::size_t k = n; k-- > 1;) {
    std::swap(sc.target_location[k], sc.target_location[rng.below(k + 1)]);
  }

  // All targets share one reference tracker; only the reference differs.
  const TrackingPolicy reference_tracker =
      synthesize_tracker(plant, stationary_reference(plant), spec.weights);
  Engagement& eng = sc.engagement;
  eng.weights = spec.weights;
  for (std::size_t j = 0; j < n; ++j) {
    Vector reference = Vector::Zero(plant.state_dim());
    reference.segment(pos.begin, pos.size) =
        sc.terminal_locations[static_cast<std::size_t>(sc.target_location[j])];
    eng.agent_dynamics.push_back(plant);
    eng.target_dynamics.push_back(closed_loop_target(plant, reference_tracker, reference));
  }
  eng.initial = SwarmState::initial(std::move(agents), std::move(targets));
  return sc;
}

Aggregates aggregate(const std::vector<RunRecord>& runs) {
  Aggregates a;
  a.requested = static_cast<Index>(runs.size());
  double sum_dyn = 0, sum_emd = 0, sum_gap = 0, sum_ratio = 0, sum_switch = 0;
  for (const RunRecord& r : runs) {
    if (!r.ok) {
      ++a.failed;
      continue;
    }
    ++a.succeeded;
    if (r.both_completed()) ++a.both_completed;
    sum_dyn += r.j_dyn;
    sum_emd += r.j_emd;
    sum_gap += r.gap();
    sum_ratio += r.j_emd / r.j_dyn;
    sum_switch += r.emd_switches;
  }
  a.reliable = a.requested > 0 &&
               static_cast<double>(a.succeeded) >= 0.95 * static_cast<double>(a.requested);
  if (a.succeeded == 0) return a;
  const double k = static_cast<double>(a.succeeded);
  a.mean_j_dyn = sum_dyn / k;
  a.mean_j_emd = sum_emd / k;
  a.mean_gap = sum_gap / k;
  a.mean_ratio = sum_ratio / k;
  a.mean_switches = sum_switch / k;
  if (a.succeeded > 1) {
    double ss = 0;
    for (const RunRecord& r : runs) {
      if (r.ok) ss += (r.gap() - a.mean_gap) * (r.gap() - a.mean_gap);
    }
    a.stddev_gap = std::sqrt(ss / (k - 1.0));
  }
  return a;
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidParameter, "histogram needs at least one bin");
  Histogram h;
  if (values.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + b * width);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

RunRecord run_pair(const ScenarioSpec& spec, const EngagementConfig& config, Index run) {
  RunRecord rec;
  rec.run = run;
  rec.seed = spec.seed;
  try {
    const Scenario sc = generate(spec);
    TrackerCache trackers;
    auto start = std::chrono::steady_clock::now();
    const SimulationTrace dyn = run_dynamics_policy(sc.engagement, config, trackers);
    rec.runtime_dyn_s = seconds_since(start);
    start = std::chrono::steady_clock::now();
    const SimulationTrace emd = run_emd_policy(sc.engagement, config, trackers);
    rec.runtime_emd_s = seconds_since(start);

    rec.j_dyn = dyn.total_cost;
    rec.j_emd = emd.total_cost;
    rec.c_dyn_total = dyn.initial_assignment_cost;
    rec.emd_switches = emd.total_switches();
    rec.dyn_history_length = static_cast<int>(dyn.history.size());
    rec.emd_solves = emd.assignment_solves;
    rec.dyn_status = dyn.status;
    rec.emd_status = emd.status;
    rec.dyn_end_time = dyn.end_time;
    rec.emd_end_time = emd.end_time;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.failure = e.what();
  }
  return rec;
}

MonteCarloReport monte_carlo(const ScenarioSpec& spec, const EngagementConfig& config,
                             Index runs, int jobs, int histogram_bins) {
  if (runs < 1) throw Error(ErrorCode::InvalidParameter, "runs must be >= 1");
  if (jobs < 1) throw Error(ErrorCode::InvalidParameter, "jobs must be >= 1");
  spec.validate();
  config.validate();

  MonteCarloReport report;
  report.spec = spec;
  report.config = config;
  report.master_seed = spec.seed;
  report.runs.resize(static_cast<std::size_t>(runs));

  std::atomic<Index> next{0};
  auto worker = [&]() {
    for (Index k = next++; k < runs; k = next++) {
      ScenarioSpec run_spec = spec;
      run_spec.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k));
      report.runs[static_cast<std::size_t>(k)] = run_pair(run_spec, config, k);
    }
  };
  const int threads = static_cast<int>(std::min<Index>(jobs, runs));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  report.aggregates = aggregate(report.runs);
  std::vector<double> gaps;
  for (const RunRecord& r : report.runs) {
    if (r.ok) gaps.push_back(r.gap());
  }
  report.gap_histogram = make_histogram(gaps, histogram_bins);
  return report;
}

}  // namespace capassign
