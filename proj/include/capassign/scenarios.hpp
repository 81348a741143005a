#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "capassign/dynamics.hpp"
#include "capassign/engine.hpp"

namespace capassign {

/// SplitMix64 (Steele, Lea, Flood 2014). Each call advances the counter by
/// 0x9E3779B97F4A7C15 and returns the finalized counter:
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Top 53 bits scaled to [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }
  /// floor(uniform01() * bound), in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

/// Seed of run k: the (k+1)-th output of SplitMix64(master).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

enum class World { DoubleIntegrator, Quadcopter };
std::string to_string(World world);
/// Accepts "double-integrator" and "quadcopter".
World parse_world(const std::string& name);

struct Bounds {
  double low = 0.0;
  double high = 0.0;
};

/// Uniform bounds for one named state slice.
struct SliceBounds {
  std::string slice;
  Bounds bounds;
};

struct ScenarioSpec {
  World world = World::DoubleIntegrator;
  Index n = 5;
  std::uint64_t seed = 0;
  /// In layout order; every slice of the world's state must be covered.
  std::vector<SliceBounds> agent_bounds;
  std::vector<SliceBounds> target_bounds;
  /// Per coordinate of the stationary terminal positions.
  Bounds terminal_bounds;
  QuadraticCost weights;
  QuadcopterParams quadcopter;

  /// Bounds and weights for the world as used in the experiments.
  static ScenarioSpec defaults(World world, Index n, std::uint64_t seed);
  LinearSystem plant() const;
  void validate() const;
};

/// Engagement defaults per world: capture radius and horizon.
EngagementConfig default_engagement_config(World world);

struct Scenario {
  ScenarioSpec spec;
  Engagement engagement;
  /// Stationary points the targets settle at, and target -> location map.
  std::vector<Vector> terminal_locations;
  std::vector<Index> target_location;
};

/// Draw order from SplitMix64(spec.seed):
///   1. each agent's state, slice by slice in layout order, component order;
///   2. each target's state, likewise;
///   3. each terminal location, component order;
///   4. Fisher-Yates over locations: for k = n-1 down to 1, swap k with below(k+1).
/// Target j settles at terminal_locations[target_location[j]].
Scenario generate(const ScenarioSpec& spec);

struct RunRecord {
  Index run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  double j_dyn = 0.0;
  double j_emd = 0.0;
  /// Sum of c_dyn over the dynamics assignment at t = 0.
  double c_dyn_total = 0.0;
  int emd_switches = 0;
  int dyn_history_length = 0;
  int emd_solves = 0;
  TerminalStatus dyn_status = TerminalStatus::HorizonExceeded;
  TerminalStatus emd_status = TerminalStatus::HorizonExceeded;
  double dyn_end_time = 0.0;
  double emd_end_time = 0.0;
  double runtime_dyn_s = 0.0;
  double runtime_emd_s = 0.0;

  double gap() const { return j_emd - j_dyn; }
  bool both_completed() const {
    return ok && dyn_status == TerminalStatus::Completed &&
           emd_status == TerminalStatus::Completed;
  }
};

struct Aggregates {
  Index requested = 0;
  Index succeeded = 0;
  Index failed = 0;
  Index both_completed = 0;
  /// False when fewer than 95% of runs succeeded.
  bool reliable = false;
  double mean_j_dyn = 0.0;
  double mean_j_emd = 0.0;
  double mean_gap = 0.0;
  double stddev_gap = 0.0;
  double mean_ratio = 0.0;
  double mean_switches = 0.0;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<Index> counts;
};

struct MonteCarloReport {
  ScenarioSpec spec;
  EngagementConfig config;
  std::uint64_t master_seed = 0;
  std::vector<RunRecord> runs;
  Aggregates aggregates;
  Histogram gap_histogram;
};

/// Aggregates over successful runs; stddev is the sample deviation.
Aggregates aggregate(const std::vector<RunRecord>& runs);

/// Equal-width bins over [min, max] of the values; the last bin is closed.
Histogram make_histogram(const std::vector<double>& values, int bins);

/// Runs both policies on one scenario.
RunRecord run_pair(const ScenarioSpec& spec, const EngagementConfig& config, Index run);

/// `runs` paired realizations; run k uses derive_seed(spec.seed, k). Work is
/// spread over `jobs` threads; records are kept in run order.
MonteCarloReport monte_carlo(const ScenarioSpec& spec, const EngagementConfig& config,
                             Index runs, int jobs = 1, int histogram_bins = 20);

}  // namespace capassign
