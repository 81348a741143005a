#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "capassign/integrator.hpp"
#include "capassign/linear_system.hpp"
#include "capassign/tracker.hpp"
#include "capassign/transport.hpp"

namespace capassign {

/// States of both swarms plus the active index sets.
struct SwarmState {
  std::vector<Vector> agent_states;
  std::vector<Vector> target_states;
  std::vector<Index> active_agents;
  std::vector<Index> active_targets;
  double time = 0.0;

  /// All agents and targets active at t = 0.
  static SwarmState initial(std::vector<Vector> agents, std::vector<Vector> targets);
  void validate() const;
};

/// A fully specified engagement: who moves how, and from where.
struct Engagement {
  std::vector<LinearSystem> agent_dynamics;
  /// Closed-loop, autonomous.
  std::vector<LinearSystem> target_dynamics;
  QuadraticCost weights;
  SwarmState initial;

  Index size() const { return static_cast<Index>(agent_dynamics.size()); }
  /// Throws unless counts agree (n = m), dimensions are uniform per swarm and
  /// targets are autonomous.
  void validate() const;
};

struct EngagementConfig {
  double capture_radius = 1.0;     // position units
  double horizon = 10.0;           // s
  double reassign_interval = 0.1;  // s, distance-based policy only
  double metric_exponent = 1.0;    // Euclidean exponent of the baseline
  IntegratorConfig integrator;
  simd::Level simd_level = simd::active_level();

  void validate() const;
};

enum class PolicyKind { Dynamics, Distance };
std::string to_string(PolicyKind kind);

enum class TerminalStatus { Completed, HorizonExceeded };
std::string to_string(TerminalStatus status);

/// Marker for "no target" in sigma vectors.
inline constexpr Index kUnassigned = -1;

struct AssignmentRecord {
  double time = 0.0;
  /// Target of each agent; kUnassigned for inactive agents.
  std::vector<Index> sigma;
  /// True when a sentinel cost entered the solve.
  bool used_sentinel = false;
};

/// One row of the output grid. Matrices hold one column per agent/target.
struct TraceSample {
  double time = 0.0;
  Matrix agent_states;
  Matrix target_states;
  Matrix controls;
  Vector stage_cost;
  Vector cumulative_cost;
  std::vector<Index> assigned;
  std::vector<std::uint8_t> active;
  /// Smallest distance between two active agents (infinity if < 2 active).
  double min_agent_distance = std::numeric_limits<double>::infinity();

  double total_cost() const { return cumulative_cost.sum(); }
};

struct SimulationTrace {
  PolicyKind policy = PolicyKind::Dynamics;
  std::vector<TraceSample> samples;
  std::vector<AssignmentRecord> history;
  std::vector<int> switch_counts;
  /// Capture time per agent; NaN if never captured.
  std::vector<double> exit_times;
  TerminalStatus status = TerminalStatus::HorizonExceeded;
  double end_time = 0.0;
  double total_cost = 0.0;
  /// Number of assignment problems solved.
  int assignment_solves = 0;
  /// Optimal objective of the first solve (sum of c(i, sigma(i))).
  double initial_assignment_cost = 0.0;
  bool used_sentinel = false;
  OdeStats integrator_stats;

  int total_switches() const;
};

struct AssignmentDecision {
  /// sigma over all agent indices; kUnassigned outside the active set.
  std::vector<Index> sigma;
  std::vector<std::shared_ptr<const TrackingPolicy>> policies;
  CostMatrix cost;  // restricted to active agents x active targets
  double total_cost = 0.0;
  bool used_sentinel = false;
};

/// Memoized per-pair tracking policies for the distance-based baseline.
class PolicyCache {
 public:
  PolicyCache(const Engagement& engagement, TrackerCache& trackers)
      : engagement_(engagement), trackers_(trackers),
        table_(engagement.size(), engagement.size()) {}

  std::shared_ptr<const TrackingPolicy> get(Index agent, Index target);

 private:
  const Engagement& engagement_;
  TrackerCache& trackers_;
  PolicyTable table_;
};

/// Solves the assignment over the active pairs of `swarm` under the given
/// metric and returns the policy each active agent should follow.
AssignmentDecision assign(const SwarmState& swarm, const Engagement& engagement,
                          PolicyKind kind, const EngagementConfig& config,
                          TrackerCache& trackers, PolicyCache* distance_policies = nullptr);

/// Assign once at t = 0 with the dynamics cost, then track until capture or
/// horizon.
SimulationTrace run_dynamics_policy(const Engagement& engagement,
                                    const EngagementConfig& config,
                                    TrackerCache& trackers);

/// Reassign by Euclidean distance every reassign_interval.
SimulationTrace run_emd_policy(const Engagement& engagement, const EngagementConfig& config,
                               TrackerCache& trackers);

SimulationTrace run_policy(PolicyKind kind, const Engagement& engagement,
                           const EngagementConfig& config, TrackerCache& trackers);

/// Closed ball: |p_agent - p_target| <= radius.
bool capture_check(const Vector& agent_position, const Vector& target_position,
                   double radius);
bool capture_check(const Vector& agent_state, const StateLayout& agent_layout,
                   const Vector& target_state, const StateLayout& target_layout,
                   double radius);

/// Swarm state at a trace sample (active sets from its flags).
SwarmState swarm_at(const SimulationTrace& trace, std::size_t sample);

}  // namespace capassign
