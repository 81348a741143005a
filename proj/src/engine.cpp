#include "capassign/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "capassign/error.hpp"

namespace capassign {
namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

double min_pairwise_distance(const std::vector<Vector>& positions, simd::Level level) {
  const std::size_t n = positions.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  const std::size_t dim = static_cast<std::size_t>(positions.front().size());
  std::vector<double> a(n * dim), b(dim * n), sq(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      a[i * dim + k] = positions[i](static_cast<Index>(k));
      b[k * n + i] = positions[i](static_cast<Index>(k));
    }
  }
  simd::pairwise_distance(level, a, n, b, n, dim, 2.0, sq);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, sq[i * n + j]);
  }
  return std::sqrt(best);
}

class Simulator {
 public:
  Simulator(PolicyKind kind, const Engagement& engagement, const EngagementConfig& config,
            TrackerCache& trackers)
      : kind_(kind),
        eng_(engagement),
        config_(config),
        trackers_(trackers),
        distance_policies_(engagement, trackers),
        n_(engagement.size()),
        d_(engagement.agent_dynamics.front().state_dim()),
        dy_(engagement.target_dynamics.front().state_dim()),
        du_(engagement.agent_dynamics.front().input_dim()),
        target_base_(n_ * d_),
        cost_base_(n_ * (d_ + dy_)) {}

  SimulationTrace run() {
    const double horizon = config_.horizon;
    const double interval = config_.reassign_interval;
    const double time_eps = 1e-9 * config_.integrator.output_dt;

    z_.setZero(n_ * (d_ + dy_ + 1));
    for (Index i = 0; i < n_; ++i) {
      z_.segment(i * d_, d_) = eng_.initial.agent_states[static_cast<std::size_t>(i)];
      z_.segment(target_base_ + i * dy_, dy_) =
          eng_.initial.target_states[static_cast<std::size_t>(i)];
    }
    agent_active_.assign(static_cast<std::size_t>(n_), 0);
    target_active_.assign(static_cast<std::size_t>(n_), 0);
    for (Index i : eng_.initial.active_agents) agent_active_[static_cast<std::size_t>(i)] = 1;
    for (Index j : eng_.initial.active_targets) target_active_[static_cast<std::size_t>(j)] = 1;
    sigma_.assign(static_cast<std::size_t>(n_), kUnassigned);
    policies_.assign(static_cast<std::size_t>(n_), nullptr);

    trace_.policy = kind_;
    trace_.switch_counts.assign(static_cast<std::size_t>(n_), 0);
    trace_.exit_times.assign(static_cast<std::size_t>(n_),
                             std::numeric_limits<double>::quiet_NaN());

    double t = eng_.initial.time;
    long epoch = 0;
    bool first_segment = true;
    OdeRhs rhs = [this](double, const Vector& z, Vector& dz) { derivative(z, dz); };

    while (true) {
      if (active_count() == 0) {
        trace_.status = TerminalStatus::Completed;
        break;
      }
      if (t >= horizon - time_eps) {
        trace_.status = TerminalStatus::HorizonExceeded;
        break;
      }
      double segment_end = horizon;
      if (kind_ == PolicyKind::Distance) {
        if (t >= static_cast<double>(epoch) * interval - time_eps) {
          reassign(t);
          ++epoch;
        }
        segment_end = std::min(static_cast<double>(epoch) * interval, horizon);
      } else if (trace_.history.empty()) {
        reassign(t);
      }
      if (segment_end - t <= time_eps) {
        t = segment_end;
        continue;
      }

      bool skip_first = !first_segment;
      first_segment = false;
      SampleObserver observer = [&](double ts, const Vector& z) {
        if (skip_first) {
          skip_first = false;
          return true;
        }
        return observe(ts, z);
      };
      const OdeResult res = integrate_ode(rhs, t, segment_end, z_, config_.integrator, observer);
      trace_.integrator_stats.accepted_steps += res.stats.accepted_steps;
      trace_.integrator_stats.rejected_steps += res.stats.rejected_steps;
      trace_.integrator_stats.rhs_evaluations += res.stats.rhs_evaluations;
      z_ = res.y_end;
      t = res.t_end;
    }
    trace_.end_time = t;
    trace_.total_cost = z_.tail(n_).sum();
    return std::move(trace_);
  }

 private:
  Index active_count() const {
    return std::count(agent_active_.begin(), agent_active_.end(), 1);
  }

  auto agent_of(const Vector& z, Index i) const { return z.segment(i * d_, d_); }
  auto target_of(const Vector& z, Index j) const {
    return z.segment(target_base_ + j * dy_, dy_);
  }

  SwarmState swarm(double t) const {
    SwarmState s;
    s.time = t;
    for (Index i = 0; i < n_; ++i) {
      s.agent_states.emplace_back(agent_of(z_, i));
      s.target_states.emplace_back(target_of(z_, i));
      if (agent_active_[static_cast<std::size_t>(i)]) s.active_agents.push_back(i);
      if (target_active_[static_cast<std::size_t>(i)]) s.active_targets.push_back(i);
    }
    return s;
  }

  void reassign(double t) {
    const AssignmentDecision decision =
        assign(swarm(t), eng_, kind_, config_, trackers_, &distance_policies_);
    const bool has_previous = !trace_.history.empty();
    for (Index i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!agent_active_[k]) continue;
      if (has_previous && sigma_[k] != decision.sigma[k]) ++trace_.switch_counts[k];
      sigma_[k] = decision.sigma[k];
      policies_[k] = decision.policies[k];
    }
    if (trace_.history.empty()) trace_.initial_assignment_cost = decision.total_cost;
    trace_.history.push_back({t, decision.sigma, decision.used_sentinel});
    trace_.used_sentinel = trace_.used_sentinel || decision.used_sentinel;
    ++trace_.assignment_solves;
  }

  void derivative(const Vector& z, Vector& dz) const {
    dz.setZero();
    for (Index i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!agent_active_[k]) continue;
      const LinearSystem& sys = eng_.agent_dynamics[k];
      const TrackingPolicy& policy = *policies_[k];
      const Vector x = agent_of(z, i);
      const Vector y = target_of(z, sigma_[k]);
      const Vector u = policy.control(x, y);
      dz.segment(i * d_, d_) = sys.drift() * x + sys.input() * u + sys.offset();
      dz(cost_base_ + i) = policy.stage_cost(x, y, u);
    }
    for (Index j = 0; j < n_; ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (!target_active_[k]) continue;
      const LinearSystem& sys = eng_.target_dynamics[k];
      dz.segment(target_base_ + j * dy_, dy_) = sys.drift() * target_of(z, j) + sys.offset();
    }
  }

  bool observe(double ts, const Vector& z) {
    TraceSample s;
    s.time = ts;
    s.agent_states.resize(d_, n_);
    s.target_states.resize(dy_, n_);
    s.controls = Matrix::Zero(du_, n_);
    s.stage_cost = Vector::Zero(n_);
    s.cumulative_cost = z.tail(n_);
    s.assigned = sigma_;
    std::vector<Vector> active_positions;
    bool captured_any = false;
    const StateLayout& agent_layout = eng_.agent_dynamics.front().layout();
    const StateLayout& target_layout = eng_.target_dynamics.front().layout();

    for (Index i = 0; i < n_; ++i) {
      s.agent_states.col(i) = agent_of(z, i);
      s.target_states.col(i) = target_of(z, i);
    }
    for (Index i = 0; i < n_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!agent_active_[k]) continue;
      const Vector x = s.agent_states.col(i);
      const Vector y = s.target_states.col(sigma_[k]);
      const Vector u = policies_[k]->control(x, y);
      s.controls.col(i) = u;
      s.stage_cost(i) = policies_[k]->stage_cost(x, y, u);
      active_positions.push_back(agent_layout.position_of(x));
      if (capture_check(x, agent_layout, y, target_layout, config_.capture_radius)) {
        agent_active_[k] = 0;
        target_active_[static_cast<std::size_t>(sigma_[k])] = 0;
        trace_.exit_times[k] = ts;
        captured_any = true;
      }
    }
    s.min_agent_distance = min_pairwise_distance(active_positions, config_.simd_level);
    s.active = agent_active_;
    trace_.samples.push_back(std::move(s));
    return !captured_any;
  }

  PolicyKind kind_;
  const Engagement& eng_;
  const EngagementConfig& config_;
  TrackerCache& trackers_;
  PolicyCache distance_policies_;
  const Index n_, d_, dy_, du_;
  const Index target_base_, cost_base_;

  Vector z_;
  std::vector<std::uint8_t> agent_active_;
  std::vector<std::uint8_t> target_active_;
  std::vector<Index> sigma_;
  std::vector<std::shared_ptr<const TrackingPolicy>> policies_;
  SimulationTrace trace_;
};

}  // namespace

SwarmState SwarmState::initial(std::vector<Vector> agents, std::vector<Vector> targets) {
  SwarmState s;
  s.agent_states = std::move(agents);
  s.target_states = std::move(targets);
  for (Index i = 0; i < static_cast<Index>(s.agent_states.size()); ++i) {
    s.active_agents.push_back(i);
  }
  for (Index j = 0; j < static_cast<Index>(s.target_states.size()); ++j) {
    s.active_targets.push_back(j);
  }
  return s;
}

void SwarmState::validate() const {
  require(active_agents.size() == active_targets.size(), ErrorCode::InvalidParameter,
          "active agent and target sets must have equal size");
  auto check = [](const std::vector<Index>& idx, std::size_t bound, const char* what) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      require(idx[k] >= 0 && static_cast<std::size_t>(idx[k]) < bound &&
                  (k == 0 || idx[k] > idx[k - 1]),
              ErrorCode::InvalidParameter, what);
    }
  };
  check(active_agents, agent_states.size(), "active agents must be sorted valid indices");
  check(active_targets, target_states.size(), "active targets must be sorted valid indices");
}

void Engagement::validate() const {
  const std::size_t n = agent_dynamics.size();
  require(n > 0, ErrorCode::InvalidParameter, "engagement needs at least one agent");
  require(target_dynamics.size() == n, ErrorCode::InvalidParameter,
          "engagement requires as many targets as agents");
  require(initial.agent_states.size() == n && initial.target_states.size() == n,
          ErrorCode::DimensionMismatch, "initial states must cover every agent and target");
  initial.validate();
  const Index d = agent_dynamics.front().state_dim();
  const Index du = agent_dynamics.front().input_dim();
  const Index dy = target_dynamics.front().state_dim();
  for (std::size_t k = 0; k < n; ++k) {
    require(agent_dynamics[k].state_dim() == d && agent_dynamics[k].input_dim() == du,
            ErrorCode::DimensionMismatch, "agents must share state and input dimensions");
    require(target_dynamics[k].state_dim() == dy, ErrorCode::DimensionMismatch,
            "targets must share a state dimension");
    require(target_dynamics[k].is_autonomous(), ErrorCode::InvalidParameter,
            "targets must be autonomous closed-loop systems");
    require(initial.agent_states[k].size() == d && initial.target_states[k].size() == dy,
            ErrorCode::DimensionMismatch, "initial state size");
  }
}

void EngagementConfig::validate() const {
  require(capture_radius > 0.0, ErrorCode::InvalidParameter, "capture_radius must be > 0");
  require(horizon > 0.0, ErrorCode::InvalidParameter, "horizon must be > 0");
  require(reassign_interval > 0.0, ErrorCode::InvalidParameter,
          "reassign_interval must be > 0");
  require(metric_exponent >= 1.0, ErrorCode::InvalidParameter, "metric_exponent must be >= 1");
  integrator.validate();
}

std::string to_string(PolicyKind kind) {
  return kind == PolicyKind::Dynamics ? "dyn" : "emd";
}

std::string to_string(TerminalStatus status) {
  return status == TerminalStatus::Completed ? "completed" : "horizon_exceeded";
}

int SimulationTrace::total_switches() const {
  int total = 0;
  for (int s : switch_counts) total += s;
  return total;
}

std::shared_ptr<const TrackingPolicy> PolicyCache::get(Index agent, Index target) {
  auto& slot = table_.at(agent, target);
  if (!slot) {
    const LinearSystem& a = engagement_.agent_dynamics[static_cast<std::size_t>(agent)];
    const LinearSystem& b = engagement_.target_dynamics[static_cast<std::size_t>(target)];
    slot = std::make_shared<const TrackingPolicy>(trackers_.core(a, b, engagement_.weights),
                                                  a.offset(), b.offset());
  }
  return slot;
}

AssignmentDecision assign(const SwarmState& swarm, const Engagement& engagement,
                          PolicyKind kind, const EngagementConfig& config,
                          TrackerCache& trackers, PolicyCache* distance_policies) {
  swarm.validate();
  const auto& A = swarm.active_agents;
  const auto& T = swarm.active_targets;
  std::vector<Vector> xs, ys;
  std::vector<LinearSystem> agent_dyn, target_dyn;
  for (Index i : A) {
    xs.push_back(swarm.agent_states[static_cast<std::size_t>(i)]);
    agent_dyn.push_back(engagement.agent_dynamics[static_cast<std::size_t>(i)]);
  }
  for (Index j : T) {
    ys.push_back(swarm.target_states[static_cast<std::size_t>(j)]);
    target_dyn.push_back(engagement.target_dynamics[static_cast<std::size_t>(j)]);
  }

  AssignmentDecision decision;
  decision.sigma.assign(swarm.agent_states.size(), kUnassigned);
  decision.policies.assign(swarm.agent_states.size(), nullptr);
  if (A.empty()) return decision;

  if (kind == PolicyKind::Dynamics) {
    DynamicsCost dc = dynamics_cost(xs, agent_dyn, ys, target_dyn, engagement.weights,
                                    trackers, FailureMode::Sentinel, config.simd_level);
    const MatchingResult match = solve_matching(dc.cost, config.simd_level);
    decision.total_cost = match.total_cost;
    for (std::size_t r = 0; r < A.size(); ++r) {
      const Index c = match.assignment.sigma[r];
      const auto i = static_cast<std::size_t>(A[r]);
      decision.sigma[i] = T[static_cast<std::size_t>(c)];
      decision.policies[i] = dc.policies.at(static_cast<Index>(r), c);
      if (dc.cost.is_sentinel(static_cast<Index>(r), c)) {
        decision.used_sentinel = true;
        std::ostringstream msg;
        msg << "assigned pair (agent " << A[r] << ", target " << T[static_cast<std::size_t>(c)]
            << ") has no tracker";
        for (const auto& f : dc.cost.failures) {
          if (f.agent == static_cast<Index>(r) && f.target == c) msg << ": " << f.reason;
        }
        throw Error(ErrorCode::SteadyStateUndefined, msg.str());
      }
    }
    decision.cost = std::move(dc.cost);
  } else {
    const StateLayout& la = engagement.agent_dynamics.front().layout();
    const StateLayout& lt = engagement.target_dynamics.front().layout();
    decision.cost = euclidean_cost(xs, la, ys, lt, config.metric_exponent, config.simd_level);
    const MatchingResult match = solve_matching(decision.cost, config.simd_level);
    decision.total_cost = match.total_cost;
    PolicyCache local(engagement, trackers);
    PolicyCache& cache = distance_policies ? *distance_policies : local;
    for (std::size_t r = 0; r < A.size(); ++r) {
      const auto i = static_cast<std::size_t>(A[r]);
      const Index j = T[static_cast<std::size_t>(match.assignment.sigma[r])];
      decision.sigma[i] = j;
      decision.policies[i] = cache.get(A[r], j);
    }
  }
  return decision;
}

SimulationTrace run_policy(PolicyKind kind, const Engagement& engagement,
                           const EngagementConfig& config, TrackerCache& trackers) {
  engagement.validate();
  config.validate();
  return Simulator(kind, engagement, config, trackers).run();
}

SimulationTrace run_dynamics_policy(const Engagement& engagement,
                                    const EngagementConfig& config, TrackerCache& trackers) {
  return run_policy(PolicyKind::Dynamics, engagement, config, trackers);
}

SimulationTrace run_emd_policy(const Engagement& engagement, const EngagementConfig& config,
                               TrackerCache& trackers) {
  return run_policy(PolicyKind::Distance, engagement, config, trackers);
}

bool capture_check(const Vector& agent_position, const Vector& target_position,
                   double radius) {
  if (agent_position.size() != target_position.size()) {
    throw Error(ErrorCode::DimensionMismatch, "position sizes differ");
  }
  return (agent_position - target_position).norm() <= radius;
}

bool capture_check(const Vector& agent_state, const StateLayout& agent_layout,
                   const Vector& target_state, const StateLayout& target_layout,
                   double radius) {
  return capture_check(agent_layout.position_of(agent_state),
                       target_layout.position_of(target_state), radius);
}

SwarmState swarm_at(const SimulationTrace& trace, std::size_t sample) {
  const TraceSample& s = trace.samples.at(sample);
  SwarmState swarm;
  swarm.time = s.time;
  const Index n = s.agent_states.cols();
  for (Index i = 0; i < n; ++i) {
    swarm.agent_states.emplace_back(s.agent_states.col(i));
    swarm.target_states.emplace_back(s.target_states.col(i));
    if (s.active[static_cast<std::size_t>(i)]) {
      swarm.active_agents.push_back(i);
      swarm.active_targets.push_back(s.assigned[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(swarm.active_targets.begin(), swarm.active_targets.end());
  return swarm;
}

}  // namespace capassign
