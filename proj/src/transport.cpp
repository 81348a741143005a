#include "capassign/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "capassign/error.hpp"

namespace capassign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string pair_label(Index i, Index j) {
  std::ostringstream os;
  os << "pair (agent " << i << ", target " << j << ")";
  return os.str();
}

// Rotates sigma so that, among assignments whose edges are all tight under
// the final duals, the lexicographically smallest one is returned.
void lexicographic_tie_break(const std::vector<double>& c, const std::vector<double>& u,
                             const std::vector<double>& v, std::vector<Index>& sigma) {
  const Index n = static_cast<Index>(sigma.size());
  double scale = 1.0;
  for (double x : c) scale = std::max(scale, std::abs(x));
  const double tol = 1e-11 * static_cast<double>(n) * scale;
  auto tight = [&](Index i, Index j) {
    return (c[static_cast<std::size_t>(i * n + j)] - u[i]) - v[j] <= tol;
  };

  std::vector<Index> owner(n);
  for (Index i = 0; i < n; ++i) owner[sigma[i]] = i;

  std::vector<Index> parent_row(n);
  std::vector<char> seen(n);
  for (Index i = 0; i < n; ++i) {
    const Index current = sigma[i];
    for (Index j = 0; j < current; ++j) {
      if (!tight(i, j) || owner[j] < i) continue;
      // Alternating path from owner[j] to `current` through unfixed rows.
      std::fill(seen.begin(), seen.end(), 0);
      std::deque<Index> queue{owner[j]};
      seen[j] = 1;
      bool found = false;
      while (!queue.empty() && !found) {
        const Index r = queue.front();
        queue.pop_front();
        for (Index col = 0; col < n; ++col) {
          if (seen[col] || !tight(r, col)) continue;
          if (col == current) {
            parent_row[col] = r;
            found = true;
            break;
          }
          if (owner[col] <= i) continue;
          seen[col] = 1;
          parent_row[col] = r;
          queue.push_back(owner[col]);
        }
      }
      if (!found) continue;
      Index col = current;
      while (true) {
        const Index r = parent_row[col];
        const Index prev = sigma[r];
        sigma[r] = col;
        owner[col] = r;
        if (r == owner[j] && prev == j) break;
        col = prev;
      }
      sigma[i] = j;
      owner[j] = i;
      break;
    }
  }
}

}  // namespace

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Vector> locations) {
  DiscreteMeasure m;
  m.weights = uniform_weights(static_cast<Index>(locations.size()));
  m.locations = std::move(locations);
  return m;
}

void DiscreteMeasure::validate() const {
  if (static_cast<Index>(locations.size()) != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "measure locations and weights differ in length");
  }
  if (weights.size() == 0 || (weights.array() < 0.0).any() ||
      std::abs(weights.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidParameter, "measure weights must lie in the simplex");
  }
}

Vector uniform_weights(Index n) {
  return Vector::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

std::string Metric::describe() const {
  if (kind == MetricKind::Dynamics) return "dynamics";
  std::ostringstream os;
  os << "euclidean(" << exponent << ")";
  return os.str();
}

bool CostMatrix::is_sentinel(Index i, Index j) const {
  return std::any_of(failures.begin(), failures.end(), [&](const PairFailure& f) {
    return f.agent == i && f.target == j;
  });
}

double Coupling::marginal_error() const {
  const double rows = (matrix.rowwise().sum() - row_marginal).cwiseAbs().maxCoeff();
  const double cols = (matrix.colwise().sum().transpose() - col_marginal).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

bool Assignment::is_permutation() const {
  std::vector<char> hit(sigma.size(), 0);
  for (Index j : sigma) {
    if (j < 0 || j >= size() || hit[j]) return false;
    hit[j] = 1;
  }
  return true;
}

double Assignment::cost(const Matrix& c) const {
  double total = 0.0;
  for (Index i = 0; i < size(); ++i) total += c(i, sigma[i]);
  return total;
}

CostMatrix euclidean_cost(const std::vector<Vector>& agents, const StateLayout& agent_layout,
                          const std::vector<Vector>& targets,
                          const StateLayout& target_layout, double exponent,
                          simd::Level level) {
  if (!(exponent >= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "Euclidean exponent must be >= 1");
  }
  const auto& pa = agent_layout.position();
  const auto& pt = target_layout.position();
  if (pa.size != pt.size) {
    throw Error(ErrorCode::DimensionMismatch, "agent and target position slices differ");
  }
  const std::size_t n = agents.size();
  const std::size_t m = targets.size();
  const std::size_t dim = static_cast<std::size_t>(pa.size);
  std::vector<double> a(n * dim), b(dim * m), out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    if (agents[i].size() != agent_layout.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "agent state size");
    }
    for (std::size_t k = 0; k < dim; ++k) a[i * dim + k] = agents[i](pa.begin + k);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (targets[j].size() != target_layout.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "target state size");
    }
    for (std::size_t k = 0; k < dim; ++k) b[k * m + j] = targets[j](pt.begin + k);
  }
  simd::pairwise_distance(level, a, n, b, m, dim, exponent, out);
  CostMatrix cm;
  cm.metric = Metric::euclidean(exponent);
  cm.entries = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(out.data(), n, m);
  return cm;
}

std::shared_ptr<const TrackerCore> TrackerCache::core(const LinearSystem& agent,
                                                      const LinearSystem& target,
                                                      const QuadraticCost& cost) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (const Entry& e : entries_) {
    if (e.agent_drift == agent.drift() && e.agent_input == agent.input() &&
        e.target_drift == target.drift() && e.cost == cost) {
      return e.core;
    }
  }
  auto core = synthesize_tracker_core(agent, target, cost);
  ++syntheses_;
  entries_.push_back({agent.drift(), agent.input(), target.drift(), cost, core});
  return core;
}

long TrackerCache::synthesis_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return syntheses_;
}

void TrackerCache::clear() {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.clear();
  syntheses_ = 0;
}

DynamicsCost dynamics_cost(const std::vector<Vector>& agents,
                           const std::vector<LinearSystem>& agent_dynamics,
                           const std::vector<Vector>& targets,
                           const std::vector<LinearSystem>& target_dynamics,
                           const QuadraticCost& weights, TrackerCache& cache,
                           FailureMode failure_mode, simd::Level level) {
  const Index n = static_cast<Index>(agents.size());
  const Index m = static_cast<Index>(targets.size());
  if (static_cast<Index>(agent_dynamics.size()) != n ||
      static_cast<Index>(target_dynamics.size()) != m) {
    throw Error(ErrorCode::DimensionMismatch, "one dynamics model per agent and target");
  }
  for (Index i = 0; i < n; ++i) {
    if (agents[i].size() != agent_dynamics[i].state_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "agent state size");
    }
  }
  for (Index j = 0; j < m; ++j) {
    if (targets[j].size() != target_dynamics[j].state_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "target state size");
    }
  }

  DynamicsCost result;
  result.cost.metric = Metric::dynamics();
  result.cost.entries = Matrix::Constant(n, m, kSentinelCost);
  result.policies = PolicyTable(n, m);

  // Agents with identical dynamics share policies against each target.
  std::vector<Index> group_of(n, -1);
  std::vector<Index> representatives;
  for (Index i = 0; i < n; ++i) {
    for (Index g = 0; g < static_cast<Index>(representatives.size()); ++g) {
      if (agent_dynamics[representatives[g]].same_dynamics(agent_dynamics[i])) {
        group_of[i] = g;
        break;
      }
    }
    if (group_of[i] < 0) {
      group_of[i] = static_cast<Index>(representatives.size());
      representatives.push_back(i);
    }
  }

  auto fail = [&](Index i, Index j, const Error& e) {
    if (failure_mode == FailureMode::Throw) {
      throw Error(e.code(), pair_label(i, j) + ": " + e.what());
    }
    result.cost.failures.push_back({i, j, e.what()});
  };

  for (Index g = 0; g < static_cast<Index>(representatives.size()); ++g) {
    const LinearSystem& agent = agent_dynamics[representatives[g]];
    std::vector<Index> rows;
    for (Index i = 0; i < n; ++i) {
      if (group_of[i] == g) rows.push_back(i);
    }

    // Synthesize one policy per target; remember which core each uses.
    std::vector<std::shared_ptr<const TrackingPolicy>> per_target(m);
    std::vector<const TrackerCore*> core_of(m, nullptr);
    for (Index j = 0; j < m; ++j) {
      try {
        auto core = cache.core(agent, target_dynamics[j], weights);
        per_target[j] = std::make_shared<const TrackingPolicy>(core, agent.offset(),
                                                               target_dynamics[j].offset());
        core_of[j] = core.get();
      } catch (const Error& e) {
        for (Index i : rows) fail(i, j, e);
      }
    }

    // Columns sharing a core form one bilinear block.
    std::vector<char> done(m, 0);
    for (Index j0 = 0; j0 < m; ++j0) {
      if (done[j0] || !core_of[j0]) continue;
      const TrackerCore& core = *core_of[j0];
      std::vector<Index> cols;
      for (Index j = j0; j < m; ++j) {
        if (!done[j] && core_of[j] == core_of[j0]) {
          cols.push_back(j);
          done[j] = 1;
        }
      }
      const std::size_t nr = rows.size();
      const std::size_t nc = cols.size();
      const std::size_t d = static_cast<std::size_t>(agent.state_dim());
      std::vector<double> x(nr * d), alpha(nr), w(d * nc), beta(nc), out(nr * nc);
      for (std::size_t r = 0; r < nr; ++r) {
        const Vector& xi = agents[rows[r]];
        for (std::size_t k = 0; k < d; ++k) x[r * d + k] = xi(static_cast<Index>(k));
        alpha[r] = core.agent_quadratic(xi);
      }
      std::vector<char> column_ok(nc, 1);
      for (std::size_t c = 0; c < nc; ++c) {
        const Index j = cols[c];
        try {
          const auto terms = per_target[j]->target_terms(targets[j]);
          for (std::size_t k = 0; k < d; ++k) w[k * nc + c] = terms.w(static_cast<Index>(k));
          beta[c] = terms.beta;
        } catch (const Error& e) {
          column_ok[c] = 0;
          for (Index i : rows) fail(i, j, e);
        }
      }
      simd::bilinear_cost(level, x, alpha, nr, w, beta, nc, d, out);
      for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
          if (!column_ok[c]) continue;
          const double value = out[r * nc + c];
          const Index i = rows[r];
          const Index j = cols[c];
          if (!std::isfinite(value)) {
            fail(i, j, Error(ErrorCode::NonFiniteState, "cost is not finite"));
            continue;
          }
          result.cost.entries(i, j) = value;
          result.policies.at(i, j) = per_target[j];
        }
      }
    }
  }
  return result;
}

KantorovichResult solve_kantorovich(const CostMatrix& cost, const Vector& a, const Vector& b) {
  return solve_kantorovich(cost.entries, a, b);
}

KantorovichResult solve_kantorovich(const Matrix& cost, const Vector& a, const Vector& b) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  if (a.size() != n || b.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "marginals must match the cost matrix");
  }
  if (n == 0 || m == 0) throw Error(ErrorCode::Infeasible, "empty marginals");
  if (!cost.allFinite()) throw Error(ErrorCode::InvalidParameter, "cost must be finite");
  if ((a.array() < 0.0).any() || (b.array() < 0.0).any() || std::abs(a.sum() - 1.0) > 1e-9 ||
      std::abs(b.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::Infeasible, "marginals must lie in their simplices");
  }

  Matrix flow = Matrix::Zero(n, m);
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> basic =
      Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, m);

  // Least-cost starting basis; exactly one line is retired per cell, which
  // keeps n + m - 1 basic cells spanning a tree even under degeneracy.
  {
    Vector supply = a;
    Vector demand = b;
    std::vector<char> row_alive(n, 1), col_alive(m, 1);
    Index rows_alive = n, cols_alive = m;
    for (Index step = 0; step < n + m - 1; ++step) {
      Index bi = -1, bj = -1;
      double best = kInf;
      for (Index i = 0; i < n; ++i) {
        if (!row_alive[i]) continue;
        for (Index j = 0; j < m; ++j) {
          if (col_alive[j] && cost(i, j) < best) {
            best = cost(i, j);
            bi = i;
            bj = j;
          }
        }
      }
      const double q = std::min(supply(bi), demand(bj));
      flow(bi, bj) = q;
      basic(bi, bj) = 1;
      supply(bi) -= q;
      demand(bj) -= q;
      bool retire_row = supply(bi) <= demand(bj);
      if (retire_row && rows_alive == 1) retire_row = false;
      if (!retire_row && cols_alive == 1) retire_row = true;
      if (retire_row) {
        row_alive[bi] = 0;
        --rows_alive;
      } else {
        col_alive[bj] = 0;
        --cols_alive;
      }
    }
  }

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale * static_cast<double>(n + m);
  const long pivot_cap = 50L * (n + m) * (n + m) + 1000;
  constexpr int kStallLimit = 16;

  // Tree nodes: rows 0..n-1, columns n..n+m-1.
  std::vector<std::vector<Index>> adj(n + m);
  std::vector<double> pot(n + m);
  std::vector<Index> parent(n + m);
  std::vector<char> seen(n + m);

  KantorovichResult result;
  int stall = 0;
  while (true) {
    for (auto& nb : adj) nb.clear();
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        if (basic(i, j)) {
          adj[i].push_back(n + j);
          adj[n + j].push_back(i);
        }
      }
    }
    // Potentials u_i + v_j = c_ij on basic cells.
    std::fill(seen.begin(), seen.end(), 0);
    std::deque<Index> queue{0};
    seen[0] = 1;
    pot[0] = 0.0;
    while (!queue.empty()) {
      const Index node = queue.front();
      queue.pop_front();
      for (Index nb : adj[node]) {
        if (seen[nb]) continue;
        seen[nb] = 1;
        pot[nb] = node < n ? cost(node, nb - n) - pot[node] : cost(nb, node - n) - pot[node];
        queue.push_back(nb);
      }
    }

    // Pricing: Dantzig, or Bland's first-index rule after repeated stalls.
    const bool bland = stall >= kStallLimit;
    Index ei = -1, ej = -1;
    double most_negative = -tol;
    for (Index i = 0; i < n && !(bland && ei >= 0); ++i) {
      for (Index j = 0; j < m; ++j) {
        if (basic(i, j)) continue;
        const double reduced = cost(i, j) - pot[i] - pot[n + j];
        if (reduced < most_negative) {
          ei = i;
          ej = j;
          if (bland) break;
          most_negative = reduced;
        }
      }
    }
    if (ei < 0) break;
    if (++result.pivots > pivot_cap) {
      throw Error(ErrorCode::NoConvergence, "transportation simplex exceeded its pivot cap");
    }

    // Tree path from row ei to column ej closes the cycle.
    std::fill(seen.begin(), seen.end(), 0);
    queue.assign(1, ei);
    seen[ei] = 1;
    parent[ei] = -1;
    while (!queue.empty() && !seen[n + ej]) {
      const Index node = queue.front();
      queue.pop_front();
      for (Index nb : adj[node]) {
        if (seen[nb]) continue;
        seen[nb] = 1;
        parent[nb] = node;
        queue.push_back(nb);
      }
    }
    // Walk back from the column: edges alternate -, +, -, ...
    std::vector<std::pair<Index, Index>> cells;
    for (Index node = n + ej; parent[node] >= 0; node = parent[node]) {
      const Index other = parent[node];
      cells.push_back(node < n ? std::make_pair(node, other - n)
                               : std::make_pair(other, node - n));
    }
    double theta = kInf;
    Index leave = -1;
    for (std::size_t k = 0; k < cells.size(); k += 2) {
      const double f = flow(cells[k].first, cells[k].second);
      const bool better =
          f < theta || (f == theta && leave >= 0 && cells[k] < cells[static_cast<std::size_t>(leave)]);
      if (better) {
        theta = f;
        leave = static_cast<Index>(k);
      }
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double& f = flow(cells[k].first, cells[k].second);
      f = (k % 2 == 0) ? f - theta : f + theta;
    }
    flow(ei, ej) = theta;
    basic(ei, ej) = 1;
    const auto& out = cells[static_cast<std::size_t>(leave)];
    basic(out.first, out.second) = 0;
    flow(out.first, out.second) = 0.0;
    stall = theta > 0.0 ? 0 : stall + 1;
  }

  result.coupling.matrix = flow.cwiseMax(0.0);
  result.coupling.row_marginal = a;
  result.coupling.col_marginal = b;
  result.objective = (cost.array() * result.coupling.matrix.array()).sum();
  return result;
}

MatchingResult solve_matching(const CostMatrix& cost, simd::Level level) {
  return solve_matching(cost.entries, level);
}

MatchingResult solve_matching(const Matrix& cost, simd::Level level) {
  if (cost.rows() != cost.cols()) {
    throw Error(ErrorCode::NonSquare, "matching requires a square cost matrix");
  }
  const Index n = cost.rows();
  MatchingResult result;
  if (n == 0) return result;
  if (!cost.allFinite()) throw Error(ErrorCode::InvalidParameter, "cost must be finite");

  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> c(un * un);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) c[static_cast<std::size_t>(i * n + j)] = cost(i, j);
  }
  std::vector<double> u(un, 0.0), v(un, 0.0), min_slack(un);
  std::vector<std::int32_t> way(un);
  std::vector<std::uint8_t> used(un);
  std::vector<Index> row_of_col(un, -1);

  for (Index i = 0; i < n; ++i) {
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    std::fill(way.begin(), way.end(), -1);
    Index row = i;
    std::int32_t from = -1;
    while (true) {
      const auto scan = simd::relax_row(
          level, std::span<const double>(c.data() + row * n, un), u[row], v, used, min_slack,
          way, from);
      const double delta = scan.delta;
      const Index j1 = static_cast<Index>(scan.column);
      u[i] += delta;
      for (Index j = 0; j < n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      used[j1] = 1;
      from = static_cast<std::int32_t>(j1);
      if (row_of_col[j1] < 0) break;
      row = row_of_col[j1];
    }
    for (std::int32_t j = from; j >= 0;) {
      const std::int32_t prev = way[j];
      row_of_col[j] = prev < 0 ? i : row_of_col[prev];
      j = prev;
    }
  }

  std::vector<Index>& sigma = result.assignment.sigma;
  sigma.assign(un, -1);
  for (Index j = 0; j < n; ++j) sigma[row_of_col[j]] = j;
  lexicographic_tie_break(c, u, v, sigma);
  result.total_cost = result.assignment.cost(cost);
  return result;
}

Assignment assignment_from_coupling(const Coupling& coupling) {
  const Index n = coupling.matrix.rows();
  Assignment a;
  a.sigma.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index j;
    const double top = coupling.matrix.row(i).maxCoeff(&j);
    if (!(top >= 0.5 * coupling.row_marginal(i)) || top <= 0.0) {
      throw Error(ErrorCode::InvalidParameter, "coupling row has no dominant entry");
    }
    a.sigma[static_cast<std::size_t>(i)] = j;
  }
  if (!a.is_permutation()) {
    throw Error(ErrorCode::InvalidParameter, "coupling is not a scaled permutation");
  }
  return a;
}

}  // namespace capassign
