#include "drfh/fluid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "drfh/simplex.hpp"

namespace drfh {

namespace {

constexpr double kDegenerateShare = 1e-12;

std::vector<double> unit_weights(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

FluidSolution solve_equalized_share(std::span<const ResourceVector> capacities,
                                    std::span<const UserDemand> users,
                                    std::span<const double> weights) {
  const std::size_t n = users.size();
  const std::size_t k = capacities.size();
  if (n == 0) throw std::invalid_argument("solver needs at least one user");
  if (k == 0) throw std::invalid_argument("solver needs at least one server");
  if (weights.size() != n) throw std::invalid_argument("weight count mismatch");
  const std::size_t m = capacities[0].size();
  for (const UserDemand& u : users) {
    if (u.normalized.size() != m) throw std::invalid_argument("demand dimension mismatch");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
  }

  // Variables: g_il laid out row-major (user-major), then the share g.
  const std::size_t g_var = n * k;
  LpProblem lp;
  lp.objective.assign(g_var + 1, 0.0);
  lp.objective[g_var] = 1.0;

  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<double> row(g_var + 1, 0.0);
      for (std::size_t i = 0; i < n; ++i) row[i * k + l] = users[i].normalized[r];
      lp.add_row(std::move(row), RowSense::le, capacities[l][r]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(g_var + 1, 0.0);
    for (std::size_t l = 0; l < k; ++l) row[i * k + l] = 1.0;
    row[g_var] = -weights[i];
    lp.add_row(std::move(row), RowSense::eq, 0.0);
  }

  const LpSolution sol = solve_lp(lp);

  FluidSolution out;
  out.shares = DominantShareMatrix::zeros(n, k);
  out.per_user_share.assign(n, 0.0);
  if (sol.status != LpStatus::optimal) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      out.shares.at(i, l) = std::max(0.0, sol.x[i * k + l]);
    }
    out.per_user_share[i] = out.shares.row_sum(i);
  }
  out.g_star = sol.x[g_var];

  // The returned point must satisfy the program it claims to solve; a solver
  // that drifted is reported as a failure, never approximated.
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(out.per_user_share[i] - weights[i] * out.g_star) > kFeasibilityTol) {
      out.status = SolveStatus::infeasible;
      return out;
    }
  }
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t r = 0; r < m; ++r) {
      double used = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        used += out.shares.at(i, l) * users[i].normalized[r];
      }
      if (used > capacities[l][r] + kFeasibilityTol) {
        out.status = SolveStatus::infeasible;
        return out;
      }
    }
  }

  out.status = out.g_star > kDegenerateShare ? SolveStatus::optimal : SolveStatus::degenerate;
  return out;
}

FluidSolution solve_drfh(const ClusterSpec& cluster, std::span<const UserDemand> users) {
  const std::vector<double> w = unit_weights(users.size());
  return solve_equalized_share(cluster.servers, users, w);
}

FluidSolution solve_weighted(const ClusterSpec& cluster, std::span<const UserDemand> users) {
  std::vector<double> w(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) w[i] = users[i].weight;
  return solve_equalized_share(cluster.servers, users, w);
}

FluidSolution solve_finite_tasks(const ClusterSpec& cluster,
                                 std::span<const UserDemand> users) {
  const std::size_t n = users.size();
  const std::size_t k = cluster.server_count();
  if (n == 0) throw std::invalid_argument("solver needs at least one user");

  FluidSolution out;
  out.shares = DominantShareMatrix::zeros(n, k);
  out.per_user_share.assign(n, 0.0);
  out.saturated.assign(n, false);
  out.status = SolveStatus::optimal;

  std::vector<ResourceVector> residual(cluster.servers);
  std::vector<bool> frozen(n, false);

  for (std::size_t round = 0; round <= n; ++round) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) {
      if (!frozen[i]) active.push_back(i);
    }
    if (active.empty()) break;

    std::vector<UserDemand> sub_users;
    std::vector<double> sub_weights;
    for (std::size_t i : active) {
      sub_users.push_back(users[i]);
      sub_weights.push_back(users[i].weight);
    }
    const FluidSolution sub = solve_equalized_share(residual, sub_users, sub_weights);
    if (sub.status == SolveStatus::infeasible) {
      out.status = SolveStatus::infeasible;
      return out;
    }

    // Users whose allocation covers their whole budget this round.
    std::vector<std::size_t> done;  // positions within `active`
    for (std::size_t p = 0; p < active.size(); ++p) {
      const UserDemand& u = users[active[p]];
      if (u.task_budget == kInfiniteTasks) continue;
      const double tasks = sub.per_user_share[p] / u.per_task[u.dominant];
      if (tasks >= u.task_budget - 1e-9) done.push_back(p);
    }

    const bool exhausted = sub.g_star <= kDegenerateShare;
    if (done.empty() || exhausted) {
      // Terminal round: everyone still active keeps this round's allocation.
      for (std::size_t p = 0; p < active.size(); ++p) {
        const std::size_t i = active[p];
        for (std::size_t l = 0; l < k; ++l) out.shares.at(i, l) = sub.shares.at(p, l);
      }
      break;
    }

    for (std::size_t p : done) {
      const std::size_t i = active[p];
      const UserDemand& u = users[i];
      const double budget_share = u.task_budget * u.per_task[u.dominant];
      const double got = sub.per_user_share[p];
      const double scale = got > 0.0 ? std::min(1.0, budget_share / got) : 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double g = scale * sub.shares.at(p, l);
        out.shares.at(i, l) = g;
        residual[l] -= g * u.normalized;
      }
      frozen[i] = true;
      out.saturated[i] = true;
    }
  }

  double min_weighted = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    out.per_user_share[i] = out.shares.row_sum(i);
    min_weighted = std::min(min_weighted, out.per_user_share[i] / users[i].weight);
  }
  out.g_star = min_weighted;
  if (out.g_star <= kDegenerateShare) out.status = SolveStatus::degenerate;
  return out;
}

FluidSolution per_server_drf(const ClusterSpec& cluster, std::span<const UserDemand> users) {
  const std::size_t n = users.size();
  const std::size_t k = cluster.server_count();
  const std::size_t m = cluster.resource_count();
  if (n == 0) throw std::invalid_argument("solver needs at least one user");

  FluidSolution out;
  out.shares = DominantShareMatrix::zeros(n, k);
  out.per_user_share.assign(n, 0.0);
  out.status = SolveStatus::optimal;

  for (std::size_t l = 0; l < k; ++l) {
    const ResourceVector& cap = cluster.servers[l];
    // With strictly positive demands, a zero-capacity resource makes the
    // server unusable for everyone.
    bool usable = true;
    for (std::size_t r = 0; r < m; ++r) usable = usable && cap[r] > 0.0;
    if (!usable) continue;

    // Per-server normalized demand: fraction of this server per task, scaled
    // so the per-server dominant component is 1.
    std::vector<ResourceVector> server_norm(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> frac(m);
      for (std::size_t r = 0; r < m; ++r) frac[r] = users[i].per_task[r] / cap[r];
      ResourceVector e{std::move(frac)};
      const double dom = e[e.argmax()];
      std::vector<double> norm(m);
      for (std::size_t r = 0; r < m; ++r) norm[r] = e[r] / dom;
      server_norm[i] = ResourceVector(std::move(norm));
    }

    // Water filling in server-share space: common share s until a resource of
    // this server saturates.
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      double demand_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) demand_sum += server_norm[i][r];
      if (demand_sum > 0.0) s = std::min(s, 1.0 / demand_sum);
    }

    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> alloc(m);
      for (std::size_t r = 0; r < m; ++r) alloc[r] = s * server_norm[i][r] * cap[r];
      const ResourceVector a{std::move(alloc)};
      out.shares.at(i, l) = a.min_ratio_over(users[i].normalized);
    }
  }

  double min_share = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    out.per_user_share[i] = out.shares.row_sum(i);
    min_share = std::min(min_share, out.per_user_share[i]);
  }
  out.g_star = min_share;
  if (out.g_star <= kDegenerateShare) out.status = SolveStatus::degenerate;
  return out;
}

SingleServerDrf drf_single_server(const ResourceVector& capacity,
                                  std::span<const UserDemand> users) {
  if (users.empty()) throw std::invalid_argument("solver needs at least one user");
  const std::size_t m = capacity.size();

  double s = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < m; ++r) {
    double demand_sum = 0.0;
    for (const UserDemand& u : users) demand_sum += u.weight * u.normalized[r];
    if (demand_sum > 0.0) s = std::min(s, capacity[r] / demand_sum);
  }

  SingleServerDrf out;
  out.share = s;
  for (const UserDemand& u : users) {
    out.user_shares.push_back(s * u.weight);
    out.allocations.push_back(s * u.weight * u.normalized);
  }
  return out;
}

}  // namespace drfh
