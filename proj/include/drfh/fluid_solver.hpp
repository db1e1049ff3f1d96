#ifndef DRFH_FLUID_SOLVER_HPP
#define DRFH_FLUID_SOLVER_HPP

#include <span>
#include <vector>

#include "drfh/resource_model.hpp"

namespace drfh {

enum class SolveStatus {
  optimal,     // equalized share strictly positive
  degenerate,  // solvable only at zero share (no server can host some user)
  infeasible,  // solver failure; never silently approximated
};

/// Exact fluid-model allocation: the dominant-share scalars g_il, the
/// equalized (weighted) share g, and per-user totals G_i = sum_l g_il.
struct FluidSolution {
  DominantShareMatrix shares;
  double g_star = 0.0;
  std::vector<double> per_user_share;  // G_i
  SolveStatus status = SolveStatus::infeasible;
  std::vector<bool> saturated;  // finite-task variant: budget reached
};

/// Maximizes the common global dominant share g subject to per-server capacity
/// and the fairness constraint sum_l g_il = g for every user. Globally optimal
/// (linear program); the allocation is reconstructable as A_il = g_il * d_i.
/// User weights are ignored here; see solve_weighted.
FluidSolution solve_drfh(const ClusterSpec& cluster, std::span<const UserDemand> users);

/// Weighted variant: equalizes G_i / w_i. Identical to solve_drfh when all
/// weights are equal. Throws on nonpositive weights.
FluidSolution solve_weighted(const ClusterSpec& cluster, std::span<const UserDemand> users);

/// Finite task budgets: repeatedly solves the weighted program over users that
/// still have tasks, freezing a user at exactly its budget once its allocation
/// covers it and removing its frozen allocation from the remaining capacity.
/// No user ever exceeds its budget.
FluidSolution solve_finite_tasks(const ClusterSpec& cluster,
                                 std::span<const UserDemand> users);

/// Naive per-server baseline: runs single-server progressive filling on every
/// server independently, with each user's dominant resource recomputed per
/// server as argmax_r D_ir / c_lr. Kept as the inefficiency baseline.
FluidSolution per_server_drf(const ClusterSpec& cluster, std::span<const UserDemand> users);

struct SingleServerDrf {
  double share = 0.0;                       // common dominant share s
  std::vector<double> user_shares;          // s * w_i
  std::vector<ResourceVector> allocations;  // s * w_i * d_i
};

/// Classic single-server allocation by water filling: raise a common dominant
/// share for all users until a resource saturates. With strictly positive
/// demands the first saturation blocks everyone, so s = min_r c_r / sum_i w_i d_ir.
SingleServerDrf drf_single_server(const ResourceVector& capacity,
                                  std::span<const UserDemand> users);

/// Shared core: weighted equalized-share program over explicit per-server
/// capacities (not necessarily normalized). Exposed for reduced-capacity
/// re-solves in audits and the finite-task loop.
FluidSolution solve_equalized_share(std::span<const ResourceVector> capacities,
                                    std::span<const UserDemand> users,
                                    std::span<const double> weights);

}  // namespace drfh

#endif  // DRFH_FLUID_SOLVER_HPP
