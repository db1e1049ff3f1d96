#include "drfh/fluid_solver.hpp"

#include <cmath>

#include "doctest.h"
#include "drfh/fairness_audit.hpp"
#include "drfh/rng.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace drfh;

namespace {

double tasks_of(const FluidSolution& sol, const UserDemand& user, std::size_t i) {
  return sol.per_user_share[i] / user.per_task[user.dominant];
}

}  // namespace

TEST_SUITE_BEGIN("fluid_solver");

TEST_CASE("cross-demand pair reaches the equalized share 5/7 and 10 tasks each") {
  const auto pair = drfh::testing::cross_demand_pair();
  const FluidSolution sol = solve_drfh(pair.cluster, pair.users);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(std::fabs(sol.g_star - 5.0 / 7.0) <= 1e-9);
  CHECK(std::fabs(tasks_of(sol, pair.users[0], 0) - 10.0) <= 1e-9);
  CHECK(std::fabs(tasks_of(sol, pair.users[1], 1) - 10.0) <= 1e-9);
  CHECK(shares_feasible(sol.shares, pair.users, pair.cluster));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::fabs(sol.per_user_share[i] - sol.g_star) <= 1e-9);
  }
}

TEST_CASE("a sole user saturates its dominant resource") {
  const std::vector<ResourceVector> raw{ResourceVector{{4.0, 4.0}}};
  const ClusterSpec cluster = normalize_cluster(raw);
  const std::vector<UserDemand> users{derive_demand(ResourceVector{{0.4, 0.4}}, cluster)};
  const FluidSolution sol = solve_drfh(cluster, users);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(std::fabs(sol.g_star - 1.0) <= 1e-9);
}

TEST_CASE("servers that cannot host anyone force a zero share") {
  const std::vector<ResourceVector> raw{ResourceVector{{1.0, 0.0}},
                                        ResourceVector{{0.0, 1.0}}};
  const ClusterSpec cluster = normalize_cluster(raw);
  const std::vector<UserDemand> users{derive_demand(ResourceVector{{0.5, 0.5}}, cluster)};
  const FluidSolution sol = solve_drfh(cluster, users);
  CHECK(sol.status == SolveStatus::degenerate);
  CHECK(sol.g_star <= 1e-9);
}

TEST_CASE("weighted split on one server follows the weights") {
  const std::vector<ResourceVector> raw{ResourceVector{{1.0, 1.0}}};
  const ClusterSpec cluster = normalize_cluster(raw);
  std::vector<UserDemand> users{
      derive_demand(ResourceVector{{0.01, 0.01}}, cluster, 2.0),
      derive_demand(ResourceVector{{0.01, 0.01}}, cluster, 1.0)};
  const FluidSolution sol = solve_weighted(cluster, users);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(std::fabs(sol.per_user_share[0] - 2.0 / 3.0) <= 1e-9);
  CHECK(std::fabs(sol.per_user_share[1] - 1.0 / 3.0) <= 1e-9);
}

TEST_CASE("unit weights reduce the weighted program to the plain one") {
  const auto pair = drfh::testing::cross_demand_pair();
  const FluidSolution weighted = solve_weighted(pair.cluster, pair.users);
  CHECK(std::fabs(weighted.g_star - 5.0 / 7.0) <= 1e-9);
}

TEST_CASE("a weight-w user is equivalent to w unit-weight clones") {
  Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ResourceVector> raw;
    for (int l = 0; l < 3; ++l) {
      raw.push_back(ResourceVector{{rng.log_uniform(0.5, 4.0), rng.log_uniform(0.5, 4.0)}});
    }
    const ClusterSpec cluster = normalize_cluster(raw);
    const ResourceVector d1{{rng.log_uniform(0.01, 0.1) * cluster.raw_totals[0],
                             rng.log_uniform(0.01, 0.1) * cluster.raw_totals[1]}};
    const ResourceVector d2{{rng.log_uniform(0.01, 0.1) * cluster.raw_totals[0],
                             rng.log_uniform(0.01, 0.1) * cluster.raw_totals[1]}};
    std::vector<UserDemand> weighted{derive_demand(d1, cluster, 1.0),
                                     derive_demand(d2, cluster, 3.0)};
    const FluidSolution ws = solve_weighted(cluster, weighted);
    REQUIRE(ws.status == SolveStatus::optimal);
    CHECK(std::fabs(ws.per_user_share[1] / ws.per_user_share[0] - 3.0) <= 1e-6);

    std::vector<UserDemand> clones{derive_demand(d1, cluster), derive_demand(d2, cluster),
                                   derive_demand(d2, cluster), derive_demand(d2, cluster)};
    const FluidSolution cs = solve_drfh(cluster, clones);
    REQUIRE(cs.status == SolveStatus::optimal);
    const double clone_total =
        cs.per_user_share[1] + cs.per_user_share[2] + cs.per_user_share[3];
    CHECK(std::fabs(clone_total - ws.per_user_share[1]) <= 1e-6);
    CHECK(std::fabs(cs.per_user_share[0] - ws.per_user_share[0]) <= 1e-6);
  }
}

TEST_CASE("a binding budget leaves the rest of the cluster idle") {
  const std::vector<ResourceVector> raw{ResourceVector{{1.0, 1.0}}};
  const ClusterSpec cluster = normalize_cluster(raw);
  const std::vector<UserDemand> users{
      derive_demand(ResourceVector{{0.01, 0.01}}, cluster, 1.0, 1.0)};
  const FluidSolution sol = solve_finite_tasks(cluster, users);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.saturated[0]);
  CHECK(std::fabs(sol.per_user_share[0] - 0.01) <= 1e-12);  // exactly one task's worth
}

TEST_CASE("infinite budgets reduce to the plain program") {
  const auto pair = drfh::testing::cross_demand_pair();
  const FluidSolution finite = solve_finite_tasks(pair.cluster, pair.users);
  REQUIRE(finite.status == SolveStatus::optimal);
  CHECK(std::fabs(finite.g_star - 5.0 / 7.0) <= 1e-9);
  CHECK_FALSE(finite.saturated[0]);
  CHECK_FALSE(finite.saturated[1]);
}

TEST_CASE("two-round budget freeze matches the hand solve") {
  const std::vector<ResourceVector> raw{ResourceVector{{1.0, 1.0}}};
  const ClusterSpec cluster = normalize_cluster(raw);
  std::vector<UserDemand> users{
      derive_demand(ResourceVector{{0.01, 0.01}}, cluster, 1.0, 25.0),
      derive_demand(ResourceVector{{0.01, 0.01}}, cluster, 1.0)};
  // Round one equalizes at 1/2 each; user 0's 25-task budget is worth 0.25
  // dominant share, so it freezes there and user 1 takes the remainder.
  const FluidSolution sol = solve_finite_tasks(cluster, users);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.saturated[0]);
  CHECK_FALSE(sol.saturated[1]);
  CHECK(std::fabs(sol.per_user_share[0] - 0.25) <= 1e-9);
  CHECK(std::fabs(sol.per_user_share[1] - 0.75) <= 1e-9);
}

TEST_CASE("budgets are never exceeded on random instances") {
  Rng rng(555);
  for (int trial = 0; trial < 30; ++trial) {
    RandomInstance inst = random_instance(rng.raw(), 4, 3, 3);
    for (UserDemand& u : inst.users) {
      if (rng.uniform() < 0.6) {
        u.task_budget = rng.log_uniform(0.5, 50.0);
      }
    }
    const FluidSolution sol = solve_finite_tasks(inst.cluster, inst.users);
    REQUIRE(sol.status != SolveStatus::infeasible);
    CHECK(shares_feasible(sol.shares, inst.users, inst.cluster));
    for (std::size_t i = 0; i < inst.users.size(); ++i) {
      const double tasks = tasks_of(sol, inst.users[i], i);
      CHECK(tasks <= inst.users[i].task_budget + 1e-6);
    }
  }
}

TEST_CASE("per-server filling on the cross-demand pair wastes capacity") {
  const auto pair = drfh::testing::cross_demand_pair();
  const FluidSolution sol = per_server_drf(pair.cluster, pair.users);
  // 5 tasks on the favorable server, 1 on the other, for both users.
  const double d0 = pair.users[0].per_task[pair.users[0].dominant];
  const double d1 = pair.users[1].per_task[pair.users[1].dominant];
  CHECK(std::fabs(sol.shares.at(0, 0) / d0 - 5.0) <= 1e-9);
  CHECK(std::fabs(sol.shares.at(0, 1) / d0 - 1.0) <= 1e-9);
  CHECK(std::fabs(sol.shares.at(1, 0) / d1 - 1.0) <= 1e-9);
  CHECK(std::fabs(sol.shares.at(1, 1) / d1 - 5.0) <= 1e-9);
  CHECK(std::fabs(tasks_of(sol, pair.users[0], 0) - 6.0) <= 1e-9);
  CHECK(std::fabs(tasks_of(sol, pair.users[1], 1) - 6.0) <= 1e-9);
}

TEST_CASE("per-server filling equals water filling when there is one server") {
  Rng rng(808);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomInstance inst = random_single_server_instance(rng.raw(), 5, 4);
    const FluidSolution per_server = per_server_drf(inst.cluster, inst.users);
    const SingleServerDrf wf = drf_single_server(inst.cluster.servers[0], inst.users);
    for (std::size_t i = 0; i < inst.users.size(); ++i) {
      CHECK(std::fabs(per_server.per_user_share[i] - wf.user_shares[i]) <= 1e-9);
    }
  }
}

TEST_CASE("identical users on identical servers split evenly everywhere") {
  const std::vector<ResourceVector> raw(4, ResourceVector{{2.0, 2.0}});
  const ClusterSpec cluster = normalize_cluster(raw);
  std::vector<UserDemand> users(2, derive_demand(ResourceVector{{0.1, 0.1}}, cluster));
  const FluidSolution naive = per_server_drf(cluster, users);
  const FluidSolution exact = solve_drfh(cluster, users);
  CHECK(std::fabs(naive.per_user_share[0] - exact.per_user_share[0]) <= 1e-9);
  CHECK(std::fabs(naive.per_user_share[0] - 0.5) <= 1e-9);
}

TEST_CASE("water filling on symmetric users halves the server") {
  const ResourceVector cap{{1.0, 1.0}};
  std::vector<UserDemand> users;
  for (int i = 0; i < 2; ++i) {
    UserDemand u;
    u.per_task = ResourceVector{{0.01, 0.01}};
    u.normalized = ResourceVector{{1.0, 1.0}};
    u.dominant = 0;
    users.push_back(u);
  }
  CHECK(std::fabs(drf_single_server(cap, users).share - 0.5) <= 1e-12);
}

TEST_CASE("water filling stops at the first saturated resource") {
  const ResourceVector cap{{1.0, 1.0}};
  std::vector<UserDemand> users(2);
  users[0].per_task = ResourceVector{{0.02, 0.01}};
  users[0].normalized = ResourceVector{{1.0, 0.5}};
  users[0].dominant = 0;
  users[1].per_task = ResourceVector{{0.01, 0.02}};
  users[1].normalized = ResourceVector{{0.5, 1.0}};
  users[1].dominant = 1;
  // s * (1 + 0.5) = 1 on both resources -> s = 2/3.
  CHECK(std::fabs(drf_single_server(cap, users).share - 2.0 / 3.0) <= 1e-12);
}

TEST_CASE("single-server program equals water filling on random instances") {
  Rng rng(424242);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomInstance inst = random_single_server_instance(rng.raw(), 5, 4);
    const FluidSolution lp = solve_drfh(inst.cluster, inst.users);
    const SingleServerDrf wf = drf_single_server(inst.cluster.servers[0], inst.users);
    CHECK(std::fabs(lp.g_star - wf.share) <= 1e-9);
  }
}

TEST_CASE("one resource means the max-min equal split") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomInstance inst = random_single_resource_instance(rng.raw(), 5, 5);
    const FluidSolution lp = solve_drfh(inst.cluster, inst.users);
    const double fair = 1.0 / static_cast<double>(inst.users.size());
    for (double share : lp.per_user_share) CHECK(std::fabs(share - fair) <= 1e-9);
  }
}

TEST_CASE("a common bottleneck is exhausted with equal shares") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const RandomInstance inst = random_bottleneck_instance(rng.raw(), 4, 4, 3);
    const FluidSolution lp = solve_drfh(inst.cluster, inst.users);
    REQUIRE(lp.status == SolveStatus::optimal);
    const std::size_t hot = inst.users[0].dominant;
    double used = 0.0;
    for (std::size_t i = 0; i < inst.users.size(); ++i) {
      CHECK(std::fabs(lp.per_user_share[i] - lp.g_star) <= 1e-6);
      for (std::size_t l = 0; l < inst.cluster.server_count(); ++l) {
        used += lp.shares.at(i, l) * inst.users[i].normalized[hot];
      }
    }
    CHECK(std::fabs(used - 1.0) <= 1e-6);
  }
}

TEST_CASE("scaling a demand vector never changes the share split") {
  Rng rng(2023);
  for (int trial = 0; trial < 20; ++trial) {
    RandomInstance inst = random_instance(rng.raw(), 4, 4, 3);
    const FluidSolution base = solve_drfh(inst.cluster, inst.users);

    std::vector<UserDemand> scaled = inst.users;
    const double alpha = rng.log_uniform(0.2, 5.0);
    const std::size_t m = inst.cluster.resource_count();
    std::vector<double> absolute(m);
    for (std::size_t r = 0; r < m; ++r) {
      absolute[r] = alpha * scaled[0].per_task[r] * inst.cluster.raw_totals[r];
    }
    scaled[0] = derive_demand(ResourceVector(std::move(absolute)), inst.cluster);

    const FluidSolution after = solve_drfh(inst.cluster, scaled);
    CHECK(std::fabs(after.g_star - base.g_star) <= 1e-9);
    // Task counts divide by the scale factor.
    const double n_before = base.per_user_share[0] / inst.users[0].per_task[inst.users[0].dominant];
    const double n_after = after.per_user_share[0] / scaled[0].per_task[scaled[0].dominant];
    CHECK(std::fabs(n_after - n_before / alpha) <= 1e-6 * std::max(1.0, n_before));
  }
}

TEST_CASE("some resource is saturated at every optimum") {
  Rng rng(909);
  for (int trial = 0; trial < 40; ++trial) {
    const RandomInstance inst = random_instance(rng.raw(), 5, 5, 4);
    const FluidSolution sol = solve_drfh(inst.cluster, inst.users);
    REQUIRE(sol.status == SolveStatus::optimal);
    bool saturated = false;
    for (std::size_t l = 0; l < inst.cluster.server_count() && !saturated; ++l) {
      for (std::size_t r = 0; r < inst.cluster.resource_count() && !saturated; ++r) {
        double used = 0.0;
        for (std::size_t i = 0; i < inst.users.size(); ++i) {
          used += sol.shares.at(i, l) * inst.users[i].normalized[r];
        }
        saturated = used >= inst.cluster.servers[l][r] - 1e-6;
      }
    }
    CHECK(saturated);
  }
}

TEST_CASE("program optimum matches the grid oracle on micro instances") {
  Rng rng(31415);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomInstance inst = random_instance(rng.raw(), 3, 3, 2);
    const FluidSolution lp = solve_drfh(inst.cluster, inst.users);
    const drfh::testing::GridShareOracle oracle(inst.cluster, inst.users);
    const double grid = oracle.largest_feasible(1e-3);
    CHECK(lp.g_star >= grid - 1e-9);
    CHECK(lp.g_star - grid <= 2e-3);
  }
}

TEST_SUITE_END();
