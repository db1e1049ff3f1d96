#ifndef DRFH_FAIRNESS_AUDIT_HPP
#define DRFH_FAIRNESS_AUDIT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drfh/fluid_solver.hpp"
#include "drfh/sim_engine.hpp"

namespace drfh {

/// Result of one executable property check on one instance.
struct AuditReport {
  std::string property;
  std::uint64_t seed = 0;
  int n = 0;  // users
  int k = 0;  // servers
  int m = 0;  // resources
  bool pass = true;
  double violation = 0.0;  // worst magnitude observed, >= 0
  std::string witness;     // offending pair / misreport / removed user; set on failure
};

std::string to_json_line(const AuditReport& report);

/// Envy-freeness: for every ordered user pair (i, j), the dominant share i
/// could extract from j's allocation, sum_l min_r g_jl d_jr / d_ir, must not
/// exceed i's own share (tolerance 1e-6).
AuditReport audit_envy(const FluidSolution& solution, std::span<const UserDemand> users);

/// Pareto optimality via an oracle program: maximize the total share headroom
/// sum_i t_i over feasible reallocations with every user at G_i + t_i, t >= 0.
/// An optimum above 1e-6 means some allocation dominates.
AuditReport audit_pareto(const FluidSolution& solution, const ClusterSpec& cluster,
                         std::span<const UserDemand> users);

/// Truthfulness fuzz: random log-uniform misreports (factors in [1/10, 10]) of
/// each user's demand; the misreporter's true task count from the allocation
/// it receives must not beat the truthful count. A sampled check, not a proof.
AuditReport audit_truthfulness(const ClusterSpec& cluster, std::span<const UserDemand> users,
                               int misreports_per_user, std::uint64_t seed);

/// Population monotonicity: removing any single user must not lower the
/// equalized share of the remaining users.
AuditReport audit_population_monotonicity(const ClusterSpec& cluster,
                                          std::span<const UserDemand> users);

struct RandomInstance {
  ClusterSpec cluster;
  std::vector<UserDemand> users;
  std::uint64_t seed = 0;
};

/// n in [2, max_n], k in [1, max_k], m in [1, max_m]; log-uniform capacities
/// and demands. Deterministic per seed.
RandomInstance random_instance(std::uint64_t seed, int max_n, int max_k, int max_m);
RandomInstance random_single_server_instance(std::uint64_t seed, int max_n, int max_m);
RandomInstance random_single_resource_instance(std::uint64_t seed, int max_n, int max_k);
/// All users share one dominant resource; off-dominant demands are scaled so
/// the common bottleneck binds on every server.
RandomInstance random_bottleneck_instance(std::uint64_t seed, int max_n, int max_k, int max_m);

struct CampaignConfig {
  int instances = 1000;
  std::uint64_t seed = 1;
  int max_n = 5;
  int max_k = 5;
  int max_m = 4;
  int misreports_per_user = 20;
  int jobs = 0;  // worker pool size; 0 = hardware concurrency
};

struct CampaignResult {
  std::vector<AuditReport> reports;
  bool all_pass = true;
};

/// Suites: envy, pareto, population, truthfulness, reductions (single-server,
/// single-resource, bottleneck equivalences), or all.
CampaignResult run_property_campaign(const std::string& suite, const CampaignConfig& config);

struct SharingIncentiveRow {
  std::string user;
  double dedicated_ratio = 0.0;  // task completion ratio alone on its own servers
  double shared_ratio = 0.0;     // ratio in the shared cluster
  bool worse = false;
};

struct SharingIncentiveReport {
  std::vector<SharingIncentiveRow> rows;
  double worse_fraction = 0.0;
  int dedicated_cloud_size = 0;  // floor(k / n) servers per user
};

/// Dedicated-cloud benchmark: partitions servers into one floor(k/n)-server
/// cloud per user by seeded stratified sampling over capacity classes, runs
/// each user's workload alone on its cloud and everyone together on the full
/// cluster, and reports per-user completion ratios plus the fraction strictly
/// worse off when sharing.
SharingIncentiveReport sharing_incentive_benchmark(const ClusterSpec& cluster,
                                                   const Workload& workload,
                                                   const SchedulerPolicy& policy,
                                                   std::uint64_t seed,
                                                   double horizon = 0.0,
                                                   double sample_interval = 10.0);

}  // namespace drfh

#endif  // DRFH_FAIRNESS_AUDIT_HPP
