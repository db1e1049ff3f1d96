#include "drfh/fairness_audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "drfh/parallel.hpp"
#include "drfh/rng.hpp"
#include "drfh/simplex.hpp"

#include "json.hpp"

namespace drfh {

namespace {

constexpr double kAuditTol = 1e-6;

UserDemand demand_from_shares(ResourceVector per_task_shares, double weight = 1.0) {
  UserDemand u;
  u.dominant = per_task_shares.argmax();
  const double dom = per_task_shares[u.dominant];
  std::vector<double> norm(per_task_shares.size());
  for (std::size_t r = 0; r < per_task_shares.size(); ++r) {
    norm[r] = per_task_shares[r] / dom;
  }
  norm[u.dominant] = 1.0;
  u.per_task = std::move(per_task_shares);
  u.normalized = ResourceVector(std::move(norm));
  u.weight = weight;
  return u;
}

void fill_dims(AuditReport& r, std::size_t n, std::size_t k, std::size_t m) {
  r.n = static_cast<int>(n);
  r.k = static_cast<int>(k);
  r.m = static_cast<int>(m);
}

}  // namespace

std::string to_json_line(const AuditReport& r) {
  nlohmann::json j;
  j["property"] = r.property;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["k"] = r.k;
  j["m"] = r.m;
  j["pass"] = r.pass;
  j["violation"] = r.violation;
  if (!r.witness.empty()) j["witness"] = r.witness;
  return j.dump();
}

AuditReport audit_envy(const FluidSolution& solution, std::span<const UserDemand> users) {
  AuditReport out;
  out.property = "envy_freeness";
  const std::size_t n = users.size();
  const std::size_t k = solution.shares.servers;
  fill_dims(out, n, k, users.empty() ? 0 : users[0].normalized.size());

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // Dominant share user i would obtain from user j's allocation.
      double from_j = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const ResourceVector alloc = solution.shares.at(j, l) * users[j].normalized;
        from_j += alloc.min_ratio_over(users[i].normalized);
      }
      const double excess = from_j - solution.per_user_share[i];
      if (excess > out.violation) {
        out.violation = excess;
        std::ostringstream w;
        w << "user " << i << " prefers allocation of user " << j;
        out.witness = w.str();
      }
    }
  }
  out.pass = out.violation <= kAuditTol;
  if (out.pass) out.witness.clear();
  return out;
}

AuditReport audit_pareto(const FluidSolution& solution, const ClusterSpec& cluster,
                         std::span<const UserDemand> users) {
  AuditReport out;
  out.property = "pareto_optimality";
  const std::size_t n = users.size();
  const std::size_t k = cluster.server_count();
  const std::size_t m = cluster.resource_count();
  fill_dims(out, n, k, m);

  // Oracle program over fresh shares g'_il and headroom t_i:
  //   max sum_i t_i  s.t. capacity; sum_l g'_il - t_i >= G_i; all vars >= 0.
  LpProblem lp;
  const std::size_t tvars = n * k;
  lp.objective.assign(tvars + n, 0.0);
  for (std::size_t i = 0; i < n; ++i) lp.objective[tvars + i] = 1.0;
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<double> row(tvars + n, 0.0);
      for (std::size_t i = 0; i < n; ++i) row[i * k + l] = users[i].normalized[r];
      lp.add_row(std::move(row), RowSense::le, cluster.servers[l][r]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(tvars + n, 0.0);
    for (std::size_t l = 0; l < k; ++l) row[i * k + l] = 1.0;
    row[tvars + i] = -1.0;
    lp.add_row(std::move(row), RowSense::ge, solution.per_user_share[i]);
  }

  const LpSolution oracle = solve_lp(lp);
  if (oracle.status != LpStatus::optimal) {
    out.pass = false;
    out.violation = std::numeric_limits<double>::infinity();
    out.witness = "oracle program failed to solve";
    return out;
  }
  out.violation = std::max(0.0, oracle.objective);
  out.pass = out.violation <= kAuditTol;
  if (!out.pass) {
    std::ostringstream w;
    w << "dominating reallocation adds " << out.violation << " total dominant share";
    out.witness = w.str();
  }
  return out;
}

AuditReport audit_truthfulness(const ClusterSpec& cluster, std::span<const UserDemand> users,
                               int misreports_per_user, std::uint64_t seed) {
  if (users.size() < 2) throw std::invalid_argument("truthfulness audit needs >= 2 users");
  AuditReport out;
  out.property = "truthfulness";
  out.seed = seed;
  const std::size_t n = users.size();
  const std::size_t m = cluster.resource_count();
  fill_dims(out, n, cluster.server_count(), m);

  const FluidSolution truthful = solve_drfh(cluster, users);
  Rng rng(seed);

  for (std::size_t i = 0; i < n; ++i) {
    const UserDemand& truth = users[i];
    const double truthful_tasks = truthful.per_user_share[i] / truth.per_task[truth.dominant];
    for (int rep = 0; rep < misreports_per_user; ++rep) {
      std::vector<double> claimed(m);
      for (std::size_t r = 0; r < m; ++r) {
        claimed[r] = truth.per_task[r] * rng.log_uniform(0.1, 10.0);
      }
      std::vector<UserDemand> reported(users.begin(), users.end());
      reported[i] = demand_from_shares(ResourceVector(claimed), truth.weight);

      const FluidSolution lied = solve_drfh(cluster, reported);
      // True task yield of the allocation granted against the claimed demand.
      double true_tasks = 0.0;
      for (std::size_t l = 0; l < cluster.server_count(); ++l) {
        const ResourceVector granted = lied.shares.at(i, l) * reported[i].normalized;
        true_tasks += granted.min_ratio_over(truth.per_task);
      }
      const double gain = true_tasks - truthful_tasks;  // task units
      if (gain > out.violation) {
        out.violation = gain;
        std::ostringstream w;
        w << "user " << i << " misreport #" << rep << " gains " << gain << " task(s)";
        out.witness = w.str();
      }
    }
  }
  out.pass = out.violation <= kAuditTol;
  if (out.pass) out.witness.clear();
  return out;
}

AuditReport audit_population_monotonicity(const ClusterSpec& cluster,
                                          std::span<const UserDemand> users) {
  AuditReport out;
  out.property = "population_monotonicity";
  fill_dims(out, users.size(), cluster.server_count(), cluster.resource_count());
  if (users.size() < 2) return out;  // nobody left to harm; vacuous pass

  const FluidSolution base = solve_drfh(cluster, users);
  for (std::size_t j = 0; j < users.size(); ++j) {
    std::vector<UserDemand> rest;
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (i != j) rest.push_back(users[i]);
    }
    const FluidSolution without = solve_drfh(cluster, rest);
    const double drop = base.g_star - without.g_star;
    if (drop > out.violation) {
      out.violation = drop;
      std::ostringstream w;
      w << "removing user " << j << " lowers the equalized share by " << drop;
      out.witness = w.str();
    }
  }
  out.pass = out.violation <= kAuditTol;
  if (out.pass) out.witness.clear();
  return out;
}

RandomInstance random_instance(std::uint64_t seed, int max_n, int max_k, int max_m) {
  Rng rng(seed);
  const int n = static_cast<int>(rng.uniform_int(2, std::max(2, max_n)));
  const int k = static_cast<int>(rng.uniform_int(1, std::max(1, max_k)));
  const int m = static_cast<int>(rng.uniform_int(1, std::max(1, max_m)));

  std::vector<ResourceVector> raw;
  for (int l = 0; l < k; ++l) {
    std::vector<double> cap(m);
    for (int r = 0; r < m; ++r) cap[r] = rng.log_uniform(0.5, 8.0);
    raw.push_back(ResourceVector(std::move(cap)));
  }
  RandomInstance out;
  out.seed = seed;
  out.cluster = normalize_cluster(raw);
  for (int i = 0; i < n; ++i) {
    std::vector<double> d(m);
    for (int r = 0; r < m; ++r) {
      d[r] = rng.log_uniform(0.001, 0.1) * out.cluster.raw_totals[r];
    }
    out.users.push_back(derive_demand(ResourceVector(std::move(d)), out.cluster));
  }
  return out;
}

RandomInstance random_single_server_instance(std::uint64_t seed, int max_n, int max_m) {
  Rng rng(seed);
  const int n = static_cast<int>(rng.uniform_int(2, std::max(2, max_n)));
  const int m = static_cast<int>(rng.uniform_int(1, std::max(1, max_m)));
  std::vector<double> cap(m);
  for (int r = 0; r < m; ++r) cap[r] = rng.log_uniform(0.5, 8.0);
  std::vector<ResourceVector> raw{ResourceVector(std::move(cap))};

  RandomInstance out;
  out.seed = seed;
  out.cluster = normalize_cluster(raw);
  for (int i = 0; i < n; ++i) {
    std::vector<double> d(m);
    for (int r = 0; r < m; ++r) {
      d[r] = rng.log_uniform(0.001, 0.1) * out.cluster.raw_totals[r];
    }
    out.users.push_back(derive_demand(ResourceVector(std::move(d)), out.cluster));
  }
  return out;
}

RandomInstance random_single_resource_instance(std::uint64_t seed, int max_n, int max_k) {
  Rng rng(seed);
  const int n = static_cast<int>(rng.uniform_int(2, std::max(2, max_n)));
  const int k = static_cast<int>(rng.uniform_int(1, std::max(1, max_k)));
  std::vector<ResourceVector> raw;
  for (int l = 0; l < k; ++l) raw.push_back(ResourceVector{{rng.log_uniform(0.5, 8.0)}});

  RandomInstance out;
  out.seed = seed;
  out.cluster = normalize_cluster(raw);
  for (int i = 0; i < n; ++i) {
    out.users.push_back(derive_demand(
        ResourceVector{{rng.log_uniform(0.001, 0.1) * out.cluster.raw_totals[0]}},
        out.cluster));
  }
  return out;
}

RandomInstance random_bottleneck_instance(std::uint64_t seed, int max_n, int max_k,
                                          int max_m) {
  Rng rng(seed);
  const int n = static_cast<int>(rng.uniform_int(2, std::max(2, max_n)));
  const int k = static_cast<int>(rng.uniform_int(1, std::max(1, max_k)));
  const int m = static_cast<int>(rng.uniform_int(2, std::max(2, max_m)));

  std::vector<ResourceVector> raw;
  for (int l = 0; l < k; ++l) {
    std::vector<double> cap(m);
    for (int r = 0; r < m; ++r) cap[r] = rng.log_uniform(0.5, 8.0);
    raw.push_back(ResourceVector(std::move(cap)));
  }
  RandomInstance out;
  out.seed = seed;
  out.cluster = normalize_cluster(raw);

  const std::size_t hot = static_cast<std::size_t>(rng.uniform_int(0, m - 1));
  // Cap the off-dominant demands so the common resource binds first on every
  // server: need avg_i d_ir <= c_lr / c_l,hot everywhere.
  double ratio_cap = 1.0;
  for (int l = 0; l < k; ++l) {
    for (int r = 0; r < m; ++r) {
      if (static_cast<std::size_t>(r) == hot) continue;
      ratio_cap = std::min(ratio_cap,
                           out.cluster.servers[l][r] / out.cluster.servers[l][hot]);
    }
  }
  const double scale = 0.5 * ratio_cap;

  for (int i = 0; i < n; ++i) {
    const double dom_share = rng.log_uniform(0.01, 0.1);
    std::vector<double> shares(m);
    for (int r = 0; r < m; ++r) {
      if (static_cast<std::size_t>(r) == hot) {
        shares[r] = dom_share;
      } else {
        shares[r] = dom_share * scale * rng.uniform(0.1, 0.9);
      }
    }
    std::vector<double> absolute(m);
    for (int r = 0; r < m; ++r) absolute[r] = shares[r] * out.cluster.raw_totals[r];
    out.users.push_back(derive_demand(ResourceVector(std::move(absolute)), out.cluster));
  }
  return out;
}

namespace {

AuditReport reduction_single_server(const RandomInstance& inst) {
  AuditReport out;
  out.property = "single_server_reduction";
  out.seed = inst.seed;
  fill_dims(out, inst.users.size(), 1, inst.cluster.resource_count());
  const FluidSolution lp = solve_drfh(inst.cluster, inst.users);
  const SingleServerDrf wf = drf_single_server(inst.cluster.servers[0], inst.users);
  out.violation = std::fabs(lp.g_star - wf.share);
  out.pass = out.violation <= 1e-9;
  if (!out.pass) out.witness = "program and water filling disagree";
  return out;
}

AuditReport reduction_single_resource(const RandomInstance& inst) {
  AuditReport out;
  out.property = "single_resource_reduction";
  out.seed = inst.seed;
  const std::size_t n = inst.users.size();
  fill_dims(out, n, inst.cluster.server_count(), 1);
  const FluidSolution lp = solve_drfh(inst.cluster, inst.users);
  // Max-min fair split of the lone resource under full backlog: 1/n each.
  const double fair = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.violation = std::max(out.violation, std::fabs(lp.per_user_share[i] - fair));
  }
  out.pass = out.violation <= 1e-9;
  if (!out.pass) out.witness = "allocation is not the equal split";
  return out;
}

AuditReport reduction_bottleneck(const RandomInstance& inst) {
  AuditReport out;
  out.property = "bottleneck_fairness";
  out.seed = inst.seed;
  const std::size_t n = inst.users.size();
  fill_dims(out, n, inst.cluster.server_count(), inst.cluster.resource_count());
  const FluidSolution lp = solve_drfh(inst.cluster, inst.users);

  double share_spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    share_spread = std::max(share_spread, std::fabs(lp.per_user_share[i] - lp.g_star));
  }
  const std::size_t hot = inst.users[0].dominant;
  double hot_used = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < inst.cluster.server_count(); ++l) {
      hot_used += lp.shares.at(i, l) * inst.users[i].normalized[hot];
    }
  }
  const double unsat = std::fabs(1.0 - hot_used);  // total hot capacity is 1
  out.violation = std::max(share_spread, unsat);
  out.pass = out.violation <= kAuditTol;
  if (!out.pass) out.witness = "bottleneck resource not exhausted or shares unequal";
  return out;
}

}  // namespace

CampaignResult run_property_campaign(const std::string& suite, const CampaignConfig& cfg) {
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = {"envy", "pareto", "population", "truthfulness", "reductions"};
  } else {
    suites = {suite};
  }

  CampaignResult result;
  for (const std::string& s : suites) {
    std::vector<AuditReport> reports(static_cast<std::size_t>(std::max(0, cfg.instances)));
    if (s == "envy" || s == "pareto" || s == "population") {
      parallel_for(reports.size(), cfg.jobs, [&](std::size_t i) {
        const RandomInstance inst =
            random_instance(split_seed(cfg.seed, i), cfg.max_n, cfg.max_k, cfg.max_m);
        AuditReport r;
        if (s == "envy") {
          const FluidSolution sol = solve_drfh(inst.cluster, inst.users);
          r = audit_envy(sol, inst.users);
        } else if (s == "pareto") {
          const FluidSolution sol = solve_drfh(inst.cluster, inst.users);
          r = audit_pareto(sol, inst.cluster, inst.users);
        } else {
          r = audit_population_monotonicity(inst.cluster, inst.users);
        }
        r.seed = inst.seed;
        reports[i] = std::move(r);
      });
    } else if (s == "truthfulness") {
      parallel_for(reports.size(), cfg.jobs, [&](std::size_t i) {
        const RandomInstance inst =
            random_instance(split_seed(cfg.seed, i), cfg.max_n, cfg.max_k, cfg.max_m);
        reports[i] = audit_truthfulness(inst.cluster, inst.users, cfg.misreports_per_user,
                                        split_seed(inst.seed, 1));
        reports[i].seed = inst.seed;
      });
    } else if (s == "reductions") {
      parallel_for(reports.size(), cfg.jobs, [&](std::size_t i) {
        const std::uint64_t seed = split_seed(cfg.seed, i);
        AuditReport r;
        switch (i % 3) {
          case 0:
            r = reduction_single_server(random_single_server_instance(seed, cfg.max_n, cfg.max_m));
            break;
          case 1:
            r = reduction_single_resource(random_single_resource_instance(seed, cfg.max_n, cfg.max_k));
            break;
          default:
            r = reduction_bottleneck(random_bottleneck_instance(seed, cfg.max_n, cfg.max_k, cfg.max_m));
            break;
        }
        reports[i] = std::move(r);
      });
    } else {
      throw std::invalid_argument("unknown audit suite '" + s + "'");
    }
    for (AuditReport& r : reports) {
      result.all_pass = result.all_pass && r.pass;
      result.reports.push_back(std::move(r));
    }
  }
  return result;
}

SharingIncentiveReport sharing_incentive_benchmark(const ClusterSpec& cluster,
                                                   const Workload& workload,
                                                   const SchedulerPolicy& policy,
                                                   std::uint64_t seed, double horizon,
                                                   double sample_interval) {
  // The users, in deterministic order.
  std::vector<std::string> users;
  for (const Task& t : workload.tasks) users.push_back(t.user_id);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  const std::size_t n = users.size();
  const std::size_t k = cluster.server_count();
  if (n == 0) throw std::invalid_argument("sharing benchmark needs a nonempty workload");
  if (k < n) throw std::invalid_argument("sharing benchmark needs at least one server per user");
  const std::size_t cloud_size = k / n;

  // Stratified partition: group servers by capacity class, shuffle within each
  // class, then deal to the cloud with the fewest servers so every cloud gets
  // a near-identical class mix. k mod n servers stay unassigned.
  std::map<std::pair<double, double>, std::vector<std::size_t>> classes;
  for (std::size_t l = 0; l < k; ++l) {
    classes[{cluster.raw_units[l][0], cluster.raw_units[l][1]}].push_back(l);
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> clouds(n);
  for (auto& [key, members] : classes) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1],
                members[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
    for (std::size_t server : members) {
      std::size_t target = n;
      for (std::size_t c = 0; c < n; ++c) {
        if (clouds[c].size() >= cloud_size) continue;
        if (target == n || clouds[c].size() < clouds[target].size()) target = c;
      }
      if (target == n) break;  // every cloud is full
      clouds[target].push_back(server);
    }
  }

  // Per-user workloads.
  std::map<std::string, Workload> solo;
  for (const Task& t : workload.tasks) solo[t.user_id].tasks.push_back(t);
  for (const SessionEvent& e : workload.joins) solo[e.user_id].joins.push_back(e);
  for (const SessionEvent& e : workload.departs) solo[e.user_id].departs.push_back(e);

  SimConfig config;
  config.policy = policy;
  config.horizon = horizon;
  config.sample_interval = sample_interval;

  const MetricsSeries shared = run_simulation(cluster, workload, config);

  SharingIncentiveReport report;
  report.dedicated_cloud_size = static_cast<int>(cloud_size);
  std::vector<SharingIncentiveRow> rows(n);
  std::vector<Workload const*> solo_ptr(n);
  std::vector<ClusterSpec> dedicated(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<ResourceVector> raw;
    for (std::size_t l : clouds[u]) raw.push_back(cluster.raw_units[l]);
    dedicated[u] = normalize_cluster(raw, cluster.resource_names);
    solo_ptr[u] = &solo.at(users[u]);
  }
  parallel_for(n, 0, [&](std::size_t u) {
    const MetricsSeries alone = run_simulation(dedicated[u], *solo_ptr[u], config);
    SharingIncentiveRow row;
    row.user = users[u];
    row.dedicated_ratio = alone.per_user.at(users[u]).ratio();
    const auto it = shared.per_user.find(users[u]);
    row.shared_ratio = it == shared.per_user.end() ? 1.0 : it->second.ratio();
    row.worse = row.shared_ratio < row.dedicated_ratio - 1e-9;
    rows[u] = std::move(row);
  });

  std::size_t worse = 0;
  for (const SharingIncentiveRow& row : rows) worse += row.worse ? 1 : 0;
  report.rows = std::move(rows);
  report.worse_fraction = static_cast<double>(worse) / static_cast<double>(n);
  return report;
}

}  // namespace drfh
