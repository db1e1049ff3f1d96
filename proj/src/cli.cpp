#include "drfh/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drfh/csv.hpp"
#include "drfh/fairness_audit.hpp"
#include "drfh/fluid_solver.hpp"
#include "drfh/sim_engine.hpp"
#include "drfh/trace_io.hpp"

namespace drfh {

namespace {

constexpr const char* kVersion = "0.1.0";

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// Every run records its effective configuration; the output location itself is
// the one thing left out so reruns into different directories hash-identical.
void write_manifest(const std::string& dir, const std::string& command,
                    const nlohmann::json& options) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["options"] = options;
  write_text(dir + "/manifest.json", j.dump(2) + "\n");
}

std::vector<UserDemand> demands_from_rows(const std::vector<DemandRow>& rows,
                                          const ClusterSpec& cluster) {
  std::vector<UserDemand> users;
  users.reserve(rows.size());
  for (const DemandRow& row : rows) {
    users.push_back(
        derive_demand(row.per_task_absolute, cluster, row.weight, row.task_budget));
  }
  return users;
}

int run_solve(const std::string& cluster_path, const std::string& demands_path,
              const std::string& out_dir) {
  const ClusterSpec cluster = load_cluster_csv(cluster_path);
  const std::vector<DemandRow> rows = load_demands_csv(demands_path);
  if (rows.empty()) throw std::runtime_error(demands_path + ": no users");
  const std::vector<UserDemand> users = demands_from_rows(rows, cluster);

  bool any_budget = false;
  for (const UserDemand& u : users) any_budget = any_budget || u.task_budget != kInfiniteTasks;
  const FluidSolution solution =
      any_budget ? solve_finite_tasks(cluster, users) : solve_weighted(cluster, users);
  if (solution.status == SolveStatus::infeasible) {
    throw std::runtime_error("solver did not converge");
  }

  std::ostringstream report;
  report << "g = " << std::fixed;
  report.precision(6);
  report << solution.g_star << "\n";
  for (std::size_t i = 0; i < users.size(); ++i) {
    const double tasks =
        solution.per_user_share[i] / users[i].per_task[users[i].dominant];
    report << "user " << rows[i].user_id << ": dominant_share=" << solution.per_user_share[i]
           << " tasks=" << tasks;
    if (!solution.saturated.empty() && solution.saturated[i]) report << " (budget reached)";
    report << "\n";
  }
  std::cout << report.str();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json j;
    j["g"] = solution.g_star;
    j["status"] = solution.status == SolveStatus::optimal ? "optimal" : "degenerate";
    for (std::size_t i = 0; i < users.size(); ++i) {
      nlohmann::json ju;
      ju["user_id"] = rows[i].user_id;
      ju["dominant_share"] = solution.per_user_share[i];
      ju["tasks"] = solution.per_user_share[i] / users[i].per_task[users[i].dominant];
      std::vector<double> row(solution.shares.servers);
      for (std::size_t l = 0; l < solution.shares.servers; ++l) {
        row[l] = solution.shares.at(i, l);
      }
      ju["per_server_share"] = row;
      if (!solution.saturated.empty()) ju["budget_reached"] = bool(solution.saturated[i]);
      j["users"].push_back(ju);
    }
    write_text(out_dir + "/solution.json", j.dump(2) + "\n");
    write_manifest(out_dir, "solve",
                   {{"cluster", cluster_path}, {"demands", demands_path}});
  }
  return 0;
}

int run_simulate(const std::string& cluster_path, const std::string& trace_path,
                 const std::string& policy, int slots_per_max, double horizon,
                 double sample_interval, const std::string& out_dir) {
  const ClusterSpec cluster = load_cluster_csv(cluster_path);
  const Workload workload = load_trace(trace_path);

  SimConfig config;
  config.policy.kind = policy_from_name(policy);
  config.policy.slots_per_max_server = slots_per_max;
  config.horizon = horizon;
  config.sample_interval = sample_interval;

  const MetricsSeries series = run_simulation(cluster, workload, config);
  const SummaryStats summary = summarize(series, policy_name(config.policy));

  std::filesystem::create_directories(out_dir);
  write_metrics_csv(series, out_dir + "/metrics.csv");
  write_placements_csv(series, out_dir + "/placements.csv");
  write_summary_json(summary, out_dir + "/summary.json");
  write_manifest(out_dir, "simulate",
                 {{"cluster", cluster_path},
                  {"trace", trace_path},
                  {"policy", policy},
                  {"slots_per_max", slots_per_max},
                  {"horizon", horizon},
                  {"sample_interval", sample_interval}});

  std::cout << "policy " << summary.policy << ": mean utilization";
  for (std::size_t r = 0; r < summary.resource_names.size(); ++r) {
    std::cout << " " << summary.resource_names[r] << "=" << summary.mean_utilization[r];
  }
  std::cout << ", tasks completed " << summary.completed << "/" << summary.submitted
            << "\n";
  return 0;
}

int run_audit(const std::string& suite, int instances, int truth_instances,
              std::uint64_t seed, int max_n, int max_k, int max_m, int misreports,
              int jobs, const std::string& out_dir) {
  CampaignConfig cfg;
  cfg.seed = seed;
  cfg.max_n = max_n;
  cfg.max_k = max_k;
  cfg.max_m = max_m;
  cfg.misreports_per_user = misreports;
  cfg.jobs = jobs;

  std::vector<std::string> suites;
  if (suite == "all") {
    suites = {"envy", "pareto", "population", "truthfulness", "reductions"};
  } else {
    suites = {suite};
  }

  bool all_pass = true;
  std::string lines;
  std::int64_t total = 0;
  for (const std::string& s : suites) {
    cfg.instances = s == "truthfulness" ? truth_instances : instances;
    const CampaignResult result = run_property_campaign(s, cfg);
    all_pass = all_pass && result.all_pass;
    std::int64_t failures = 0;
    for (const AuditReport& r : result.reports) {
      lines += to_json_line(r);
      lines += '\n';
      failures += r.pass ? 0 : 1;
    }
    total += static_cast<std::int64_t>(result.reports.size());
    std::cout << "suite " << s << ": " << result.reports.size() << " instance(s), "
              << failures << " failure(s)\n";
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir + "/audits.jsonl", lines);
    write_manifest(out_dir, "audit",
                   {{"suite", suite},
                    {"instances", instances},
                    {"truth_instances", truth_instances},
                    {"seed", seed},
                    {"max_n", max_n},
                    {"max_k", max_k},
                    {"max_m", max_m},
                    {"misreports", misreports},
                    {"jobs", jobs}});
  }
  std::cout << (all_pass ? "all audits passed" : "AUDIT FAILURES FOUND") << " (" << total
            << " report(s))\n";
  return all_pass ? 0 : 1;
}

int run_gen_cluster(int servers, std::uint64_t seed, const std::string& out_path) {
  const ClusterSpec cluster = sample_cluster(default_server_classes(), servers, seed);
  write_cluster_csv(cluster, out_path);
  write_text(out_path + ".manifest.json",
             nlohmann::json{{"version", kVersion},
                            {"command", "gen-cluster"},
                            {"options", {{"servers", servers}, {"seed", seed}}}}
                     .dump(2) +
                 "\n");
  std::cout << "wrote " << cluster.server_count() << " servers (cpu total "
            << cluster.raw_totals[0] << ", mem total " << cluster.raw_totals[1] << ") to "
            << out_path << "\n";
  return 0;
}

int run_gen_trace(const GeneratorSpec& spec, std::uint64_t seed,
                  const std::string& out_path) {
  const Workload workload = generate_workload(spec, seed);
  write_trace(workload, out_path);
  write_text(out_path + ".manifest.json",
             nlohmann::json{{"version", kVersion},
                            {"command", "gen-trace"},
                            {"options",
                             {{"users", spec.users},
                              {"jobs_per_user", spec.jobs_per_user},
                              {"mean_tasks_per_job", spec.mean_tasks_per_job},
                              {"arrival_span_s", spec.arrival_span_s},
                              {"duration_median_s", spec.duration_median_s},
                              {"duration_sigma", spec.duration_sigma},
                              {"cpu_heavy_fraction", spec.cpu_heavy_fraction},
                              {"dominant_lo", spec.dominant_lo},
                              {"dominant_hi", spec.dominant_hi},
                              {"demand_sigma", spec.demand_sigma},
                              {"shape_ratio_lo", spec.shape_ratio_lo},
                              {"shape_ratio_hi", spec.shape_ratio_hi},
                              {"seed", seed}}}}
                     .dump(2) +
                 "\n");
  std::cout << "wrote " << workload.tasks.size() << " tasks to " << out_path << "\n";
  return 0;
}

int run_compare(const std::string& cluster_path, const std::string& trace_path,
                const std::vector<int>& slot_counts, double horizon,
                double sample_interval, int jobs, const std::string& out_dir) {
  const ClusterSpec cluster = load_cluster_csv(cluster_path);
  const Workload workload = load_trace(trace_path);

  std::vector<SchedulerPolicy> policies;
  policies.push_back({PolicyKind::best_fit_drfh, 0});
  policies.push_back({PolicyKind::first_fit_drfh, 0});
  for (int count : slot_counts) policies.push_back({PolicyKind::slots, count});

  std::vector<BatchRun> runs;
  for (const SchedulerPolicy& p : policies) {
    runs.push_back(BatchRun{&cluster, &workload, SimConfig{p, horizon, sample_interval}});
  }
  const std::vector<MetricsSeries> results = run_batch(runs, jobs);

  std::filesystem::create_directories(out_dir);
  nlohmann::json table;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const std::string name = policy_name(policies[p]);
    const SummaryStats summary = summarize(results[p], name);
    write_summary_json(summary, out_dir + "/summary_" + name + ".json");
    write_metrics_csv(results[p], out_dir + "/metrics_" + name + ".csv");
    nlohmann::json row;
    for (std::size_t r = 0; r < summary.resource_names.size(); ++r) {
      row["mean_" + summary.resource_names[r] + "_util"] = summary.mean_utilization[r];
    }
    row["mean_combined_util"] = summary.mean_combined_utilization;
    row["completion_p50"] = summary.completion_p50;
    row["completion_p90"] = summary.completion_p90;
    row["completion_p99"] = summary.completion_p99;
    row["jobs_finished"] = summary.jobs_finished;
    table[name] = row;
    std::cout << name << ": combined mean utilization "
              << summary.mean_combined_utilization << "\n";
  }
  write_text(out_dir + "/compare.json", table.dump(2) + "\n");
  write_manifest(out_dir, "compare",
                 {{"cluster", cluster_path},
                  {"trace", trace_path},
                  {"slots", slot_counts},
                  {"horizon", horizon},
                  {"sample_interval", sample_interval},
                  {"jobs", jobs}});
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Multi-resource fair allocation: exact fluid solver, discrete "
               "progressive-filling scheduler, and fairness audits"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file whose keys mirror the flags");

  // solve
  std::string cluster_path, demands_path, out_dir;
  CLI::App* solve = app.add_subcommand("solve", "Equalized dominant-share allocation");
  solve->add_option("--cluster", cluster_path, "cluster CSV")->required();
  solve->add_option("--demands", demands_path, "per-user demand CSV")->required();
  solve->add_option("--out", out_dir, "output directory for solution.json")
      ->envname("DRFH_OUT");

  // simulate
  std::string sim_cluster, sim_trace, sim_policy = "best_fit", sim_out;
  int sim_slots = 14;
  double sim_horizon = 0.0, sim_interval = 10.0;
  CLI::App* simulate = app.add_subcommand("simulate", "Trace-driven discrete scheduling");
  simulate->add_option("--cluster", sim_cluster, "cluster CSV")->required();
  simulate->add_option("--trace", sim_trace, "task trace CSV")->required();
  simulate->add_option("--policy", sim_policy, "best_fit | first_fit | slots");
  simulate->add_option("--slots-per-max", sim_slots, "slots per maximum server");
  simulate->add_option("--horizon", sim_horizon, "seconds; 0 runs to completion");
  simulate->add_option("--sample-interval", sim_interval, "metrics sampling period");
  simulate->add_option("--out", sim_out, "output directory")
      ->envname("DRFH_OUT")
      ->required();

  // audit
  std::string audit_suite = "all", audit_out;
  int audit_instances = 1000, truth_instances = 200, audit_misreports = 20;
  int audit_max_n = 5, audit_max_k = 5, audit_max_m = 4, audit_jobs = 0;
  std::uint64_t audit_seed = 1;
  CLI::App* audit = app.add_subcommand("audit", "Randomized property campaigns");
  audit->add_option("--suite", audit_suite,
                    "all | envy | pareto | population | truthfulness | reductions");
  audit->add_option("--instances", audit_instances, "instances per property suite");
  audit->add_option("--truth-instances", truth_instances, "instances for truthfulness");
  audit->add_option("--seed", audit_seed, "campaign base seed");
  audit->add_option("--max-n", audit_max_n, "max users per instance");
  audit->add_option("--max-k", audit_max_k, "max servers per instance");
  audit->add_option("--max-m", audit_max_m, "max resources per instance");
  audit->add_option("--misreports", audit_misreports, "misreports per user");
  audit->add_option("--jobs", audit_jobs, "worker threads (0 = cores)");
  audit->add_option("--out", audit_out, "output directory for audits.jsonl")
      ->envname("DRFH_OUT");

  // gen-cluster
  int gc_servers = 100;
  std::uint64_t gc_seed = 1;
  std::string gc_out;
  CLI::App* gen_cluster =
      app.add_subcommand("gen-cluster", "Sample servers from the class distribution");
  gen_cluster->add_option("--servers", gc_servers, "number of servers")->required();
  gen_cluster->add_option("--seed", gc_seed, "sampler seed")->required();
  gen_cluster->add_option("--out", gc_out, "cluster CSV path")->required();

  // gen-trace
  GeneratorSpec gen;
  std::uint64_t gt_seed = 1;
  std::string gt_out;
  CLI::App* gen_trace = app.add_subcommand("gen-trace", "Generate a synthetic workload");
  gen_trace->add_option("--users", gen.users, "number of users")->required();
  gen_trace->add_option("--seed", gt_seed, "generator seed")->required();
  gen_trace->add_option("--out", gt_out, "trace CSV path")->required();
  gen_trace->add_option("--jobs-per-user", gen.jobs_per_user, "expected jobs per user");
  gen_trace->add_option("--mean-tasks-per-job", gen.mean_tasks_per_job, "mean tasks per job");
  gen_trace->add_option("--arrival-span", gen.arrival_span_s, "arrival window seconds");
  gen_trace->add_option("--duration-median", gen.duration_median_s, "task duration median");
  gen_trace->add_option("--duration-sigma", gen.duration_sigma, "task duration log sigma");
  gen_trace->add_option("--cpu-heavy-fraction", gen.cpu_heavy_fraction,
                        "fraction of CPU-heavy users");
  gen_trace->add_option("--dominant-lo", gen.dominant_lo, "heavy-resource demand lower bound");
  gen_trace->add_option("--dominant-hi", gen.dominant_hi, "heavy-resource demand upper bound");
  gen_trace->add_option("--demand-sigma", gen.demand_sigma, "demand log-normal sigma");
  gen_trace->add_option("--shape-ratio-lo", gen.shape_ratio_lo, "light/heavy ratio lower bound");
  gen_trace->add_option("--shape-ratio-hi", gen.shape_ratio_hi, "light/heavy ratio upper bound");

  // compare
  std::string cmp_cluster, cmp_trace, cmp_out;
  std::vector<int> cmp_slots{10, 12, 14, 16, 20};
  double cmp_horizon = 0.0, cmp_interval = 10.0;
  int cmp_jobs = 0;
  CLI::App* compare =
      app.add_subcommand("compare", "Run every policy over one workload and tabulate");
  compare->add_option("--cluster", cmp_cluster, "cluster CSV")->required();
  compare->add_option("--trace", cmp_trace, "task trace CSV")->required();
  compare->add_option("--slots", cmp_slots, "slot counts to scan")->delimiter(',');
  compare->add_option("--horizon", cmp_horizon, "seconds; 0 runs to completion");
  compare->add_option("--sample-interval", cmp_interval, "metrics sampling period");
  compare->add_option("--jobs", cmp_jobs, "worker threads (0 = cores)");
  compare->add_option("--out", cmp_out, "output directory")
      ->envname("DRFH_OUT")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_solve(cluster_path, demands_path, out_dir);
    if (simulate->parsed()) {
      return run_simulate(sim_cluster, sim_trace, sim_policy, sim_slots, sim_horizon,
                          sim_interval, sim_out);
    }
    if (audit->parsed()) {
      return run_audit(audit_suite, audit_instances, truth_instances, audit_seed,
                       audit_max_n, audit_max_k, audit_max_m, audit_misreports,
                       audit_jobs, audit_out);
    }
    if (gen_cluster->parsed()) return run_gen_cluster(gc_servers, gc_seed, gc_out);
    if (gen_trace->parsed()) return run_gen_trace(gen, gt_seed, gt_out);
    if (compare->parsed()) {
      return run_compare(cmp_cluster, cmp_trace, cmp_slots, cmp_horizon, cmp_interval,
                         cmp_jobs, cmp_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace drfh
