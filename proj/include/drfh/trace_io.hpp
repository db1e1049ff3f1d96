#ifndef DRFH_TRACE_IO_HPP
#define DRFH_TRACE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "drfh/discrete_scheduler.hpp"
#include "drfh/resource_model.hpp"

namespace drfh {

/// One server class: how many servers of this (cpu, memory) configuration the
/// reference cluster contains, in units of its largest server.
struct ServerClass {
  int count = 0;
  double cpu = 0.0;
  double memory = 0.0;
};

struct ServerClassTable {
  std::vector<ServerClass> rows;
  int total_servers() const;
};

/// The production server-class distribution used throughout: 10 classes,
/// 12583 servers, units normalized to the largest server.
ServerClassTable default_server_classes();

/// Draws k servers independently, class probability proportional to count.
/// Deterministic per seed; returns absolute (cpu, memory) capacities.
ClusterSpec sample_cluster(const ServerClassTable& table, int k, std::uint64_t seed);

struct SessionEvent {
  double time = 0.0;
  std::string user_id;
};

struct Workload {
  std::vector<Task> tasks;  // absolute demand units, sorted by submit time
  std::vector<SessionEvent> joins;    // optional; a user's first submit implies a join
  std::vector<SessionEvent> departs;  // cancels the user's pending tasks
};

/// Task trace CSV:  task_id,job_id,user_id,submit_time_s,duration_s,cpu_units,mem_units
Workload load_trace(const std::string& path);
void write_trace(const Workload& workload, const std::string& path);

/// Cluster CSV:  server_id,cpu_units,mem_units
ClusterSpec load_cluster_csv(const std::string& path);
void write_cluster_csv(const ClusterSpec& cluster, const std::string& path);

/// Demand CSV for the fluid solver:
///   user_id,cpu_units,mem_units[,weight[,task_budget]]
/// task_budget accepts "inf".
struct DemandRow {
  std::string user_id;
  ResourceVector per_task_absolute;
  double weight = 1.0;
  double task_budget = kInfiniteTasks;
};
std::vector<DemandRow> load_demands_csv(const std::string& path);

/// Synthetic workload: a mixture of CPU-heavy and memory-heavy users, each
/// with a fixed per-task demand, jobs arriving by a Poisson process and task
/// durations drawn log-normally. Units match the server-class table (largest
/// server = 1.0).
struct GeneratorSpec {
  int users = 10;
  double jobs_per_user = 5.0;       // expected jobs per user
  double mean_tasks_per_job = 20.0; // geometric, minimum 1
  double arrival_span_s = 2000.0;   // job arrivals happen in [0, span)
  double duration_median_s = 100.0;
  double duration_sigma = 0.5;
  double cpu_heavy_fraction = 0.5;
  // Per-task demand on the heavy resource: log-normal around the geometric
  // mean of [dominant_lo, dominant_hi], clamped to that range.
  double dominant_lo = 0.015;
  double dominant_hi = 0.06;
  double demand_sigma = 0.4;
  double shape_ratio_lo = 0.15;  // light resource as a fraction of the heavy one
  double shape_ratio_hi = 0.4;
};

Workload generate_workload(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace drfh

#endif  // DRFH_TRACE_IO_HPP
