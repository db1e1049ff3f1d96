#ifndef DRFH_SIM_ENGINE_HPP
#define DRFH_SIM_ENGINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drfh/discrete_scheduler.hpp"
#include "drfh/trace_io.hpp"

namespace drfh {

struct UserSample {
  std::string user;
  double share = 0.0;  // realized global dominant share
  int resident = 0;
  int pending = 0;
};

struct MetricsSample {
  double time = 0.0;
  std::vector<double> utilization;  // per resource, fraction of system total
  std::vector<UserSample> users;    // sorted by user id
};

struct JobStats {
  std::string user_id;
  std::int64_t job_id = 0;
  double submit_time = 0.0;
  double last_finish = 0.0;
  std::int64_t tasks_total = 0;
  std::int64_t tasks_done = 0;
  bool finished() const { return tasks_total > 0 && tasks_done == tasks_total; }
  double completion_time() const { return last_finish - submit_time; }
};

struct UserCompletion {
  std::int64_t submitted = 0;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
  std::int64_t cancelled = 0;
  double ratio() const {
    return submitted == 0 ? 1.0 : static_cast<double>(completed) / static_cast<double>(submitted);
  }
};

/// Event-ordered record of one simulation run: per-instant utilization and
/// dominant shares (sampled periodically and at every event), the placement
/// log, and completion statistics.
struct MetricsSeries {
  std::vector<MetricsSample> samples;
  std::vector<PlacementRecord> placements;
  std::vector<JobStats> jobs;  // sorted by (user, job)
  std::map<std::string, UserCompletion> per_user;
  std::int64_t submitted = 0;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
  std::int64_t cancelled = 0;
  std::int64_t resident_at_end = 0;
  std::int64_t pending_at_end = 0;
  double horizon = 0.0;
  std::vector<std::string> resource_names;
};

struct SimConfig {
  SchedulerPolicy policy;
  double horizon = 0.0;  // 0 runs until the event queue drains
  double sample_interval = 10.0;
};

/// Deterministic replay of a workload on a cluster: events processed in total
/// order (simultaneous events: finishes, then departs, joins, submits), each
/// one a scheduling opportunity. Identical inputs give bit-identical outputs.
MetricsSeries run_simulation(const ClusterSpec& cluster, const Workload& workload,
                             const SimConfig& config);

struct SummaryStats {
  std::string policy;
  std::vector<std::string> resource_names;
  std::vector<double> mean_utilization;  // time-weighted per resource
  double mean_combined_utilization = 0.0;
  double completion_p50 = 0.0;  // over jobs with every task finished
  double completion_p90 = 0.0;
  double completion_p99 = 0.0;
  std::int64_t jobs_finished = 0;
  std::int64_t jobs_total = 0;
  std::map<std::string, double> completion_ratio;
  std::int64_t submitted = 0;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
  std::int64_t cancelled = 0;
};

SummaryStats summarize(const MetricsSeries& series, const std::string& policy_name);

std::string summary_to_json(const SummaryStats& summary);

/// Metrics CSV (long format):  time_s,cpu_util,mem_util,user_id,dominant_share
/// Instants with no users carry a single row with user_id "-".
void write_metrics_csv(const MetricsSeries& series, const std::string& path);

/// Placement CSV:  time_s,task_id,job_id,user_id,server_id,finish_time_s
void write_placements_csv(const MetricsSeries& series, const std::string& path);

void write_summary_json(const SummaryStats& summary, const std::string& path);

/// Runs independent simulations concurrently; runs share nothing mutable.
struct BatchRun {
  const ClusterSpec* cluster = nullptr;
  const Workload* workload = nullptr;
  SimConfig config;
};
std::vector<MetricsSeries> run_batch(const std::vector<BatchRun>& runs, int jobs);

}  // namespace drfh

#endif  // DRFH_SIM_ENGINE_HPP
