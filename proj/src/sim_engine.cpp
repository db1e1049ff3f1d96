#include "drfh/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "drfh/csv.hpp"
#include "drfh/parallel.hpp"

#include "json.hpp"

namespace drfh {

namespace {

enum class EventKind : int { task_finish = 0, user_depart = 1, user_join = 2, task_submit = 3 };

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::task_submit;
  std::uint64_t seq = 0;     // total-order tie break
  std::size_t payload = 0;   // task index or session index
  std::int64_t task_id = 0;  // finish events

  bool operator>(const SimEvent& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
    return seq > o.seq;
  }
};

double percentile(std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) return 0.0;
  const double idx = p * static_cast<double>(sorted_values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(idx));
  const double frac = idx - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

MetricsSeries run_simulation(const ClusterSpec& cluster, const Workload& workload,
                             const SimConfig& config) {
  if (config.sample_interval <= 0.0) {
    throw std::invalid_argument("sample interval must be positive");
  }
  const std::size_t m = cluster.resource_count();

  MetricsSeries series;
  series.resource_names = cluster.resource_names;

  // Tasks are ingested in absolute units and simulated in system shares.
  std::vector<Task> tasks(workload.tasks);
  for (Task& t : tasks) {
    if (t.demand.size() != m) {
      throw std::invalid_argument("task demand dimension does not match cluster");
    }
    std::vector<double> shares(m);
    for (std::size_t r = 0; r < m; ++r) shares[r] = t.demand[r] / cluster.raw_totals[r];
    t.demand = ResourceVector(std::move(shares));
  }

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<SimEvent>> queue;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < workload.joins.size(); ++i) {
    queue.push(SimEvent{workload.joins[i].time, EventKind::user_join, seq++, i, 0});
  }
  for (std::size_t i = 0; i < workload.departs.size(); ++i) {
    queue.push(SimEvent{workload.departs[i].time, EventKind::user_depart, seq++, i, 0});
  }
  // A user's first submit implies a join: the scheduler registers unseen users
  // at submit time, so only explicit session events need queue entries.
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    queue.push(SimEvent{tasks[i].submit_time, EventKind::task_submit, seq++, i, 0});
  }

  ClusterScheduler scheduler(cluster, config.policy);

  std::map<std::pair<std::string, std::int64_t>, JobStats> jobs;
  std::map<std::int64_t, std::size_t> task_by_id;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!task_by_id.emplace(tasks[i].id, i).second) {
      throw std::invalid_argument("duplicate task id " + std::to_string(tasks[i].id));
    }
  }

  const double horizon = config.horizon;
  double now = 0.0;
  double next_sample = 0.0;

  auto record_sample = [&](double t) {
    MetricsSample s;
    s.time = t;
    s.utilization = scheduler.utilization().values();
    auto views = scheduler.user_views();
    std::sort(views.begin(), views.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& v : views) {
      s.users.push_back(UserSample{v.id, v.dominant_share, v.resident, v.pending});
    }
    if (!series.samples.empty() && series.samples.back().time == t) {
      series.samples.back() = std::move(s);  // keep post-event state at this instant
    } else {
      series.samples.push_back(std::move(s));
    }
  };

  auto emit_periodic_until = [&](double t) {
    while (next_sample < t - 1e-12) {
      record_sample(next_sample);
      next_sample += config.sample_interval;
    }
  };

  record_sample(0.0);
  next_sample = config.sample_interval;

  double end_time = 0.0;
  while (!queue.empty()) {
    const double batch_time = queue.top().time;
    if (horizon > 0.0 && batch_time > horizon) break;
    emit_periodic_until(batch_time);
    now = batch_time;
    end_time = std::max(end_time, now);

    // Everything happening at this instant is applied first (finishes ahead of
    // departs, joins, submits), then the instant counts as one scheduling
    // opportunity. Simultaneous submissions therefore contend fairly instead
    // of being served in arrival order on an uncontended cluster.
    while (!queue.empty() && queue.top().time == batch_time) {
      const SimEvent ev = queue.top();
      queue.pop();
      switch (ev.kind) {
        case EventKind::task_finish: {
          scheduler.complete(ev.task_id);
          series.completed += 1;
          const Task& t = tasks[task_by_id.at(ev.task_id)];
          series.per_user[t.user_id].completed += 1;
          JobStats& js = jobs.at({t.user_id, t.job_id});
          js.tasks_done += 1;
          js.last_finish = std::max(js.last_finish, now);
          break;
        }
        case EventKind::user_depart: {
          const SessionEvent& se = workload.departs[ev.payload];
          const std::int64_t cancelled = scheduler.depart_user(se.user_id);
          series.cancelled += cancelled;
          series.per_user[se.user_id].cancelled += cancelled;
          break;
        }
        case EventKind::user_join: {
          const SessionEvent& se = workload.joins[ev.payload];
          scheduler.join_user(se.user_id, now);
          break;
        }
        case EventKind::task_submit: {
          const Task& t = tasks[ev.payload];
          series.submitted += 1;
          auto& js = jobs[{t.user_id, t.job_id}];
          if (js.tasks_total == 0) {
            js.user_id = t.user_id;
            js.job_id = t.job_id;
            js.submit_time = now;
          }
          js.tasks_total += 1;
          js.submit_time = std::min(js.submit_time, now);
          if (scheduler.submit(t)) {
            series.per_user[t.user_id].submitted += 1;
          } else {
            series.rejected += 1;
            series.per_user[t.user_id].submitted += 1;
            series.per_user[t.user_id].rejected += 1;
          }
          break;
        }
      }
    }

    for (const PlacementRecord& p : scheduler.run_opportunity(now)) {
      queue.push(SimEvent{p.finish_time, EventKind::task_finish, seq++, 0, p.task_id});
      series.placements.push_back(p);
    }

    record_sample(now);
    while (next_sample <= now + 1e-12) next_sample += config.sample_interval;
  }

  series.horizon = horizon > 0.0 ? horizon : end_time;
  emit_periodic_until(series.horizon);
  record_sample(series.horizon);

  series.resident_at_end = scheduler.resident_count();
  series.pending_at_end = scheduler.pending_count();
  for (auto& [key, js] : jobs) series.jobs.push_back(js);
  return series;
}

SummaryStats summarize(const MetricsSeries& series, const std::string& policy_name) {
  SummaryStats out;
  out.policy = policy_name;
  out.resource_names = series.resource_names;
  const std::size_t m = series.resource_names.size();
  out.mean_utilization.assign(m, 0.0);

  // Samples are piecewise-constant state snapshots (one at every event), so
  // the time-weighted mean is exact.
  if (series.samples.size() >= 2) {
    const double t0 = series.samples.front().time;
    const double t1 = series.samples.back().time;
    if (t1 > t0) {
      for (std::size_t s = 0; s + 1 < series.samples.size(); ++s) {
        const double dt = series.samples[s + 1].time - series.samples[s].time;
        for (std::size_t r = 0; r < m; ++r) {
          out.mean_utilization[r] += dt * series.samples[s].utilization[r];
        }
      }
      for (std::size_t r = 0; r < m; ++r) out.mean_utilization[r] /= (t1 - t0);
    }
  }
  double combined = 0.0;
  for (double u : out.mean_utilization) combined += u;
  out.mean_combined_utilization = m > 0 ? combined / static_cast<double>(m) : 0.0;

  std::vector<double> completions;
  for (const JobStats& j : series.jobs) {
    out.jobs_total += 1;
    if (j.finished()) {
      out.jobs_finished += 1;
      completions.push_back(j.completion_time());
    }
  }
  std::sort(completions.begin(), completions.end());
  out.completion_p50 = percentile(completions, 0.50);
  out.completion_p90 = percentile(completions, 0.90);
  out.completion_p99 = percentile(completions, 0.99);

  for (const auto& [user, c] : series.per_user) out.completion_ratio[user] = c.ratio();
  out.submitted = series.submitted;
  out.completed = series.completed;
  out.rejected = series.rejected;
  out.cancelled = series.cancelled;
  return out;
}

std::string summary_to_json(const SummaryStats& s) {
  nlohmann::json j;
  j["policy"] = s.policy;
  for (std::size_t r = 0; r < s.resource_names.size(); ++r) {
    j["mean_utilization"][s.resource_names[r]] = s.mean_utilization[r];
  }
  j["mean_combined_utilization"] = s.mean_combined_utilization;
  j["completion_time_percentiles"] = {
      {"p50", s.completion_p50}, {"p90", s.completion_p90}, {"p99", s.completion_p99}};
  j["jobs_finished"] = s.jobs_finished;
  j["jobs_total"] = s.jobs_total;
  j["per_user_completion_ratio"] = s.completion_ratio;
  j["tasks"] = {{"submitted", s.submitted},
                {"completed", s.completed},
                {"rejected", s.rejected},
                {"cancelled", s.cancelled}};
  return j.dump(2);
}

void write_metrics_csv(const MetricsSeries& series, const std::string& path) {
  if (series.resource_names.size() != 2) {
    throw std::invalid_argument("metrics CSV requires 2 resources (cpu, mem)");
  }
  std::string buf = "time_s,cpu_util,mem_util,user_id,dominant_share\n";
  for (const MetricsSample& s : series.samples) {
    const std::string prefix = csv::format_double(s.time) + "," +
                               csv::format_double(s.utilization[0]) + "," +
                               csv::format_double(s.utilization[1]) + ",";
    if (s.users.empty()) {
      buf += prefix;
      buf += "-,0\n";
      continue;
    }
    for (const UserSample& u : s.users) {
      buf += prefix;
      buf += u.user;
      buf += ',';
      buf += csv::format_double(u.share);
      buf += '\n';
    }
  }
  write_file(path, buf);
}

void write_placements_csv(const MetricsSeries& series, const std::string& path) {
  std::string buf = "time_s,task_id,job_id,user_id,server_id,finish_time_s\n";
  for (const PlacementRecord& p : series.placements) {
    buf += csv::format_double(p.time);
    buf += ',';
    buf += csv::format_int(p.task_id);
    buf += ',';
    buf += csv::format_int(p.job_id);
    buf += ',';
    buf += p.user_id;
    buf += ',';
    buf += csv::format_int(static_cast<std::int64_t>(p.server));
    buf += ',';
    buf += csv::format_double(p.finish_time);
    buf += '\n';
  }
  write_file(path, buf);
}

void write_summary_json(const SummaryStats& summary, const std::string& path) {
  write_file(path, summary_to_json(summary) + "\n");
}

std::vector<MetricsSeries> run_batch(const std::vector<BatchRun>& runs, int jobs) {
  std::vector<MetricsSeries> out(runs.size());
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    out[i] = run_simulation(*runs[i].cluster, *runs[i].workload, runs[i].config);
  });
  return out;
}

}  // namespace drfh
