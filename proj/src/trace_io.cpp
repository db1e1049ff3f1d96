#include "drfh/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "drfh/csv.hpp"
#include "drfh/rng.hpp"

namespace drfh {

namespace {

constexpr const char* kTraceHeader =
    "task_id,job_id,user_id,submit_time_s,duration_s,cpu_units,mem_units";
constexpr const char* kClusterHeader = "server_id,cpu_units,mem_units";

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string line_context(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

void check_user_id(const std::string& id, const std::string& context) {
  if (id.empty()) throw std::invalid_argument(context + ": empty user_id");
  if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos) {
    throw std::invalid_argument(context + ": user_id must not contain ',' or newlines");
  }
}

}  // namespace

int ServerClassTable::total_servers() const {
  int total = 0;
  for (const ServerClass& c : rows) total += c.count;
  return total;
}

ServerClassTable default_server_classes() {
  return ServerClassTable{{
      {6732, 0.50, 0.50},
      {3863, 0.50, 0.25},
      {1001, 0.50, 0.75},
      {795, 1.00, 1.00},
      {126, 0.25, 0.25},
      {52, 0.50, 0.12},
      {5, 0.50, 0.03},
      {5, 0.50, 0.97},
      {3, 1.00, 0.50},
      {1, 0.50, 0.06},
  }};
}

ClusterSpec sample_cluster(const ServerClassTable& table, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("cluster size must be >= 1");
  if (table.rows.empty()) throw std::invalid_argument("empty server class table");
  std::vector<double> weights;
  weights.reserve(table.rows.size());
  for (const ServerClass& c : table.rows) {
    if (c.count <= 0) throw std::invalid_argument("server class count must be positive");
    if (!(c.cpu > 0.0) || !(c.memory > 0.0)) {
      throw std::invalid_argument("server class capacities must be positive");
    }
    weights.push_back(static_cast<double>(c.count));
  }

  Rng rng(seed);
  std::vector<ResourceVector> raw;
  raw.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const ServerClass& c = table.rows[rng.discrete(weights)];
    raw.push_back(ResourceVector{{c.cpu, c.memory}});
  }
  return normalize_cluster(raw, {"cpu", "mem"});
}

Workload load_trace(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != kTraceHeader) {
    throw std::invalid_argument(path + ": expected header '" + kTraceHeader + "'");
  }
  Workload out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string ctx = line_context(path, ln + 1);
    const auto fields = csv::split_fields(lines[ln]);
    if (fields.size() != 7) {
      throw std::invalid_argument(ctx + ": expected 7 fields, got " +
                                  std::to_string(fields.size()));
    }
    Task t;
    t.id = csv::parse_int(fields[0], ctx);
    t.job_id = csv::parse_int(fields[1], ctx);
    t.user_id = std::string(fields[2]);
    check_user_id(t.user_id, ctx);
    t.submit_time = csv::parse_double(fields[3], ctx);
    t.duration = csv::parse_double(fields[4], ctx);
    const double cpu = csv::parse_double(fields[5], ctx);
    const double mem = csv::parse_double(fields[6], ctx);
    if (t.submit_time < 0.0) throw std::invalid_argument(ctx + ": negative submit time");
    if (!(t.duration > 0.0)) throw std::invalid_argument(ctx + ": duration must be > 0");
    if (!(cpu > 0.0) || !(mem > 0.0)) {
      throw std::invalid_argument(ctx + ": resource units must be > 0");
    }
    t.demand = ResourceVector{{cpu, mem}};
    out.tasks.push_back(std::move(t));
  }
  if (!std::is_sorted(out.tasks.begin(), out.tasks.end(),
                      [](const Task& a, const Task& b) {
                        return a.submit_time < b.submit_time;
                      })) {
    std::cerr << "warning: " << path << " is not sorted by submit_time_s; re-sorting\n";
    std::stable_sort(out.tasks.begin(), out.tasks.end(),
                     [](const Task& a, const Task& b) {
                       return a.submit_time < b.submit_time;
                     });
  }
  return out;
}

void write_trace(const Workload& workload, const std::string& path) {
  std::string buf(kTraceHeader);
  buf += '\n';
  for (const Task& t : workload.tasks) {
    check_user_id(t.user_id, path);
    if (t.demand.size() != 2) {
      throw std::invalid_argument("trace CSV requires 2-resource (cpu, mem) tasks");
    }
    buf += csv::format_int(t.id);
    buf += ',';
    buf += csv::format_int(t.job_id);
    buf += ',';
    buf += t.user_id;
    buf += ',';
    buf += csv::format_double(t.submit_time);
    buf += ',';
    buf += csv::format_double(t.duration);
    buf += ',';
    buf += csv::format_double(t.demand[0]);
    buf += ',';
    buf += csv::format_double(t.demand[1]);
    buf += '\n';
  }
  write_file(path, buf);
}

ClusterSpec load_cluster_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != kClusterHeader) {
    throw std::invalid_argument(path + ": expected header '" + kClusterHeader + "'");
  }
  std::vector<ResourceVector> raw;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string ctx = line_context(path, ln + 1);
    const auto fields = csv::split_fields(lines[ln]);
    if (fields.size() != 3) {
      throw std::invalid_argument(ctx + ": expected 3 fields, got " +
                                  std::to_string(fields.size()));
    }
    const double cpu = csv::parse_double(fields[1], ctx);
    const double mem = csv::parse_double(fields[2], ctx);
    if (cpu < 0.0 || mem < 0.0) {
      throw std::invalid_argument(ctx + ": capacities must be nonnegative");
    }
    raw.push_back(ResourceVector{{cpu, mem}});
  }
  if (raw.empty()) throw std::invalid_argument(path + ": no servers");
  return normalize_cluster(raw, {"cpu", "mem"});
}

void write_cluster_csv(const ClusterSpec& cluster, const std::string& path) {
  if (cluster.resource_count() != 2) {
    throw std::invalid_argument("cluster CSV requires 2 resources (cpu, mem)");
  }
  std::string buf(kClusterHeader);
  buf += '\n';
  for (std::size_t l = 0; l < cluster.server_count(); ++l) {
    buf += csv::format_int(static_cast<std::int64_t>(l));
    buf += ',';
    buf += csv::format_double(cluster.raw_units[l][0]);
    buf += ',';
    buf += csv::format_double(cluster.raw_units[l][1]);
    buf += '\n';
  }
  write_file(path, buf);
}

std::vector<DemandRow> load_demands_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0].rfind("user_id,cpu_units,mem_units", 0) != 0) {
    throw std::invalid_argument(
        path + ": expected header 'user_id,cpu_units,mem_units[,weight[,task_budget]]'");
  }
  std::vector<DemandRow> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string ctx = line_context(path, ln + 1);
    const auto fields = csv::split_fields(lines[ln]);
    if (fields.size() < 3 || fields.size() > 5) {
      throw std::invalid_argument(ctx + ": expected 3 to 5 fields");
    }
    DemandRow row;
    row.user_id = std::string(fields[0]);
    check_user_id(row.user_id, ctx);
    const double cpu = csv::parse_double(fields[1], ctx);
    const double mem = csv::parse_double(fields[2], ctx);
    if (!(cpu > 0.0) || !(mem > 0.0)) {
      throw std::invalid_argument(ctx + ": demands must be > 0");
    }
    row.per_task_absolute = ResourceVector{{cpu, mem}};
    if (fields.size() >= 4) row.weight = csv::parse_double(fields[3], ctx);
    if (fields.size() >= 5) row.task_budget = csv::parse_double(fields[4], ctx);
    if (!(row.weight > 0.0)) throw std::invalid_argument(ctx + ": weight must be > 0");
    if (!(row.task_budget > 0.0)) throw std::invalid_argument(ctx + ": budget must be > 0");
    out.push_back(std::move(row));
  }
  return out;
}

Workload generate_workload(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.users < 1) throw std::invalid_argument("generator needs >= 1 user");
  if (!(spec.jobs_per_user > 0.0) || !(spec.mean_tasks_per_job >= 1.0) ||
      !(spec.arrival_span_s > 0.0) || !(spec.duration_median_s > 0.0) ||
      !(spec.dominant_lo > 0.0) || !(spec.dominant_hi >= spec.dominant_lo) ||
      !(spec.shape_ratio_lo > 0.0) || !(spec.shape_ratio_hi >= spec.shape_ratio_lo)) {
    throw std::invalid_argument("generator parameters must be positive and ordered");
  }

  Workload out;
  std::int64_t next_task = 0;
  std::int64_t next_job = 0;
  for (int u = 0; u < spec.users; ++u) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(u)));
    std::ostringstream name;
    name << "u";
    name.width(4);
    name.fill('0');
    name << u;
    const std::string user_id = name.str();

    const bool cpu_heavy = rng.uniform() < spec.cpu_heavy_fraction;
    const double median = std::sqrt(spec.dominant_lo * spec.dominant_hi);
    const double heavy = std::clamp(rng.log_normal(median, spec.demand_sigma),
                                    spec.dominant_lo, spec.dominant_hi);
    const double light = heavy * rng.uniform(spec.shape_ratio_lo, spec.shape_ratio_hi);
    const ResourceVector demand =
        cpu_heavy ? ResourceVector{{heavy, light}} : ResourceVector{{light, heavy}};

    const double rate = spec.jobs_per_user / spec.arrival_span_s;
    double at = rng.exponential(rate);
    while (at < spec.arrival_span_s) {
      const std::int64_t job = next_job++;
      const double p = 1.0 / spec.mean_tasks_per_job;
      const int tasks =
          1 + static_cast<int>(std::floor(std::log(1.0 - rng.uniform()) / std::log(1.0 - p)));
      for (int t = 0; t < tasks; ++t) {
        Task task;
        task.id = next_task++;
        task.job_id = job;
        task.user_id = user_id;
        task.submit_time = at;
        task.duration = rng.log_normal(spec.duration_median_s, spec.duration_sigma);
        task.demand = demand;
        out.tasks.push_back(std::move(task));
      }
      at += rng.exponential(rate);
    }
  }
  std::stable_sort(out.tasks.begin(), out.tasks.end(), [](const Task& a, const Task& b) {
    return a.submit_time < b.submit_time;
  });
  return out;
}

}  // namespace drfh
