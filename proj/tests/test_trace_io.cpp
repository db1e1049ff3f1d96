#include "drfh/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"

using namespace drfh;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out);
  out << contents;
}

}  // namespace

TEST_SUITE_BEGIN("trace_io");

TEST_CASE("default server class table totals") {
  const ServerClassTable table = default_server_classes();
  CHECK(table.total_servers() == 12583);
  CHECK(table.rows[0].count == 6732);
  CHECK(static_cast<double>(table.rows[0].count) / table.total_servers() ==
        doctest::Approx(0.535).epsilon(1e-3));
}

TEST_CASE("single-class table always samples that class") {
  ServerClassTable table{{{10, 0.5, 0.25}}};
  const ClusterSpec cluster = sample_cluster(table, 5, 7);
  for (std::size_t l = 0; l < cluster.server_count(); ++l) {
    CHECK(cluster.raw_units[l][0] == 0.5);
    CHECK(cluster.raw_units[l][1] == 0.25);
  }
}

TEST_CASE("sampled class frequencies stay near the table proportions") {
  const ServerClassTable table = default_server_classes();
  const int k = 10000;
  const ClusterSpec cluster = sample_cluster(table, k, 12345);
  const double total = static_cast<double>(table.total_servers());
  for (const ServerClass& cls : table.rows) {
    int observed = 0;
    for (std::size_t l = 0; l < cluster.server_count(); ++l) {
      if (cluster.raw_units[l][0] == cls.cpu && cluster.raw_units[l][1] == cls.memory) {
        ++observed;
      }
    }
    const double p = cls.count / total;
    const double sigma = std::sqrt(k * p * (1.0 - p));
    CHECK(std::fabs(observed - k * p) <= 3.0 * sigma + 1.0);
  }
}

TEST_CASE("sampler is deterministic per seed") {
  const ServerClassTable table = default_server_classes();
  const ClusterSpec a = sample_cluster(table, 200, 99);
  const ClusterSpec b = sample_cluster(table, 200, 99);
  REQUIRE(a.server_count() == b.server_count());
  for (std::size_t l = 0; l < a.server_count(); ++l) {
    CHECK(a.raw_units[l][0] == b.raw_units[l][0]);
    CHECK(a.raw_units[l][1] == b.raw_units[l][1]);
  }
  const ClusterSpec c = sample_cluster(table, 200, 100);
  bool any_diff = false;
  for (std::size_t l = 0; l < a.server_count(); ++l) {
    any_diff = any_diff || a.raw_units[l][0] != c.raw_units[l][0] ||
               a.raw_units[l][1] != c.raw_units[l][1];
  }
  CHECK(any_diff);
}

TEST_CASE("trace rows parse into tasks") {
  const std::string path = temp_path("drfh_trace_basic.csv");
  spit(path,
       "task_id,job_id,user_id,submit_time_s,duration_s,cpu_units,mem_units\n"
       "1,1,alice,0.0,10.0,0.2,0.3\n");
  const Workload w = load_trace(path);
  REQUIRE(w.tasks.size() == 1);
  CHECK(w.tasks[0].user_id == "alice");
  CHECK(w.tasks[0].duration == 10.0);
  CHECK(w.tasks[0].demand[0] == 0.2);
  CHECK(w.tasks[0].demand[1] == 0.3);
  std::remove(path.c_str());
}

TEST_CASE("an empty trace is just a header") {
  const std::string path = temp_path("drfh_trace_empty.csv");
  spit(path, "task_id,job_id,user_id,submit_time_s,duration_s,cpu_units,mem_units\n");
  CHECK(load_trace(path).tasks.empty());
  std::remove(path.c_str());
}

TEST_CASE("malformed rows report their line number") {
  const std::string path = temp_path("drfh_trace_bad.csv");
  spit(path,
       "task_id,job_id,user_id,submit_time_s,duration_s,cpu_units,mem_units\n"
       "1,1,alice,0.0,10.0,0.2,0.3\n"
       "2,1,alice,0.0,-4.0,0.2,0.3\n");
  try {
    load_trace(path);
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("unsorted traces are re-sorted") {
  const std::string path = temp_path("drfh_trace_unsorted.csv");
  spit(path,
       "task_id,job_id,user_id,submit_time_s,duration_s,cpu_units,mem_units\n"
       "1,1,alice,5.0,10.0,0.2,0.3\n"
       "2,1,alice,1.0,10.0,0.2,0.3\n");
  const Workload w = load_trace(path);
  REQUIRE(w.tasks.size() == 2);
  CHECK(w.tasks[0].id == 2);
  std::remove(path.c_str());
}

TEST_CASE("write then load then write is byte identical") {
  const GeneratorSpec spec;
  const Workload original = generate_workload(spec, 4242);
  const std::string first = temp_path("drfh_roundtrip_1.csv");
  const std::string second = temp_path("drfh_roundtrip_2.csv");
  write_trace(original, first);
  const Workload reloaded = load_trace(first);
  write_trace(reloaded, second);
  CHECK(slurp(first) == slurp(second));
  std::remove(first.c_str());
  std::remove(second.c_str());
}

TEST_CASE("cluster CSV round trip") {
  const ClusterSpec cluster = sample_cluster(default_server_classes(), 50, 31);
  const std::string path = temp_path("drfh_cluster.csv");
  write_cluster_csv(cluster, path);
  const ClusterSpec reloaded = load_cluster_csv(path);
  REQUIRE(reloaded.server_count() == 50);
  for (std::size_t l = 0; l < 50; ++l) {
    CHECK(reloaded.raw_units[l][0] == cluster.raw_units[l][0]);
    CHECK(reloaded.raw_units[l][1] == cluster.raw_units[l][1]);
  }
  std::remove(path.c_str());
}

TEST_CASE("demand CSV accepts optional weight and budget columns") {
  const std::string path = temp_path("drfh_demands.csv");
  spit(path,
       "user_id,cpu_units,mem_units,weight,task_budget\n"
       "alice,0.2,1,1,inf\n"
       "bob,1,0.2,2,15\n");
  const auto rows = load_demands_csv(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].task_budget == kInfiniteTasks);
  CHECK(rows[1].weight == 2.0);
  CHECK(rows[1].task_budget == 15.0);
  std::remove(path.c_str());
}

TEST_CASE("generator is reproducible and honors the user count") {
  GeneratorSpec spec;
  spec.users = 7;
  const Workload a = generate_workload(spec, 1);
  const Workload b = generate_workload(spec, 1);
  REQUIRE(a.tasks.size() == b.tasks.size());
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    CHECK(a.tasks[i].id == b.tasks[i].id);
    CHECK(a.tasks[i].submit_time == b.tasks[i].submit_time);
    CHECK(a.tasks[i].duration == b.tasks[i].duration);
    CHECK(a.tasks[i].demand[0] == b.tasks[i].demand[0]);
  }
  std::set<std::string> users;
  for (const Task& t : a.tasks) users.insert(t.user_id);
  CHECK(users.size() <= 7);
  CHECK(users.size() >= 1);
}

TEST_SUITE_END();
