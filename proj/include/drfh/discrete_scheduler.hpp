#ifndef DRFH_DISCRETE_SCHEDULER_HPP
#define DRFH_DISCRETE_SCHEDULER_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "drfh/resource_model.hpp"

namespace drfh {

struct Task {
  std::int64_t id = 0;
  std::int64_t job_id = 0;
  std::string user_id;
  ResourceVector demand;  // absolute units in traces; system shares inside the engine
  double duration = 0.0;
  double submit_time = 0.0;
};

struct ServerState {
  ResourceVector capacity;  // normalized shares
  ResourceVector available;
  std::vector<std::int64_t> resident;
  int total_slots = 0;  // slots policy only
  int free_slots = 0;
};

enum class PolicyKind { first_fit_drfh, best_fit_drfh, slots };

struct SchedulerPolicy {
  PolicyKind kind = PolicyKind::best_fit_drfh;
  int slots_per_max_server = 14;  // slots policy only
};

PolicyKind policy_from_name(const std::string& name);
std::string policy_name(const SchedulerPolicy& policy);

/// Fitness of a task for a server: the L1 distance between the demand and the
/// available vector, both scaled by their first component. Smaller is a better
/// shape match; zero means the demand is proportional to what is left. Returns
/// +infinity when the server has none of resource 0 left.
double best_fit_score(const ResourceVector& demand, const ResourceVector& available);

/// Number of fixed-size slots a server provides: the slot is 1/slots_per_max
/// of the maximum server per resource, and a server holds as many slots as fit
/// in every resource simultaneously. A slot hosts exactly one task regardless
/// of the task's demand.
int slots_partition(const ResourceVector& capacity, const ResourceVector& max_server,
                    int slots_per_max);

/// Places one task: first-fit takes the lowest-index server with room,
/// best-fit the fitting server with the smallest score (ties to the lowest
/// index). Decrements the chosen server's availability. nullopt means blocked.
std::optional<std::size_t> place_task(const ResourceVector& demand,
                                      std::vector<ServerState>& servers,
                                      const SchedulerPolicy& policy);

struct PlacementRecord {
  double time = 0.0;
  std::int64_t task_id = 0;
  std::int64_t job_id = 0;
  std::string user_id;
  std::size_t server = 0;
  double finish_time = 0.0;
};

/// Progressive-filling scheduler state machine. Strictly single-threaded and
/// deterministic given an event sequence. Task demands passed to submit() must
/// already be in system shares.
class ClusterScheduler {
 public:
  ClusterScheduler(const ClusterSpec& cluster, SchedulerPolicy policy);

  void join_user(const std::string& user, double now, double weight = 1.0);
  /// Cancels the user's pending tasks (returns how many); resident tasks run out.
  std::int64_t depart_user(const std::string& user);

  /// false if the task cannot fit any server even when empty (rejected).
  bool submit(const Task& task);

  /// Runs progressive filling until every backlogged user is blocked or done:
  /// repeatedly serve the unblocked user with the lowest weighted dominant
  /// share (slots policy: lowest slot count) and place its oldest pending task.
  std::vector<PlacementRecord> run_opportunity(double now);

  /// Releases a resident task's resources and clears blocked marks.
  void complete(std::int64_t task_id);

  /// Realized global dominant share: the largest fraction of any resource the
  /// user currently holds across the pool. For fixed per-task demands this
  /// equals the sum over servers of the non-wasteful share scalars.
  double dominant_share(const std::string& user) const;

  const std::vector<ServerState>& servers() const { return servers_; }
  /// Share of each resource currently in use (system totals are 1).
  ResourceVector utilization() const;

  std::int64_t pending_count() const;
  std::int64_t resident_count() const { return static_cast<std::int64_t>(resident_.size()); }

  struct UserView {
    std::string id;
    double join_time = 0.0;
    double weight = 1.0;
    bool departed = false;
    double dominant_share = 0.0;
    int resident = 0;
    int pending = 0;
  };
  std::vector<UserView> user_views() const;  // registration order

 private:
  struct UserState {
    std::string id;
    double join_time = 0.0;
    double weight = 1.0;
    bool departed = false;
    bool blocked = false;
    std::deque<Task> pending;
    ResourceVector held;  // accounted usage summed over resident tasks
    int resident = 0;
    int slot_tasks = 0;
  };

  struct ResidentTask {
    std::size_t server = 0;
    std::size_t user = 0;
    ResourceVector accounted;  // slots policy may clamp to availability
  };

  std::size_t user_index(const std::string& user) const;
  std::size_t ensure_user(const std::string& user, double now);
  bool pick_next_user(std::size_t& out) const;

  SchedulerPolicy policy_;
  std::size_t resources_ = 0;
  std::vector<ServerState> servers_;
  std::vector<UserState> users_;
  std::map<std::string, std::size_t> user_index_;
  std::unordered_map<std::int64_t, ResidentTask> resident_;
};

}  // namespace drfh

#endif  // DRFH_DISCRETE_SCHEDULER_HPP
