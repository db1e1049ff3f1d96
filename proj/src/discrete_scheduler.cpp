#include "drfh/discrete_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drfh {

namespace {

constexpr double kFitTol = 1e-12;

bool fits(const ResourceVector& demand, const ResourceVector& available) {
  return demand.fits_within(available, kFitTol);
}

}  // namespace

PolicyKind policy_from_name(const std::string& name) {
  if (name == "best_fit" || name == "best-fit") return PolicyKind::best_fit_drfh;
  if (name == "first_fit" || name == "first-fit") return PolicyKind::first_fit_drfh;
  if (name == "slots") return PolicyKind::slots;
  throw std::invalid_argument("unknown policy '" + name +
                              "' (expected best_fit, first_fit, or slots)");
}

std::string policy_name(const SchedulerPolicy& policy) {
  switch (policy.kind) {
    case PolicyKind::first_fit_drfh:
      return "first_fit";
    case PolicyKind::best_fit_drfh:
      return "best_fit";
    case PolicyKind::slots:
      return "slots_" + std::to_string(policy.slots_per_max_server);
  }
  return "unknown";
}

double best_fit_score(const ResourceVector& demand, const ResourceVector& available) {
  if (demand.size() != available.size()) {
    throw std::invalid_argument("best_fit_score dimension mismatch");
  }
  if (!(demand[0] > 0.0)) {
    throw std::invalid_argument("best_fit_score requires demand[0] > 0");
  }
  if (available[0] <= 0.0) return std::numeric_limits<double>::infinity();
  double score = 0.0;
  for (std::size_t r = 0; r < demand.size(); ++r) {
    score += std::fabs(demand[r] / demand[0] - available[r] / available[0]);
  }
  return score;
}

int slots_partition(const ResourceVector& capacity, const ResourceVector& max_server,
                    int slots_per_max) {
  if (capacity.size() != max_server.size()) {
    throw std::invalid_argument("slots_partition dimension mismatch");
  }
  if (slots_per_max < 1) throw std::invalid_argument("slots_per_max must be >= 1");
  int count = std::numeric_limits<int>::max();
  for (std::size_t r = 0; r < capacity.size(); ++r) {
    if (!(max_server[r] > 0.0)) {
      throw std::invalid_argument("max server capacities must be positive");
    }
    const double slot = max_server[r] / slots_per_max;
    count = std::min(count, static_cast<int>(std::floor(capacity[r] / slot + 1e-9)));
  }
  return count;
}

std::optional<std::size_t> place_task(const ResourceVector& demand,
                                      std::vector<ServerState>& servers,
                                      const SchedulerPolicy& policy) {
  std::size_t chosen = servers.size();
  if (policy.kind == PolicyKind::first_fit_drfh) {
    for (std::size_t l = 0; l < servers.size(); ++l) {
      if (fits(demand, servers[l].available)) {
        chosen = l;
        break;
      }
    }
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < servers.size(); ++l) {
      if (!fits(demand, servers[l].available)) continue;
      const double score = best_fit_score(demand, servers[l].available);
      if (score < best) {
        best = score;
        chosen = l;
      }
    }
  }
  if (chosen == servers.size()) return std::nullopt;
  servers[chosen].available -= demand;
  return chosen;
}

ClusterScheduler::ClusterScheduler(const ClusterSpec& cluster, SchedulerPolicy policy)
    : policy_(policy), resources_(cluster.resource_count()) {
  servers_.reserve(cluster.server_count());
  for (std::size_t l = 0; l < cluster.server_count(); ++l) {
    ServerState s;
    s.capacity = cluster.servers[l];
    s.available = cluster.servers[l];
    servers_.push_back(std::move(s));
  }
  if (policy_.kind == PolicyKind::slots) {
    // Slot size is defined against the largest server, per resource, in the
    // cluster's raw units.
    std::vector<double> max_server(resources_, 0.0);
    for (const ResourceVector& raw : cluster.raw_units) {
      for (std::size_t r = 0; r < resources_; ++r) {
        max_server[r] = std::max(max_server[r], raw[r]);
      }
    }
    const ResourceVector max_rv{std::move(max_server)};
    for (std::size_t l = 0; l < servers_.size(); ++l) {
      const int slots =
          slots_partition(cluster.raw_units[l], max_rv, policy_.slots_per_max_server);
      servers_[l].total_slots = slots;
      servers_[l].free_slots = slots;
    }
  }
}

std::size_t ClusterScheduler::user_index(const std::string& user) const {
  auto it = user_index_.find(user);
  if (it == user_index_.end()) throw std::invalid_argument("unknown user '" + user + "'");
  return it->second;
}

std::size_t ClusterScheduler::ensure_user(const std::string& user, double now) {
  auto it = user_index_.find(user);
  if (it != user_index_.end()) return it->second;
  UserState u;
  u.id = user;
  u.join_time = now;
  u.held = ResourceVector::zeros(resources_);
  users_.push_back(std::move(u));
  user_index_[user] = users_.size() - 1;
  return users_.size() - 1;
}

void ClusterScheduler::join_user(const std::string& user, double now, double weight) {
  const std::size_t i = ensure_user(user, now);
  users_[i].weight = weight;
  if (users_[i].departed) {  // rejoin opens a new session
    users_[i].departed = false;
    users_[i].join_time = now;
  }
}

std::int64_t ClusterScheduler::depart_user(const std::string& user) {
  const std::size_t i = user_index(user);
  const std::int64_t cancelled = static_cast<std::int64_t>(users_[i].pending.size());
  users_[i].pending.clear();
  users_[i].departed = true;
  return cancelled;
}

bool ClusterScheduler::submit(const Task& task) {
  bool can_ever_fit = false;
  for (const ServerState& s : servers_) {
    if (fits(task.demand, s.capacity)) {
      can_ever_fit = true;
      break;
    }
  }
  if (!can_ever_fit) return false;
  const std::size_t i = ensure_user(task.user_id, task.submit_time);
  if (users_[i].departed) {  // submitting again reopens the session
    users_[i].departed = false;
    users_[i].join_time = task.submit_time;
  }
  users_[i].pending.push_back(task);
  return true;
}

bool ClusterScheduler::pick_next_user(std::size_t& out) const {
  bool found = false;
  for (std::size_t i = 0; i < users_.size(); ++i) {
    const UserState& u = users_[i];
    if (u.blocked || u.pending.empty()) continue;
    if (!found) {
      out = i;
      found = true;
      continue;
    }
    const UserState& best = users_[out];
    if (policy_.kind == PolicyKind::slots) {
      // Max-min on slot counts, ties broken by lowest user id.
      if (u.slot_tasks < best.slot_tasks ||
          (u.slot_tasks == best.slot_tasks && u.id < best.id)) {
        out = i;
      }
    } else {
      const double a = u.held.max_value() / u.weight;
      const double b = best.held.max_value() / best.weight;
      if (a < b ||
          (a == b && (u.join_time < best.join_time ||
                      (u.join_time == best.join_time && u.id < best.id)))) {
        out = i;
      }
    }
  }
  return found;
}

std::vector<PlacementRecord> ClusterScheduler::run_opportunity(double now) {
  std::vector<PlacementRecord> placed;
  std::size_t i = 0;
  while (pick_next_user(i)) {
    UserState& u = users_[i];
    const Task& task = u.pending.front();

    std::optional<std::size_t> server;
    ResourceVector accounted = task.demand;
    if (policy_.kind == PolicyKind::slots) {
      for (std::size_t l = 0; l < servers_.size(); ++l) {
        if (servers_[l].free_slots > 0) {
          server = l;
          break;
        }
      }
      if (server) {
        ServerState& s = servers_[*server];
        s.free_slots -= 1;
        // Placement never looked at the demand; accounted usage is capped at
        // what the server has left so bookkeeping stays within capacity.
        std::vector<double> use(resources_);
        for (std::size_t r = 0; r < resources_; ++r) {
          use[r] = std::min(task.demand[r], s.available[r]);
        }
        accounted = ResourceVector(std::move(use));
        s.available -= accounted;
      }
    } else {
      server = place_task(task.demand, servers_, policy_);
    }

    if (!server) {
      u.blocked = true;
      continue;
    }

    ServerState& s = servers_[*server];
    s.resident.push_back(task.id);
    resident_[task.id] = ResidentTask{*server, i, accounted};
    u.held += accounted;
    u.resident += 1;
    u.slot_tasks += 1;
    placed.push_back(PlacementRecord{now, task.id, task.job_id, u.id, *server,
                                     now + task.duration});
    u.pending.pop_front();
  }
  return placed;
}

void ClusterScheduler::complete(std::int64_t task_id) {
  auto it = resident_.find(task_id);
  if (it == resident_.end()) throw std::invalid_argument("completing a task not resident");
  const ResidentTask rt = it->second;
  resident_.erase(it);

  ServerState& s = servers_[rt.server];
  s.available += rt.accounted;
  for (std::size_t r = 0; r < resources_; ++r) {
    s.available[r] = std::min(s.available[r], s.capacity[r]);
  }
  auto pos = std::find(s.resident.begin(), s.resident.end(), task_id);
  if (pos != s.resident.end()) s.resident.erase(pos);
  if (policy_.kind == PolicyKind::slots) s.free_slots += 1;

  UserState& u = users_[rt.user];
  u.held -= rt.accounted;
  u.resident -= 1;
  u.slot_tasks -= 1;

  // Freed capacity may unblock anyone.
  for (UserState& user : users_) user.blocked = false;
}

double ClusterScheduler::dominant_share(const std::string& user) const {
  const UserState& u = users_[user_index(user)];
  return u.held.empty() ? 0.0 : u.held.max_value();
}

ResourceVector ClusterScheduler::utilization() const {
  ResourceVector used = ResourceVector::zeros(resources_);
  for (const ServerState& s : servers_) {
    used += s.capacity - s.available;
  }
  return used;
}

std::int64_t ClusterScheduler::pending_count() const {
  std::int64_t total = 0;
  for (const UserState& u : users_) total += static_cast<std::int64_t>(u.pending.size());
  return total;
}

std::vector<ClusterScheduler::UserView> ClusterScheduler::user_views() const {
  std::vector<UserView> out;
  out.reserve(users_.size());
  for (const UserState& u : users_) {
    UserView v;
    v.id = u.id;
    v.join_time = u.join_time;
    v.weight = u.weight;
    v.departed = u.departed;
    v.dominant_share = u.held.empty() ? 0.0 : u.held.max_value();
    v.resident = u.resident;
    v.pending = static_cast<int>(u.pending.size());
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace drfh
