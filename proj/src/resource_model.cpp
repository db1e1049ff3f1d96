#include "drfh/resource_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drfh {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ResourceVector::ResourceVector(std::vector<double> values) : v_(std::move(values)) {
  for (double& x : v_) {
    require(std::isfinite(x), "resource vector entry must be finite");
    if (x < 0.0) {
      require(x > -1e-9, "resource vector entry must be nonnegative");
      x = 0.0;  // arithmetic dust
    }
  }
}

ResourceVector ResourceVector::zeros(std::size_t m) {
  return ResourceVector(std::vector<double>(m, 0.0));
}

ResourceVector& ResourceVector::operator+=(const ResourceVector& o) {
  require(v_.size() == o.v_.size(), "resource vector dimension mismatch");
  for (std::size_t r = 0; r < v_.size(); ++r) v_[r] += o.v_[r];
  return *this;
}

ResourceVector& ResourceVector::operator-=(const ResourceVector& o) {
  require(v_.size() == o.v_.size(), "resource vector dimension mismatch");
  for (std::size_t r = 0; r < v_.size(); ++r) {
    v_[r] -= o.v_[r];
    if (v_[r] < 0.0) {
      require(v_[r] > -1e-9, "resource vector subtraction went negative");
      v_[r] = 0.0;
    }
  }
  return *this;
}

ResourceVector operator*(double s, const ResourceVector& x) {
  ResourceVector out = x;
  for (double& v : out.v_) v *= s;
  return out;
}

bool ResourceVector::fits_within(const ResourceVector& bound, double tol) const {
  require(v_.size() == bound.size(), "resource vector dimension mismatch");
  for (std::size_t r = 0; r < v_.size(); ++r) {
    if (v_[r] > bound[r] + tol) return false;
  }
  return true;
}

double ResourceVector::min_ratio_over(const ResourceVector& denom) const {
  require(v_.size() == denom.size(), "resource vector dimension mismatch");
  require(!v_.empty(), "min_ratio_over on empty vector");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < v_.size(); ++r) {
    require(denom[r] > 0.0, "min_ratio_over requires strictly positive denominator");
    best = std::min(best, v_[r] / denom[r]);
  }
  return best;
}

double ResourceVector::max_value() const {
  require(!v_.empty(), "max_value on empty vector");
  return *std::max_element(v_.begin(), v_.end());
}

std::size_t ResourceVector::argmax() const {
  require(!v_.empty(), "argmax on empty vector");
  std::size_t best = 0;
  for (std::size_t r = 1; r < v_.size(); ++r) {
    if (v_[r] > v_[best]) best = r;
  }
  return best;
}

double ResourceVector::sum() const {
  double s = 0.0;
  for (double x : v_) s += x;
  return s;
}

DominantShareMatrix DominantShareMatrix::zeros(std::size_t n, std::size_t k) {
  DominantShareMatrix out;
  out.users = n;
  out.servers = k;
  out.g.assign(n * k, 0.0);
  return out;
}

double DominantShareMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t l = 0; l < servers; ++l) s += at(i, l);
  return s;
}

AllocationMatrix AllocationMatrix::zeros(std::size_t n, std::size_t k, std::size_t m) {
  AllocationMatrix out;
  out.users = n;
  out.servers = k;
  out.shares.assign(n * k, ResourceVector::zeros(m));
  return out;
}

ClusterSpec normalize_cluster(std::span<const ResourceVector> raw_servers,
                              std::vector<std::string> resource_names) {
  require(!raw_servers.empty(), "cluster needs at least one server");
  const std::size_t m = raw_servers[0].size();
  require(m >= 1, "cluster needs at least one resource");

  // long double accumulation keeps the per-resource sums at 1 within 1e-12
  // even for large clusters
  std::vector<long double> totals(m, 0.0L);
  for (const ResourceVector& s : raw_servers) {
    require(s.size() == m, "server capacity dimension mismatch");
    bool any_positive = false;
    for (std::size_t r = 0; r < m; ++r) {
      totals[r] += s[r];
      any_positive = any_positive || s[r] > 0.0;
    }
    require(any_positive, "server must have at least one positive capacity");
  }
  for (std::size_t r = 0; r < m; ++r) {
    require(totals[r] > 0.0L, "resource has zero system-wide capacity");
  }

  ClusterSpec out;
  out.raw_units.assign(raw_servers.begin(), raw_servers.end());
  out.raw_totals.resize(m);
  for (std::size_t r = 0; r < m; ++r) out.raw_totals[r] = static_cast<double>(totals[r]);
  out.servers.reserve(raw_servers.size());
  for (const ResourceVector& s : raw_servers) {
    std::vector<double> c(m);
    for (std::size_t r = 0; r < m; ++r) {
      c[r] = static_cast<double>(static_cast<long double>(s[r]) / totals[r]);
    }
    out.servers.emplace_back(std::move(c));
  }

  if (resource_names.empty()) {
    if (m == 2) {
      resource_names = {"cpu", "mem"};
    } else {
      for (std::size_t r = 0; r < m; ++r) resource_names.push_back("r" + std::to_string(r));
    }
  }
  require(resource_names.size() == m, "resource name count mismatch");
  out.resource_names = std::move(resource_names);
  return out;
}

UserDemand derive_demand(const ResourceVector& per_task_absolute,
                         const ClusterSpec& cluster, double weight,
                         double task_budget) {
  const std::size_t m = cluster.resource_count();
  require(per_task_absolute.size() == m, "demand dimension mismatch");
  require(weight > 0.0, "user weight must be positive");
  require(task_budget > 0.0, "task budget must be positive");

  std::vector<double> shares(m);
  for (std::size_t r = 0; r < m; ++r) {
    require(per_task_absolute[r] > 0.0, "per-task demand must be strictly positive");
    shares[r] = per_task_absolute[r] / cluster.raw_totals[r];
  }

  UserDemand user;
  user.per_task = ResourceVector(shares);
  user.dominant = user.per_task.argmax();
  std::vector<double> norm(m);
  const double dom = user.per_task[user.dominant];
  for (std::size_t r = 0; r < m; ++r) norm[r] = shares[r] / dom;
  norm[user.dominant] = 1.0;
  user.normalized = ResourceVector(std::move(norm));
  user.weight = weight;
  user.task_budget = task_budget;
  return user;
}

TaskCount tasks_under_allocation(const UserDemand& user,
                                 std::span<const ResourceVector> allocation) {
  TaskCount out;
  out.per_server.reserve(allocation.size());
  for (const ResourceVector& a : allocation) {
    require(a.size() == user.per_task.size(), "allocation dimension mismatch");
    const double n = a.min_ratio_over(user.per_task);
    out.per_server.push_back(n);
    out.total += n;
  }
  return out;
}

DominantShare global_dominant_share(const UserDemand& user,
                                    std::span<const ResourceVector> allocation) {
  DominantShare out;
  out.per_server.reserve(allocation.size());
  for (const ResourceVector& a : allocation) {
    require(a.size() == user.normalized.size(), "allocation dimension mismatch");
    const double g = a.min_ratio_over(user.normalized);
    out.per_server.push_back(g);
    out.total += g;
  }
  return out;
}

std::vector<double> make_non_wasteful(const UserDemand& user,
                                      std::span<const ResourceVector> allocation) {
  return global_dominant_share(user, allocation).per_server;
}

AllocationMatrix to_allocation(const DominantShareMatrix& shares,
                               std::span<const UserDemand> users) {
  require(shares.users == users.size(), "user count mismatch");
  const std::size_t m = users.empty() ? 0 : users[0].normalized.size();
  AllocationMatrix out = AllocationMatrix::zeros(shares.users, shares.servers, m);
  for (std::size_t i = 0; i < shares.users; ++i) {
    for (std::size_t l = 0; l < shares.servers; ++l) {
      out.at(i, l) = shares.at(i, l) * users[i].normalized;
    }
  }
  return out;
}

bool allocation_feasible(const AllocationMatrix& alloc, const ClusterSpec& cluster,
                         double tol) {
  if (alloc.servers != cluster.server_count()) return false;
  for (std::size_t l = 0; l < alloc.servers; ++l) {
    ResourceVector used = ResourceVector::zeros(cluster.resource_count());
    for (std::size_t i = 0; i < alloc.users; ++i) used += alloc.at(i, l);
    if (!used.fits_within(cluster.servers[l], tol)) return false;
  }
  return true;
}

bool shares_feasible(const DominantShareMatrix& shares,
                     std::span<const UserDemand> users, const ClusterSpec& cluster,
                     double tol) {
  if (shares.users != users.size() || shares.servers != cluster.server_count()) {
    return false;
  }
  for (std::size_t l = 0; l < shares.servers; ++l) {
    for (std::size_t r = 0; r < cluster.resource_count(); ++r) {
      double used = 0.0;
      for (std::size_t i = 0; i < shares.users; ++i) {
        used += shares.at(i, l) * users[i].normalized[r];
      }
      if (used > cluster.servers[l][r] + tol) return false;
    }
  }
  return true;
}

}  // namespace drfh
