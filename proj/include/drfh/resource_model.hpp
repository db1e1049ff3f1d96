#ifndef DRFH_RESOURCE_MODEL_HPP
#define DRFH_RESOURCE_MODEL_HPP

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace drfh {

// Tolerances used throughout: capacity feasibility checks allow kFeasibilityTol
// of slack; algebraic identities are asserted to kIdentityTol.
inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kIdentityTol = 1e-12;

inline constexpr double kInfiniteTasks = std::numeric_limits<double>::infinity();

/// An m-dimensional nonnegative quantity over resource types (CPU, memory,
/// ...). After cluster normalization, values are dimensionless fractions of
/// the system-wide total of each resource.
class ResourceVector {
 public:
  ResourceVector() = default;
  explicit ResourceVector(std::vector<double> values);

  static ResourceVector zeros(std::size_t m);

  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  double operator[](std::size_t r) const { return v_[r]; }
  double& operator[](std::size_t r) { return v_[r]; }
  const std::vector<double>& values() const { return v_; }

  ResourceVector& operator+=(const ResourceVector& o);
  // Subtraction clamps rounding dust in [-1e-9, 0) back to zero.
  ResourceVector& operator-=(const ResourceVector& o);

  friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) {
    a += b;
    return a;
  }
  friend ResourceVector operator-(ResourceVector a, const ResourceVector& b) {
    a -= b;
    return a;
  }
  friend ResourceVector operator*(double s, const ResourceVector& x);

  /// true iff this <= bound + tol componentwise
  bool fits_within(const ResourceVector& bound, double tol = 0.0) const;

  /// min_r this[r] / denom[r]; requires denom strictly positive everywhere
  double min_ratio_over(const ResourceVector& denom) const;

  double max_value() const;
  std::size_t argmax() const;  // ties resolved to the lowest index
  double sum() const;

 private:
  std::vector<double> v_;
};

/// The server set with normalized per-server capacities. After
/// normalize_cluster, every resource's capacities sum to 1 across servers.
struct ClusterSpec {
  std::vector<ResourceVector> servers;      // normalized capacities c_l
  std::vector<ResourceVector> raw_units;    // absolute capacities as ingested
  std::vector<double> raw_totals;           // per-resource absolute totals
  std::vector<std::string> resource_names;  // size m

  std::size_t server_count() const { return servers.size(); }
  std::size_t resource_count() const { return raw_totals.size(); }
};

/// A user's per-task demand. per_task holds fractions of the system total;
/// normalized divides by the dominant component so its max entry is exactly 1.
struct UserDemand {
  ResourceVector per_task;    // fraction of system total required per task
  ResourceVector normalized;  // per_task / per_task[dominant]
  std::size_t dominant = 0;   // index of the most heavily demanded resource
  double weight = 1.0;
  double task_budget = kInfiniteTasks;  // fractional budgets allowed
};

/// n x k matrix of dominant-share scalars: entry (i, l) is the global dominant
/// share user i holds in server l. The canonical non-wasteful representation:
/// the corresponding allocation is g_il * normalized demand of i.
struct DominantShareMatrix {
  std::size_t users = 0;
  std::size_t servers = 0;
  std::vector<double> g;  // row-major users x servers

  static DominantShareMatrix zeros(std::size_t n, std::size_t k);

  double at(std::size_t i, std::size_t l) const { return g[i * servers + l]; }
  double& at(std::size_t i, std::size_t l) { return g[i * servers + l]; }
  double row_sum(std::size_t i) const;
};

/// n x k array of allocation vectors, possibly wasteful.
struct AllocationMatrix {
  std::size_t users = 0;
  std::size_t servers = 0;
  std::vector<ResourceVector> shares;  // row-major

  static AllocationMatrix zeros(std::size_t n, std::size_t k, std::size_t m);

  const ResourceVector& at(std::size_t i, std::size_t l) const {
    return shares[i * servers + l];
  }
  ResourceVector& at(std::size_t i, std::size_t l) { return shares[i * servers + l]; }
};

/// Normalizes absolute server capacities so each resource's total is 1.
/// Throws std::invalid_argument on dimension mismatch or a resource whose
/// system-wide total is zero.
ClusterSpec normalize_cluster(std::span<const ResourceVector> raw_servers,
                              std::vector<std::string> resource_names = {});

/// Converts an absolute per-task demand into system-total fractions, finds the
/// dominant resource (argmax share, ties to the lowest index) and the
/// normalized demand vector. Demands must be strictly positive everywhere.
UserDemand derive_demand(const ResourceVector& per_task_absolute,
                         const ClusterSpec& cluster, double weight = 1.0,
                         double task_budget = kInfiniteTasks);

struct TaskCount {
  std::vector<double> per_server;  // N_il
  double total = 0.0;              // N_i
};

/// Number of tasks (possibly fractional) schedulable under a per-server
/// allocation: N_il = min_r A_ilr / D_ir.
TaskCount tasks_under_allocation(const UserDemand& user,
                                 std::span<const ResourceVector> allocation);

struct DominantShare {
  std::vector<double> per_server;  // G_il
  double total = 0.0;              // G_i
};

/// Global dominant share received per server: G_il = min_r A_ilr / d_ir.
/// Identity: G_il = N_il * D_i[dominant].
DominantShare global_dominant_share(const UserDemand& user,
                                    std::span<const ResourceVector> allocation);

/// Trims an allocation to its non-wasteful equivalent: the row of dominant
/// share scalars g_il = min_r A_ilr / d_ir. The reconstructed allocation
/// g_il * d_i is componentwise <= the input and schedules the same number of
/// tasks. Idempotent on already-non-wasteful input.
std::vector<double> make_non_wasteful(const UserDemand& user,
                                      std::span<const ResourceVector> allocation);

/// Reconstructs the (non-wasteful) allocation A_il = g_il * d_i.
AllocationMatrix to_allocation(const DominantShareMatrix& shares,
                               std::span<const UserDemand> users);

/// Per-server capacity feasibility of an allocation matrix.
bool allocation_feasible(const AllocationMatrix& alloc, const ClusterSpec& cluster,
                         double tol = kFeasibilityTol);

/// Per-server capacity feasibility of a dominant-share matrix.
bool shares_feasible(const DominantShareMatrix& shares,
                     std::span<const UserDemand> users, const ClusterSpec& cluster,
                     double tol = kFeasibilityTol);

}  // namespace drfh

#endif  // DRFH_RESOURCE_MODEL_HPP
