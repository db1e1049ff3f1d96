#ifndef DRFH_TEST_ORACLES_HPP
#define DRFH_TEST_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "drfh/resource_model.hpp"

namespace drfh::testing {

// Independent optimum oracle for the equalized-share program on micro
// instances. It scans the fairness level g over a fixed grid and decides each
// level's feasibility by exhaustively enumerating basic solutions of the
// constraint system with Gaussian elimination: no pivoting rules or code
// shared with the production solver. Feasible levels are downward closed
// (scale any witness), so the largest feasible grid point is found by
// bisection over the grid without changing the answer.
class GridShareOracle {
 public:
  GridShareOracle(const ClusterSpec& cluster, std::span<const UserDemand> users)
      : cluster_(cluster), users_(users.begin(), users.end()) {}

  double largest_feasible(double step) const {
    std::size_t lo = 0;  // g = 0 always feasible
    std::size_t hi = static_cast<std::size_t>(std::ceil(1.0 / step)) + 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (feasible(static_cast<double>(mid) * step)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return static_cast<double>(lo) * step;
  }

  // Is there a nonnegative share matrix with every row summing to g that
  // respects all server capacities?
  bool feasible(double g) const {
    const std::size_t n = users_.size();
    const std::size_t k = cluster_.server_count();
    const std::size_t m = cluster_.resource_count();
    const std::size_t vars = n * k;

    // Inequalities: k*m capacity rows then vars nonnegativity rows, both kept
    // as row/rhs pairs in "a . x <= b" form.
    std::vector<std::vector<double>> ineq;
    std::vector<double> ineq_rhs;
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t r = 0; r < m; ++r) {
        std::vector<double> row(vars, 0.0);
        for (std::size_t i = 0; i < n; ++i) row[i * k + l] = users_[i].normalized[r];
        ineq.push_back(std::move(row));
        ineq_rhs.push_back(cluster_.servers[l][r]);
      }
    }
    for (std::size_t v = 0; v < vars; ++v) {
      std::vector<double> row(vars, 0.0);
      row[v] = -1.0;  // -x_v <= 0
      ineq.push_back(std::move(row));
      ineq_rhs.push_back(0.0);
    }

    // Every vertex of the (bounded) feasible polytope activates the n row-sum
    // equalities plus vars - n of the inequalities; enumerate those choices.
    const std::size_t need = vars - n;
    std::vector<std::size_t> pick(need);
    for (std::size_t i = 0; i < need; ++i) pick[i] = i;
    if (need == 0) return basic_point_feasible(g, {}, ineq, ineq_rhs);

    while (true) {
      if (basic_point_feasible(g, pick, ineq, ineq_rhs)) return true;
      // next combination
      std::size_t pos = need;
      while (pos > 0) {
        --pos;
        if (pick[pos] + (need - pos) < ineq.size()) break;
        if (pos == 0) return false;
      }
      if (pick[pos] + (need - pos) >= ineq.size()) return false;
      ++pick[pos];
      for (std::size_t q = pos + 1; q < need; ++q) pick[q] = pick[q - 1] + 1;
    }
  }

 private:
  bool basic_point_feasible(double g, std::span<const std::size_t> active,
                            const std::vector<std::vector<double>>& ineq,
                            const std::vector<double>& ineq_rhs) const {
    const std::size_t n = users_.size();
    const std::size_t k = cluster_.server_count();
    const std::size_t vars = n * k;

    // Square system: n row-sum equalities plus the chosen active inequalities.
    std::vector<std::vector<double>> a(vars, std::vector<double>(vars + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < k; ++l) a[i][i * k + l] = 1.0;
      a[i][vars] = g;
    }
    for (std::size_t j = 0; j < active.size(); ++j) {
      for (std::size_t v = 0; v < vars; ++v) a[n + j][v] = ineq[active[j]][v];
      a[n + j][vars] = ineq_rhs[active[j]];
    }

    // Gaussian elimination with partial pivoting; singular -> no vertex here.
    for (std::size_t col = 0; col < vars; ++col) {
      std::size_t piv = col;
      for (std::size_t row = col + 1; row < vars; ++row) {
        if (std::fabs(a[row][col]) > std::fabs(a[piv][col])) piv = row;
      }
      if (std::fabs(a[piv][col]) < 1e-11) return false;
      std::swap(a[col], a[piv]);
      for (std::size_t row = 0; row < vars; ++row) {
        if (row == col) continue;
        const double f = a[row][col] / a[col][col];
        if (f == 0.0) continue;
        for (std::size_t c = col; c <= vars; ++c) a[row][c] -= f * a[col][c];
      }
    }
    std::vector<double> x(vars);
    for (std::size_t v = 0; v < vars; ++v) x[v] = a[v][vars] / a[v][v];

    for (std::size_t j = 0; j < ineq.size(); ++j) {
      double lhs = 0.0;
      for (std::size_t v = 0; v < vars; ++v) lhs += ineq[j][v] * x[v];
      if (lhs > ineq_rhs[j] + 1e-9) return false;
    }
    return true;
  }

  const ClusterSpec& cluster_;
  std::vector<UserDemand> users_;
};

}  // namespace drfh::testing

#endif  // DRFH_TEST_ORACLES_HPP
