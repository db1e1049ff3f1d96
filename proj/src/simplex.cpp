#include "drfh/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drfh {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kInfeasTol = 1e-7;

struct Tableau {
  std::size_t m = 0;     // rows
  std::size_t n = 0;     // columns excluding rhs
  std::vector<double> a; // m x (n + 1), rhs in the last column
  std::vector<std::size_t> basis;

  double& at(std::size_t r, std::size_t c) { return a[r * (n + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * (n + 1) + c]; }
  double& rhs(std::size_t r) { return a[r * (n + 1) + n]; }
  double rhs(std::size_t r) const { return a[r * (n + 1) + n]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double piv = at(pr, pc);
    for (std::size_t c = 0; c <= n; ++c) at(pr, c) /= piv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis[pr] = pc;
  }

  void erase_row(std::size_t r) {
    a.erase(a.begin() + static_cast<std::ptrdiff_t>(r * (n + 1)),
            a.begin() + static_cast<std::ptrdiff_t>((r + 1) * (n + 1)));
    basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
    --m;
  }
};

enum class IterResult { optimal, unbounded, iteration_limit };

// Maximizes cost . x over the current tableau. allowed[j] masks columns that
// may enter the basis. Bland's rule: smallest-index entering column with a
// positive reduced cost, smallest basis index on ratio ties.
IterResult run_simplex(Tableau& t, const std::vector<double>& cost,
                       const std::vector<char>& allowed) {
  const std::size_t iter_cap = 50000 + 200 * (t.m + t.n);
  for (std::size_t iter = 0; iter < iter_cap; ++iter) {
    std::vector<double> dual(t.m);
    for (std::size_t r = 0; r < t.m; ++r) dual[r] = cost[t.basis[r]];

    std::size_t enter = t.n;
    for (std::size_t j = 0; j < t.n; ++j) {
      if (!allowed[j]) continue;
      double reduced = cost[j];
      for (std::size_t r = 0; r < t.m; ++r) {
        if (dual[r] != 0.0) reduced -= dual[r] * t.at(r, j);
      }
      if (reduced > kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == t.n) return IterResult::optimal;

    std::size_t leave = t.m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.m; ++r) {
      const double coef = t.at(r, enter);
      if (coef > kPivotTol) {
        const double ratio = t.rhs(r) / coef;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (leave == t.m || t.basis[r] < t.basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave == t.m) return IterResult::unbounded;
    t.pivot(leave, enter);
  }
  return IterResult::iteration_limit;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const std::size_t nvars = problem.num_vars();
  if (problem.rows.size() != problem.senses.size() ||
      problem.rows.size() != problem.rhs.size()) {
    throw std::invalid_argument("lp: inconsistent row/sense/rhs sizes");
  }
  for (const auto& row : problem.rows) {
    if (row.size() != nvars) throw std::invalid_argument("lp: row width mismatch");
  }
  if (!problem.upper_bounds.empty() && problem.upper_bounds.size() != nvars) {
    throw std::invalid_argument("lp: upper bound count mismatch");
  }

  // Assemble rows, expanding finite upper bounds into <= rows and flipping
  // signs so every rhs is nonnegative.
  std::vector<std::vector<double>> rows = problem.rows;
  std::vector<RowSense> senses = problem.senses;
  std::vector<double> rhs = problem.rhs;
  for (std::size_t j = 0; j < problem.upper_bounds.size(); ++j) {
    const double ub = problem.upper_bounds[j];
    if (std::isfinite(ub)) {
      std::vector<double> row(nvars, 0.0);
      row[j] = 1.0;
      rows.push_back(std::move(row));
      senses.push_back(RowSense::le);
      rhs.push_back(ub);
    }
  }
  const std::size_t m = rows.size();
  for (std::size_t r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) {
      for (double& v : rows[r]) v = -v;
      rhs[r] = -rhs[r];
      if (senses[r] == RowSense::le) {
        senses[r] = RowSense::ge;
      } else if (senses[r] == RowSense::ge) {
        senses[r] = RowSense::le;
      }
    }
  }

  std::size_t num_slack = 0;
  std::size_t num_art = 0;
  for (RowSense s : senses) {
    if (s != RowSense::eq) ++num_slack;
    if (s != RowSense::le) ++num_art;
  }
  const std::size_t total = nvars + num_slack + num_art;

  Tableau t;
  t.m = m;
  t.n = total;
  t.a.assign(m * (total + 1), 0.0);
  t.basis.assign(m, 0);

  std::vector<char> artificial(total, 0);
  std::size_t slack_at = nvars;
  std::size_t art_at = nvars + num_slack;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < nvars; ++j) t.at(r, j) = rows[r][j];
    t.rhs(r) = rhs[r];
    switch (senses[r]) {
      case RowSense::le:
        t.at(r, slack_at) = 1.0;
        t.basis[r] = slack_at++;
        break;
      case RowSense::ge:
        t.at(r, slack_at) = -1.0;
        ++slack_at;
        t.at(r, art_at) = 1.0;
        artificial[art_at] = 1;
        t.basis[r] = art_at++;
        break;
      case RowSense::eq:
        t.at(r, art_at) = 1.0;
        artificial[art_at] = 1;
        t.basis[r] = art_at++;
        break;
    }
  }

  LpSolution out;
  std::vector<char> allow_all(total, 1);

  if (num_art > 0) {
    std::vector<double> phase1(total, 0.0);
    for (std::size_t j = 0; j < total; ++j) {
      if (artificial[j]) phase1[j] = -1.0;
    }
    const IterResult r1 = run_simplex(t, phase1, allow_all);
    if (r1 == IterResult::iteration_limit) {
      out.status = LpStatus::iteration_limit;
      return out;
    }
    double art_sum = 0.0;
    for (std::size_t r = 0; r < t.m; ++r) {
      if (artificial[t.basis[r]]) art_sum += t.rhs(r);
    }
    if (art_sum > kInfeasTol) {
      out.status = LpStatus::infeasible;
      return out;
    }
    // Drive leftover artificials out of the basis; a row with no usable pivot
    // is redundant and dropped.
    for (std::size_t r = 0; r < t.m;) {
      if (!artificial[t.basis[r]]) {
        ++r;
        continue;
      }
      std::size_t pc = total;
      for (std::size_t j = 0; j < total; ++j) {
        if (!artificial[j] && std::fabs(t.at(r, j)) > kPivotTol) {
          pc = j;
          break;
        }
      }
      if (pc == total) {
        t.erase_row(r);
      } else {
        t.pivot(r, pc);
        ++r;
      }
    }
  }

  std::vector<char> allowed(total, 1);
  for (std::size_t j = 0; j < total; ++j) {
    if (artificial[j]) allowed[j] = 0;
  }
  std::vector<double> cost(total, 0.0);
  for (std::size_t j = 0; j < nvars; ++j) cost[j] = problem.objective[j];

  const IterResult r2 = run_simplex(t, cost, allowed);
  if (r2 == IterResult::iteration_limit) {
    out.status = LpStatus::iteration_limit;
    return out;
  }
  if (r2 == IterResult::unbounded) {
    out.status = LpStatus::unbounded;
    return out;
  }

  out.status = LpStatus::optimal;
  out.x.assign(nvars, 0.0);
  for (std::size_t r = 0; r < t.m; ++r) {
    if (t.basis[r] < nvars) out.x[t.basis[r]] = t.rhs(r);
  }
  out.objective = 0.0;
  for (std::size_t j = 0; j < nvars; ++j) {
    out.objective += problem.objective[j] * out.x[j];
  }
  return out;
}

}  // namespace drfh
