#ifndef DRFH_SIMPLEX_HPP
#define DRFH_SIMPLEX_HPP

#include <cstddef>
#include <vector>

namespace drfh {

enum class RowSense { le, ge, eq };

/// Canonical-form linear program: maximize objective . x subject to the rows,
/// x >= 0, and optional finite per-variable upper bounds.
struct LpProblem {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  std::vector<double> upper_bounds;  // empty means all unbounded above

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  void add_row(std::vector<double> coeffs, RowSense sense, double b) {
    rows.push_back(std::move(coeffs));
    senses.push_back(sense);
    rhs.push_back(b);
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Dense two-phase primal simplex with Bland's anti-cycling rule. Intended for
/// small, well-conditioned programs; iteration_limit is reported rather than
/// silently returning an approximate point.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace drfh

#endif  // DRFH_SIMPLEX_HPP
