#pragma once

#include <string>
#include <vector>

namespace polylim {

struct LpRow {
  std::vector<double> coeffs;  // dense, one entry per variable
  double rhs = 0.0;
};

/// minimize objective . x + objective_constant
/// subject to  eq rows:  coeffs . x == rhs
///             ge rows:  coeffs . x >= rhs
///             lower <= x <= upper   (either bound may be infinite)
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<LpRow> eq;
  std::vector<LpRow> ge;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> eq_activity;  // coeffs . x per equality row
  std::vector<double> ge_activity;  // coeffs . x per inequality row
  // Rows still violated when phase 1 bottoms out above zero.
  std::vector<int> infeasible_eq_rows;
  std::vector<int> infeasible_ge_rows;
  long long iterations = 0;
};

struct LpOptions {
  bool parallel = false;       // OpenMP over row-major scans; same results as serial
  long long max_iterations = 0;  // 0 picks a bound from the problem size
};

/// Bounded-variable primal simplex; two-phase (phase 1 drives out bound
/// violations without artificial columns), Dantzig pricing with a Bland
/// fallback after a stall. Deterministic for identical input.
/// Throws std::invalid_argument for malformed problems.
LpSolution solve(const LpProblem& p, const LpOptions& opts = {});

/// Plain-text dump of variables, rows and bounds for debugging.
std::string dump_problem(const LpProblem& p);

}  // namespace polylim
