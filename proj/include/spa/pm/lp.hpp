#pragma once

#include <vector>

namespace spa::pm {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double value = 0.0;
};

// min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
// Dense two-phase simplex with Bland's rule. Rows are given as dense vectors
// of length c.size().
struct LinearProgram {
  std::vector<double> c;
  std::vector<std::vector<double>> A_ub;
  std::vector<double> b_ub;
  std::vector<std::vector<double>> A_eq;
  std::vector<double> b_eq;
};

inline constexpr double kLpTolerance = 1e-9;

LpResult solve_lp(const LinearProgram& lp, double tol = kLpTolerance);

}  // namespace spa::pm
