#include "spa/pm/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace spa::pm {
namespace {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  // Row m_ holds reduced costs; its rhs is minus the objective.
  double& cost(std::size_t j) { return at(m_, j); }

  void pivot(std::size_t r, std::size_t c) {
    const double pv = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= pv;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
    }
    basis[r] = c;
  }

  // Bland's rule over columns [0, ncols). Returns false when unbounded.
  bool optimize(std::size_t ncols, double tol) {
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (cost(j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter == ncols) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double v = at(i, enter);
        if (v <= tol) continue;
        const double ratio = rhs(i) / v;
        if (ratio < best - tol || (ratio <= best + tol && leave < m_ && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("solve_lp: pivot limit reached");
  }

  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const std::size_t nv = lp.c.size();
  const std::size_t n_ub = lp.A_ub.size();
  const std::size_t n_eq = lp.A_eq.size();
  if (lp.b_ub.size() != n_ub || lp.b_eq.size() != n_eq) {
    throw std::invalid_argument("solve_lp: row and rhs counts differ");
  }
  const std::size_t m = n_ub + n_eq;
  // columns: original | slacks | artificials
  const std::size_t n_slack = n_ub;
  const std::size_t art0 = nv + n_slack;
  const std::size_t ncols = art0 + m;
  Tableau tb(m, ncols);
  tb.basis.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const bool ub = i < n_ub;
    const auto& row = ub ? lp.A_ub[i] : lp.A_eq[i - n_ub];
    if (row.size() != nv) throw std::invalid_argument("solve_lp: row length differs from c");
    double b = ub ? lp.b_ub[i] : lp.b_eq[i - n_ub];
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nv; ++j) tb.at(i, j) = sign * row[j];
    if (ub) tb.at(i, nv + i) = sign;
    tb.at(i, art0 + i) = 1.0;
    tb.rhs(i) = sign * b;
    tb.basis[i] = art0 + i;
  }
  // Phase 1: minimize the sum of artificials.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= ncols; ++j) {
      if (j >= art0 && j < ncols) continue;
      tb.at(m, j) -= tb.at(i, j);
    }
  }
  tb.optimize(ncols, tol);
  LpResult res;
  if (-tb.rhs(m) > tol * std::max<double>(1.0, static_cast<double>(m))) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  // Drive artificials out of the basis; rows where that is impossible are
  // redundant and stay inert.
  for (std::size_t i = 0; i < m; ++i) {
    if (tb.basis[i] < art0) continue;
    for (std::size_t j = 0; j < art0; ++j) {
      if (std::abs(tb.at(i, j)) > tol) {
        tb.pivot(i, j);
        break;
      }
    }
  }
  // Phase 2 over the non-artificial columns.
  for (std::size_t j = 0; j <= ncols; ++j) tb.at(m, j) = 0.0;
  for (std::size_t j = 0; j < nv; ++j) tb.at(m, j) = lp.c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = tb.basis[i];
    if (bj >= art0) continue;
    const double f = tb.at(m, bj);
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= ncols; ++j) tb.at(m, j) -= f * tb.at(i, j);
  }
  // Artificial columns must not re-enter.
  if (!tb.optimize(art0, tol)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  res.status = LpStatus::Optimal;
  res.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tb.basis[i] < nv) res.x[tb.basis[i]] = tb.rhs(i);
  }
  res.value = 0.0;
  for (std::size_t j = 0; j < nv; ++j) res.value += lp.c[j] * res.x[j];
  return res;
}

}  // namespace spa::pm
