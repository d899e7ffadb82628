#pragma once

#include <span>

#include "spa/pm/game.hpp"
#include "spa/pm/geometry.hpp"
#include "spa/simplex.hpp"

namespace spa::pm {

// Sampling distribution plus estimator with the objective
//   max_x [ (p - q)'L e_x / eta + bias_q(G; x) / eta
//           + eta^-2 sum_a p_a <q, xi(eta G(a, Phi_ax) / p_a)> ]
// where bias_q(G; x) = <q, L e_x - sum_a G(a, Phi_ax)>
//                      + max_{c in Pareto} (sum_a G(a, Phi_ax)_c - L_cx).
double ebo_objective(const PmGame& game, const GameGeometry& geom, std::span<const double> p, const EstimatorG& G,
                     const ProbVector& q, double eta);

struct EboOptions {
  double tol = 1e-7;
  int max_stages = 14;
  int max_newton = 60;
  double anneal = 0.1;
};

struct EboResult {
  ProbVector p;
  EstimatorG G;
  double opt_value = 0.0;
  double vprime = 0.0;
  int iterations = 0;
  int stages = 0;
  double smoothing_gap = 0.0;  // true minus smoothed objective at the returned point
  bool converged = false;
};

// Feasible set: p = q for FI and MAB, p >= q / (2k) on the simplex for
// PM-local. G is free. `warm` (optional) competes with G0 as the start.
EboResult ebo_solve(const PmGame& game, const GameGeometry& geom, const EstimatorG& g0, const ProbVector& q,
                    double eta, Model model, const EboOptions& opts = {}, const EstimatorG* warm = nullptr);

// Entrywise lower bound of the PM-local feasible set.
std::vector<double> pm_local_lower_bound(const ProbVector& q);

}  // namespace spa::pm
