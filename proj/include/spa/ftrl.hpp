#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "spa/simplex.hpp"

namespace spa {

// Phi(q) = beta * sum q log q + barrier_weight * sum log(1/q).
// beta is the inverse learning rate.
struct RegularizerSpec {
  double beta = 1.0;
  double barrier_weight = 0.0;

  RegularizerSpec() = default;
  RegularizerSpec(double beta_, double barrier_weight_ = 0.0);

  DivergenceKind divergence() const { return DivergenceKind::Hybrid(beta, barrier_weight); }
};

struct FtrlSolution {
  ProbVector q;
  // Simplex multiplier in L_i + beta log q_i - c / q_i + mu = 0.
  double mu = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct FtrlOptions {
  double tol = 1e-10;
  // Multiplier of a nearby problem, e.g. the previous round.
  std::optional<double> warm_mu;
  int max_outer = 200;
  int max_inner = 200;
};

// Thrown when the solver exhausts its iteration caps without meeting the
// residual tolerance. Carries the best iterate.
class FtrlConvergenceError : public std::runtime_error {
 public:
  FtrlConvergenceError(const std::string& what, std::vector<double> best_q,
                       double best_mu, double residual)
      : std::runtime_error(what),
        best_q_(std::move(best_q)),
        best_mu_(best_mu),
        residual_(residual) {}

  const std::vector<double>& best_q() const { return best_q_; }
  double best_mu() const { return best_mu_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> best_q_;
  double best_mu_;
  double residual_;
};

// argmin_{q in simplex} <L, q> + Phi(q).
//
// Without a barrier the answer is the softmax of -L / beta, evaluated in
// shifted log space. With a barrier each coordinate inverts the increasing
// map q -> beta log q - c / q for a given multiplier, and an outer
// safeguarded Newton search finds the multiplier at which the coordinates sum
// to one.
FtrlSolution solve_ftrl(std::span<const double> cum_loss, const RegularizerSpec& reg,
                        const FtrlOptions& options = {});

// Phi(q) alone.
double regularizer_value(std::span<const double> q, const RegularizerSpec& reg);

// <L, q> + Phi(q).
double ftrl_objective(std::span<const double> q, std::span<const double> cum_loss,
                      const RegularizerSpec& reg);

struct PenaltyStability {
  double penalty = 0.0;
  double stability = 0.0;
};

// penalty   = Phi_t(q_next) - Phi_{t+1}(q_next)
// stability = <q_t - q_next, y_hat> - D_{Phi_t}(q_next, q_t)
PenaltyStability penalty_stability_split(std::span<const double> q_t,
                                         std::span<const double> q_next,
                                         const RegularizerSpec& reg_t,
                                         const RegularizerSpec& reg_next,
                                         std::span<const double> y_hat);

}  // namespace spa
