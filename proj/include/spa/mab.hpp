#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "spa/environment.hpp"
#include "spa/ftrl.hpp"
#include "spa/rng.hpp"
#include "spa/simplex.hpp"
#include "spa/spa_rate.hpp"
#include "spa/trace.hpp"

namespace spa {

enum class Algo { SparseExp3Spa, SparseLogBarrierSpa, SparseBobw };
// Two published choices of c1 for the best-of-both-worlds agent:
// sqrt(2 log(1 + T / beta1)) and sqrt(2 log(1 + T^2 / beta1)).
enum class C1Preset { Statement, Proof };

const char* to_string(Algo a);
Algo algo_from_string(const std::string& s);
const char* to_string(C1Preset p);
C1Preset c1_preset_from_string(const std::string& s);

struct AgentConfig {
  Algo algo = Algo::SparseExp3Spa;
  std::size_t k = 2;
  long T = 1;
  std::optional<double> c1_override;
  C1Preset c1_preset = C1Preset::Statement;
  std::uint64_t seed = 0;
  // Per-round lemma checks; some need extra FTRL solves.
  bool runtime_checks = true;
  bool log_history = false;

  // Throws std::invalid_argument naming the violated requirement.
  void validate() const;
};

// Quantities fixed by the algorithm choice.
struct AgentParams {
  LossRange range = LossRange::UnitInterval;
  double gamma = 0.0;           // uniform exploration
  double barrier = 0.0;         // log-barrier weight
  double h1 = 0.0;
  double lemma_delta = 1.0;     // stability bound factor
  double s1_epsilon = 0.0;      // > 0 when the first-order condition is checked
  double s2_a = 0.0;            // > 0 when the square-root condition is checked
  SpaConfig spa;
};

AgentParams derive_params(const AgentConfig& cfg);

// l * 1{i = arm} / p_arm
EstimatedLoss iw_estimate(double loss_observed, std::size_t arm, const ProbVector& p);
// l^2 / p_arm
double omega(double loss_observed, double p_arm);
// omega * min(1, p_arm / (2 eta))
double nu(double omega_val, double p_arm, double eta);

struct RoundChecks {
  bool s1 = true;
  bool s2 = true;
  bool stability = true;
  bool nu_bound = true;
  bool ratio_band = true;
  bool entropy_growth = true;
  bool sandwich = true;
  bool monotone_power = true;
  bool shifted_power = true;
  bool shifted_power_evaluated = false;
  bool bisection = true;
  double stability_value = 0.0;
  double stability_bound = 0.0;
  double bisection_residual = 0.0;
  int bisection_iterations = 0;
};

struct StepResult {
  double omega = 0.0;
  double z = 0.0;
  double zbar = 0.0;
  double h_next = 0.0;
  double beta_before = 0.0;
  double beta_after = 0.0;
  RoundChecks checks;
};

class Agent {
 public:
  explicit Agent(const AgentConfig& cfg);

  const AgentConfig& config() const { return cfg_; }
  const AgentParams& params() const { return params_; }
  const ProbVector& p() const { return p_; }
  const ProbVector& q() const { return q_; }
  const SpaState& spa() const { return spa_; }
  const std::vector<double>& cumulative_estimate() const { return cum_loss_; }
  // h_t of the current round.
  double h() const { return h_; }
  long round() const { return spa_.t; }

  std::size_t sample(Rng& rng) const;
  // Consumes the round's feedback and moves to round t + 1.
  StepResult update(std::size_t arm, double loss_observed);

 private:
  FtrlSolution solve(const std::vector<double>& L, double beta) const;
  ProbVector transform(const ProbVector& q) const;
  double entropy_rate(const ProbVector& p) const;

  AgentConfig cfg_;
  AgentParams params_;
  std::vector<double> cum_loss_;
  ProbVector q_;
  ProbVector p_;
  SpaState spa_;
  double mu_ = 0.0;
  double h_ = 0.0;
};

// Bound family for an (algorithm, environment) pair.
std::string mab_bound_kind(Algo algo, const EnvSpec& env);

// Runs T rounds against a fresh environment. Agent and environment streams
// derive from (cfg.seed, episode).
RegretTrace run_episode(const AgentConfig& cfg, const EnvSpec& env, std::uint64_t episode);

}  // namespace spa
