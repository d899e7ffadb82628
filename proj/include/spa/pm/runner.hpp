#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spa/pm/ebo.hpp"
#include "spa/pm/game.hpp"
#include "spa/pm/geometry.hpp"
#include "spa/trace.hpp"

namespace spa::pm {

enum class OutcomeKind { Stochastic, Constant, Adversarial };

const char* to_string(OutcomeKind k);
OutcomeKind outcome_kind_from_string(const std::string& s);

// Stochastic: i.i.d. outcomes from `probs`. Constant: always `constant`.
// Adversarial: oblivious schedule cycling through `phases`, `period` rounds
// per phase.
struct OutcomeSpec {
  OutcomeKind kind = OutcomeKind::Stochastic;
  std::vector<double> probs;
  std::size_t constant = 0;
  std::vector<std::size_t> phases;
  long period = 100;

  void validate(std::size_t d) const;
  std::string describe() const;
};

struct PmRunConfig {
  Model model = Model::FI;
  long T = 1000;
  std::uint64_t seed = 0;
  // Lower bound on beta_1; 2 m k^2 keeps eta_t <= 1 / (2 m k^2) throughout.
  double beta1_floor = 0.0;
  EboOptions ebo{1e-6};
};

// Everything computed once per game and shared across episodes.
struct PreparedGame {
  PmGame game;
  GameGeometry geom;
  EstimatorG g0;
};

PreparedGame prepare_game(PmGame game);

// One episode: Shannon FTRL for q_t, exploration by optimization for
// (p_t, G_t, V'_t), sampled action and feedback, estimated loss
// G_t(A_t, sigma_t) / p_{t, A_t}, then the rate update
//   beta_{t+1} = beta_t + c1 V'_t / sqrt(zbar h1 + sum_{s<t} V'_s h_{s+1}).
RegretTrace pm_run(const PreparedGame& pg, const OutcomeSpec& outcomes, const PmRunConfig& cfg,
                   std::uint64_t episode);

}  // namespace spa::pm
