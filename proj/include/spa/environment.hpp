#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spa/rng.hpp"
#include "spa/simplex.hpp"

namespace spa {

enum class SupportPattern { Fixed, Rotating, Random, FollowLeader };
enum class Noise { Bernoulli, UniformAround };
enum class CorruptionSchedule { FrontLoaded, Spread };

const char* to_string(SupportPattern p);
const char* to_string(Noise n);
const char* to_string(CorruptionSchedule c);
SupportPattern support_pattern_from_string(const std::string& s);
Noise noise_from_string(const std::string& s);
CorruptionSchedule corruption_schedule_from_string(const std::string& s);

// Losses with at most s nonzero entries per round. Arm 0 is favored: its
// unit-range magnitudes are scaled by favored_weight and its symmetric-range
// values are drawn from (-1, 0).
struct AdversarialSparseSpec {
  std::size_t s = 1;
  LossRange range = LossRange::UnitInterval;
  SupportPattern pattern = SupportPattern::Random;
  double favored_weight = 0.5;
};

// Independent per-arm losses with the given means. Bernoulli noise draws
// sign(mu) * Bernoulli(|mu|); UniformAround draws uniformly on an interval
// centred at mu that stays inside the range.
struct StochasticSparseSpec {
  std::vector<double> means;
  Noise noise = Noise::Bernoulli;
  LossRange range = LossRange::Symmetric;
};

// Stochastic losses where an adversary raises the optimal arm's loss to the
// range maximum until the budget is spent.
struct CorruptedStochasticSpec {
  StochasticSparseSpec base;
  double budget = 0.0;
  CorruptionSchedule schedule = CorruptionSchedule::FrontLoaded;
};

using EnvVariant = std::variant<AdversarialSparseSpec, StochasticSparseSpec, CorruptedStochasticSpec>;

struct EnvSpec {
  EnvVariant variant;
  std::size_t k = 2;
  long T = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  LossRange range() const;
  bool stochastic() const;
  // Number of arms that can ever receive a nonzero loss.
  std::size_t sparsity() const;
  std::string describe() const;
};

// Per-round output. `means` is set for stochastic variants and holds the
// expected loss vector of the round, corruption included.
struct RoundLosses {
  LossVector loss;
  std::optional<std::vector<double>> means;
  double corruption = 0.0;
};

class Environment {
 public:
  Environment(EnvSpec spec, std::uint64_t seed);

  // Rounds are generated in order, t = 1, 2, ..., T.
  RoundLosses generate_round(long t);
  // History hook: the learner's action of the round just played. Oblivious
  // variants ignore it.
  void observe_action(std::size_t arm);

  const EnvSpec& spec() const { return spec_; }
  // Optimal arm of the stochastic variants.
  std::optional<std::size_t> optimal_arm() const;
  // Smallest nonzero gap of the stochastic variants.
  double delta_min() const;
  // Upper bound on E sum_i l_{ti}^2 over all rounds.
  double max_expected_sq_norm() const;
  double corruption_spent() const { return corruption_spent_; }

 private:
  RoundLosses adversarial(const AdversarialSparseSpec& a, long t);
  std::vector<double> stochastic_draw(const StochasticSparseSpec& s);

  EnvSpec spec_;
  Rng rng_;
  long next_t_ = 1;
  std::vector<long> pulls_;
  std::vector<std::size_t> fixed_support_;
  double corruption_spent_ = 0.0;
};

// sum_t ||l_t||^2
double l2_of(const std::vector<LossVector>& seq);

// sum_t l_{t,A_t} - min_a sum_t l_{t,a}
double pseudo_regret_adversarial(const std::vector<LossVector>& seq,
                                 const std::vector<std::size_t>& actions);
// sum_t (mu_{t,A_t} - mu_{t,a*})
double pseudo_regret_stochastic(const std::vector<std::vector<double>>& means,
                                const std::vector<std::size_t>& actions, std::size_t best);

// Running regret accounting in O(k) memory.
class RegretAccumulator {
 public:
  RegretAccumulator(std::size_t k, std::optional<std::size_t> best_arm);
  void add(const RoundLosses& r, std::size_t action);
  double regret() const;
  double l2() const { return l2_; }
  double learner_loss() const { return learner_; }

 private:
  std::vector<double> cum_;
  std::optional<std::size_t> best_;
  double learner_ = 0.0;
  double mean_regret_ = 0.0;
  double l2_ = 0.0;
};

}  // namespace spa
