#include "spa/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spa {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t argmin_unique(const std::vector<double>& v, double* gap) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != best) g = std::min(g, v[i] - v[best]);
  }
  if (gap) *gap = g;
  return best;
}

void validate_stochastic(const StochasticSparseSpec& s, std::size_t k) {
  if (s.means.size() != k) throw std::invalid_argument("env.means: expected k entries");
  const double lo = range_lower(s.range);
  for (double m : s.means) {
    if (!(m >= lo && m <= 1.0)) throw std::invalid_argument("env.means: entry outside the loss range");
  }
  double gap = 0.0;
  argmin_unique(s.means, &gap);
  if (!(gap > 0.0)) throw std::invalid_argument("env.means: optimal arm must be unique");
}

double uniform_halfwidth(double mu) { return std::min(std::abs(mu), 1.0 - std::abs(mu)); }

double expected_sq(const StochasticSparseSpec& s, std::size_t i) {
  const double mu = s.means[i];
  if (s.noise == Noise::Bernoulli) return std::abs(mu);
  const double w = uniform_halfwidth(mu);
  return mu * mu + w * w / 3.0;
}

}  // namespace

const char* to_string(SupportPattern p) {
  switch (p) {
    case SupportPattern::Fixed: return "fixed";
    case SupportPattern::Rotating: return "rotating";
    case SupportPattern::Random: return "random";
    case SupportPattern::FollowLeader: return "follow-leader";
  }
  return "?";
}

const char* to_string(Noise n) { return n == Noise::Bernoulli ? "bernoulli" : "uniform-around"; }

const char* to_string(CorruptionSchedule c) {
  return c == CorruptionSchedule::FrontLoaded ? "front-loaded" : "spread";
}

SupportPattern support_pattern_from_string(const std::string& s) {
  if (s == "fixed") return SupportPattern::Fixed;
  if (s == "rotating") return SupportPattern::Rotating;
  if (s == "random") return SupportPattern::Random;
  if (s == "follow-leader") return SupportPattern::FollowLeader;
  throw std::invalid_argument("unknown support pattern '" + s + "'");
}

Noise noise_from_string(const std::string& s) {
  if (s == "bernoulli") return Noise::Bernoulli;
  if (s == "uniform-around") return Noise::UniformAround;
  throw std::invalid_argument("unknown noise '" + s + "'");
}

CorruptionSchedule corruption_schedule_from_string(const std::string& s) {
  if (s == "front-loaded") return CorruptionSchedule::FrontLoaded;
  if (s == "spread") return CorruptionSchedule::Spread;
  throw std::invalid_argument("unknown corruption schedule '" + s + "'");
}

void EnvSpec::validate() const {
  if (k < 2) throw std::invalid_argument("env.k: need at least two arms");
  if (T < 1) throw std::invalid_argument("env.T: must be positive");
  std::visit(Overloaded{
                 [&](const AdversarialSparseSpec& a) {
                   if (a.s > k) throw std::invalid_argument("env.s: exceeds k");
                   if (!(a.favored_weight > 0.0 && a.favored_weight <= 1.0)) {
                     throw std::invalid_argument("env.favored_weight: must lie in (0, 1]");
                   }
                   if (a.pattern == SupportPattern::FollowLeader && a.s == 0) {
                     throw std::invalid_argument("env.s: follow-leader needs s >= 1");
                   }
                 },
                 [&](const StochasticSparseSpec& s) { validate_stochastic(s, k); },
                 [&](const CorruptedStochasticSpec& c) {
                   validate_stochastic(c.base, k);
                   if (!(c.budget >= 0.0) || !std::isfinite(c.budget)) {
                     throw std::invalid_argument("env.budget: must be finite and nonnegative");
                   }
                 }},
             variant);
}

LossRange EnvSpec::range() const {
  return std::visit(Overloaded{[](const AdversarialSparseSpec& a) { return a.range; },
                               [](const StochasticSparseSpec& s) { return s.range; },
                               [](const CorruptedStochasticSpec& c) { return c.base.range; }},
                    variant);
}

bool EnvSpec::stochastic() const { return !std::holds_alternative<AdversarialSparseSpec>(variant); }

std::size_t EnvSpec::sparsity() const {
  auto nonzero_means = [](const StochasticSparseSpec& s) {
    return static_cast<std::size_t>(
        std::count_if(s.means.begin(), s.means.end(), [](double m) { return m != 0.0; }));
  };
  return std::visit(Overloaded{[](const AdversarialSparseSpec& a) { return a.s; },
                               [&](const StochasticSparseSpec& s) { return nonzero_means(s); },
                               [&](const CorruptedStochasticSpec& c) {
                                 std::size_t n = nonzero_means(c.base);
                                 const std::size_t best = argmin_unique(c.base.means, nullptr);
                                 if (c.budget > 0.0 && c.base.means[best] == 0.0) ++n;
                                 return n;
                               }},
                    variant);
}

std::string EnvSpec::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{[&](const AdversarialSparseSpec& a) {
                          os << "adversarial-sparse(s=" << a.s << ", " << to_string(a.range)
                             << ", " << to_string(a.pattern) << ")";
                        },
                        [&](const StochasticSparseSpec& s) {
                          os << "stochastic-sparse(" << to_string(s.noise) << ", "
                             << to_string(s.range) << ")";
                        },
                        [&](const CorruptedStochasticSpec& c) {
                          os << "corrupted-stochastic(C=" << c.budget << ", "
                             << to_string(c.schedule) << ")";
                        }},
             variant);
  return os.str();
}

Environment::Environment(EnvSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed), pulls_(spec_.k, 0) {
  spec_.validate();
  if (const auto* a = std::get_if<AdversarialSparseSpec>(&spec_.variant);
      a && a->pattern == SupportPattern::Fixed) {
    std::vector<std::size_t> idx(spec_.k);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t j = 0; j < a->s; ++j) {
      const std::size_t r = j + static_cast<std::size_t>(uniform01(rng_) * (spec_.k - j));
      std::swap(idx[j], idx[std::min(r, spec_.k - 1)]);
    }
    fixed_support_.assign(idx.begin(), idx.begin() + a->s);
  }
}

std::optional<std::size_t> Environment::optimal_arm() const {
  if (const auto* s = std::get_if<StochasticSparseSpec>(&spec_.variant)) {
    return argmin_unique(s->means, nullptr);
  }
  if (const auto* c = std::get_if<CorruptedStochasticSpec>(&spec_.variant)) {
    return argmin_unique(c->base.means, nullptr);
  }
  return std::nullopt;
}

double Environment::delta_min() const {
  double gap = 0.0;
  if (const auto* s = std::get_if<StochasticSparseSpec>(&spec_.variant)) {
    argmin_unique(s->means, &gap);
  } else if (const auto* c = std::get_if<CorruptedStochasticSpec>(&spec_.variant)) {
    argmin_unique(c->base.means, &gap);
  }
  return gap;
}

double Environment::max_expected_sq_norm() const {
  return std::visit(Overloaded{[](const AdversarialSparseSpec& a) { return static_cast<double>(a.s); },
                               [](const StochasticSparseSpec& s) {
                                 double e = 0.0;
                                 for (std::size_t i = 0; i < s.means.size(); ++i) e += expected_sq(s, i);
                                 return e;
                               },
                               [](const CorruptedStochasticSpec& c) {
                                 double e = 0.0;
                                 for (std::size_t i = 0; i < c.base.means.size(); ++i) {
                                   e += expected_sq(c.base, i);
                                 }
                                 if (c.budget == 0.0) return e;
                                 const std::size_t best = argmin_unique(c.base.means, nullptr);
                                 return std::max(e, e - expected_sq(c.base, best) + 1.0);
                               }},
                    spec_.variant);
}

void Environment::observe_action(std::size_t arm) {
  if (arm >= spec_.k) throw std::out_of_range("observe_action: arm index");
  ++pulls_[arm];
}

RoundLosses Environment::adversarial(const AdversarialSparseSpec& a, long t) {
  const std::size_t k = spec_.k;
  std::vector<std::size_t> support;
  support.reserve(a.s);
  auto random_fill = [&](std::vector<std::size_t> pool, std::size_t need) {
    for (std::size_t j = 0; j < need; ++j) {
      const std::size_t r =
          j + std::min(static_cast<std::size_t>(uniform01(rng_) * (pool.size() - j)), pool.size() - j - 1);
      std::swap(pool[j], pool[r]);
      support.push_back(pool[j]);
    }
  };
  switch (a.pattern) {
    case SupportPattern::Fixed:
      support = fixed_support_;
      break;
    case SupportPattern::Rotating:
      for (std::size_t j = 0; j < a.s; ++j) {
        support.push_back((static_cast<std::size_t>(t - 1) * a.s + j) % k);
      }
      break;
    case SupportPattern::Random: {
      std::vector<std::size_t> pool(k);
      std::iota(pool.begin(), pool.end(), 0);
      random_fill(std::move(pool), a.s);
      break;
    }
    case SupportPattern::FollowLeader: {
      const std::size_t leader = static_cast<std::size_t>(
          std::max_element(pulls_.begin(), pulls_.end()) - pulls_.begin());
      support.push_back(leader);
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < k; ++i) {
        if (i != leader) pool.push_back(i);
      }
      random_fill(std::move(pool), a.s - 1);
      break;
    }
  }
  std::vector<double> l(k, 0.0);
  for (std::size_t i : support) {
    const double u = uniform01(rng_);
    if (a.range == LossRange::UnitInterval) {
      const double mag = 0.5 + 0.5 * u;
      l[i] = (i == 0) ? a.favored_weight * mag : mag;
    } else {
      l[i] = (i == 0) ? -u : 2.0 * u - 1.0;
    }
  }
  return RoundLosses{LossVector(std::move(l), a.range), std::nullopt, 0.0};
}

std::vector<double> Environment::stochastic_draw(const StochasticSparseSpec& s) {
  std::vector<double> l(spec_.k, 0.0);
  for (std::size_t i = 0; i < spec_.k; ++i) {
    const double mu = s.means[i];
    const double u = uniform01(rng_);
    if (mu == 0.0) continue;
    if (s.noise == Noise::Bernoulli) {
      if (u < std::abs(mu)) l[i] = mu > 0.0 ? 1.0 : -1.0;
    } else {
      const double w = uniform_halfwidth(mu);
      l[i] = mu + w * (2.0 * u - 1.0);
    }
  }
  return l;
}

RoundLosses Environment::generate_round(long t) {
  if (t != next_t_) throw std::logic_error("generate_round: rounds must be generated in order");
  if (t > spec_.T) throw std::out_of_range("generate_round: t exceeds T");
  ++next_t_;
  if (const auto* a = std::get_if<AdversarialSparseSpec>(&spec_.variant)) return adversarial(*a, t);
  if (const auto* s = std::get_if<StochasticSparseSpec>(&spec_.variant)) {
    return RoundLosses{LossVector(stochastic_draw(*s), s->range), s->means, 0.0};
  }
  const auto& c = std::get<CorruptedStochasticSpec>(spec_.variant);
  std::vector<double> l = stochastic_draw(c.base);
  std::vector<double> means = c.base.means;
  const double remaining = c.budget - corruption_spent_;
  bool corrupt = remaining > 0.0;
  if (corrupt && c.schedule == CorruptionSchedule::Spread) {
    const long rounds = std::max<long>(1, static_cast<long>(std::ceil(c.budget)));
    const long stride = std::max<long>(1, spec_.T / rounds);
    corrupt = ((t - 1) % stride == 0);
  }
  double dev = 0.0;
  if (corrupt) {
    const std::size_t best = argmin_unique(c.base.means, nullptr);
    const double top = range_upper(c.base.range);
    // Raise the optimal arm's loss; the charge covers both the realized and
    // the mean deviation, so both must fit in what is left.
    const double v = std::min(top, std::min(l[best], means[best]) + remaining);
    if (v >= std::max(l[best], means[best])) dev = std::max(v - l[best], v - means[best]);
    if (dev > 0.0) {
      l[best] = v;
      means[best] = v;
      corruption_spent_ += dev;
    }
  }
  return RoundLosses{LossVector(std::move(l), c.base.range), std::move(means), dev};
}

double l2_of(const std::vector<LossVector>& seq) {
  double s = 0.0;
  for (const auto& l : seq) s += l.squared_norm();
  return s;
}

double pseudo_regret_adversarial(const std::vector<LossVector>& seq,
                                 const std::vector<std::size_t>& actions) {
  if (seq.size() != actions.size()) throw std::invalid_argument("pseudo_regret: length mismatch");
  if (seq.empty()) return 0.0;
  std::vector<double> cum(seq.front().size(), 0.0);
  double learner = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (std::size_t i = 0; i < cum.size(); ++i) cum[i] += seq[t][i];
    learner += seq[t][actions[t]];
  }
  return learner - *std::min_element(cum.begin(), cum.end());
}

double pseudo_regret_stochastic(const std::vector<std::vector<double>>& means,
                                const std::vector<std::size_t>& actions, std::size_t best) {
  if (means.size() != actions.size()) throw std::invalid_argument("pseudo_regret: length mismatch");
  double r = 0.0;
  for (std::size_t t = 0; t < means.size(); ++t) r += means[t][actions[t]] - means[t][best];
  return r;
}

RegretAccumulator::RegretAccumulator(std::size_t k, std::optional<std::size_t> best_arm)
    : cum_(k, 0.0), best_(best_arm) {}

void RegretAccumulator::add(const RoundLosses& r, std::size_t action) {
  for (std::size_t i = 0; i < cum_.size(); ++i) cum_[i] += r.loss[i];
  learner_ += r.loss[action];
  l2_ += r.loss.squared_norm();
  if (best_ && r.means) mean_regret_ += (*r.means)[action] - (*r.means)[*best_];
}

double RegretAccumulator::regret() const {
  if (best_) return mean_regret_;
  return learner_ - *std::min_element(cum_.begin(), cum_.end());
}

}  // namespace spa
