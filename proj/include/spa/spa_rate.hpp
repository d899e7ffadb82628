#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spa {

struct SpaConfig {
  double c1 = 1.0;
  double c2 = 0.0;
  double beta1 = 1.0;
  // Coefficient on sum eta_t z_t in the regret proxy.
  double lambda = 1.0;

  SpaConfig() = default;
  SpaConfig(double c1_, double c2_, double beta1_, double lambda_);
};

struct SpaRecord {
  double z = 0.0;
  double zbar = 0.0;
  double h_next = 0.0;
  double beta = 0.0;         // beta_t before the update
  double eta_z = 0.0;        // z_t / beta_t
  double penalty_inc = 0.0;  // (beta_{t+1} - beta_t) * h_{t+1}
};

struct SpaState {
  long t = 1;
  double beta = 1.0;
  double sum_zh = 0.0;  // sum_{s<t} z_s h_{s+1}
  double sum_z = 0.0;   // sum_{s<t} z_s
  // Radicand of the previous update; the sequence of radicands must not
  // decrease.
  double last_radicand = 0.0;
  double last_zbar = 0.0;
  bool log_history = false;
  std::vector<SpaRecord> history;

  static SpaState initial(const SpaConfig& cfg, bool log_history = false);
  double eta() const { return 1.0 / beta; }
};

class SequenceConditionViolation : public std::runtime_error {
 public:
  SequenceConditionViolation(std::string condition, double lhs, double rhs);
  const std::string& condition() const { return condition_; }
  double lhs() const { return lhs_; }
  double rhs() const { return rhs_; }

 private:
  std::string condition_;
  double lhs_;
  double rhs_;
};

// c2 + zbar * h1 + sum_{s<t} z_s h_{s+1}
double spa_radicand(const SpaState& state, double zbar, double h1, const SpaConfig& cfg);

// c1 z / sqrt(radicand); zero when z = 0.
double spa_increment(const SpaState& state, double z, double zbar, double h1,
                     const SpaConfig& cfg);

// One step of the recursion. Validates h1 >= h_next, zbar h1 >= z h_next,
// monotone radicand and a positive radicand before touching the state.
SpaState spa_update(const SpaState& state, double z, double zbar, double h_next, double h1,
                    const SpaConfig& cfg);

// Same checks and bookkeeping as spa_update, with beta_{t+1} supplied by the
// caller (implicit updates).
SpaState spa_commit(const SpaState& state, double z, double zbar, double h_next, double h1,
                    double beta_next, const SpaConfig& cfg);

// (sqrt(c2 + zbar h1) / c1) (beta_1 + beta_t) >= epsilon + z
bool check_s1(const SpaState& state, double z, double zbar, double h1, double epsilon,
              const SpaConfig& cfg);

// beta_t >= (a c1 / sqrt(h1)) sqrt(sum_{s<=t} z_s); `z` is the current round's z_t.
bool check_s2(const SpaState& state, double z, double h1, double a, const SpaConfig& cfg);

// sum (beta_{t+1} - beta_t) h_{t+1} + lambda sum z_t / beta_t, from the history.
double reghat_sp(const SpaState& state, const SpaConfig& cfg);

double bound_certificate_I(const SpaState& state, double epsilon, double h1,
                           const SpaConfig& cfg);
double bound_certificate_II(const SpaState& state, double a, double h1, const SpaConfig& cfg);

struct BisectionResult {
  double beta_next = 0.0;
  double f_residual = 0.0;
  int iterations = 0;
};

class BisectionError : public std::runtime_error {
 public:
  BisectionError(const std::string& what, double f_lo, double f_hi)
      : std::runtime_error(what), f_lo_(f_lo), f_hi_(f_hi) {}
  double f_lo() const { return f_lo_; }
  double f_hi() const { return f_hi_; }

 private:
  double f_lo_;
  double f_hi_;
};

// F(alpha) = alpha - (beta_t + c1 nu / sqrt(c2 + nu h(alpha) + sum_{s<t} z_s h_{s+1}))
double implicit_residual(const SpaState& state, double alpha, double nu, double h_alpha,
                         const SpaConfig& cfg);

// Root of F on [beta_t, beta_t + horizon] by bisection. h_next maps a
// candidate beta to the resulting h_{t+1} and must be a pure function.
BisectionResult implicit_update_bisection(const SpaState& state, double nu,
                                          const std::function<double(double)>& h_next,
                                          double horizon, const SpaConfig& cfg);

}  // namespace spa
