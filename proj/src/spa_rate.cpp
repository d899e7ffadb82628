#include "spa/spa_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spa {
namespace {

constexpr double kRelSlack = 1e-12;
constexpr int kBisectionCap = 200;

bool leq_with_slack(double lhs, double rhs) {
  return lhs <= rhs + kRelSlack * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

void validate_step(const SpaState& state, double z, double zbar, double h_next, double h1,
                   const SpaConfig& cfg) {
  if (!(z >= 0.0) || !(zbar >= 0.0) || !(h_next >= 0.0) || !std::isfinite(z) ||
      !std::isfinite(zbar) || !std::isfinite(h_next)) {
    throw SequenceConditionViolation("z, zbar, h_next must be finite and nonnegative", z, zbar);
  }
  if (!(h1 > 0.0)) throw SequenceConditionViolation("h1 > 0", h1, 0.0);
  if (!leq_with_slack(h_next, h1)) throw SequenceConditionViolation("h1 >= h_next", h1, h_next);
  if (!leq_with_slack(z * h_next, zbar * h1)) {
    throw SequenceConditionViolation("zbar * h1 >= z * h_next", zbar * h1, z * h_next);
  }
  const double rad = spa_radicand(state, zbar, h1, cfg);
  if (state.t > 1 && !leq_with_slack(state.last_radicand, rad)) {
    throw SequenceConditionViolation("radicand non-decreasing", rad, state.last_radicand);
  }
  if (z > 0.0 && !(rad > 0.0)) throw SequenceConditionViolation("radicand > 0", rad, 0.0);
}

}  // namespace

SpaConfig::SpaConfig(double c1_, double c2_, double beta1_, double lambda_)
    : c1(c1_), c2(c2_), beta1(beta1_), lambda(lambda_) {
  if (!(c1 > 0.0) || !(c2 >= 0.0) || !(beta1 > 0.0) || !(lambda > 0.0) ||
      !std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(beta1) ||
      !std::isfinite(lambda)) {
    throw std::invalid_argument("SpaConfig: need c1 > 0, c2 >= 0, beta1 > 0, lambda > 0");
  }
}

SpaState SpaState::initial(const SpaConfig& cfg, bool log_history) {
  SpaState s;
  s.beta = cfg.beta1;
  s.log_history = log_history;
  return s;
}

static std::string describe(const std::string& condition, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << "SPA sequence condition violated: " << condition << " (lhs=" << lhs << ", rhs=" << rhs
     << ")";
  return os.str();
}

SequenceConditionViolation::SequenceConditionViolation(std::string condition, double lhs,
                                                       double rhs)
    : std::runtime_error(describe(condition, lhs, rhs)),
      condition_(std::move(condition)),
      lhs_(lhs),
      rhs_(rhs) {}

double spa_radicand(const SpaState& state, double zbar, double h1, const SpaConfig& cfg) {
  return cfg.c2 + zbar * h1 + state.sum_zh;
}

double spa_increment(const SpaState& state, double z, double zbar, double h1,
                     const SpaConfig& cfg) {
  if (z == 0.0) return 0.0;
  return cfg.c1 * z / std::sqrt(spa_radicand(state, zbar, h1, cfg));
}

SpaState spa_commit(const SpaState& state, double z, double zbar, double h_next, double h1,
                    double beta_next, const SpaConfig& cfg) {
  validate_step(state, z, zbar, h_next, h1, cfg);
  if (!(beta_next >= state.beta)) {
    throw SequenceConditionViolation("beta non-decreasing", beta_next, state.beta);
  }
  SpaState next = state;
  if (state.log_history) {
    next.history.push_back(SpaRecord{z, zbar, h_next, state.beta, z / state.beta,
                                     (beta_next - state.beta) * h_next});
  }
  next.last_radicand = spa_radicand(state, zbar, h1, cfg);
  next.last_zbar = zbar;
  next.beta = beta_next;
  next.sum_zh += z * h_next;
  next.sum_z += z;
  next.t += 1;
  return next;
}

SpaState spa_update(const SpaState& state, double z, double zbar, double h_next, double h1,
                    const SpaConfig& cfg) {
  validate_step(state, z, zbar, h_next, h1, cfg);
  return spa_commit(state, z, zbar, h_next, h1,
                    state.beta + spa_increment(state, z, zbar, h1, cfg), cfg);
}

bool check_s1(const SpaState& state, double z, double zbar, double h1, double epsilon,
              const SpaConfig& cfg) {
  return std::sqrt(cfg.c2 + zbar * h1) / cfg.c1 * (cfg.beta1 + state.beta) >= epsilon + z;
}

bool check_s2(const SpaState& state, double z, double h1, double a, const SpaConfig& cfg) {
  return state.beta >= a * cfg.c1 / std::sqrt(h1) * std::sqrt(state.sum_z + z);
}

double reghat_sp(const SpaState& state, const SpaConfig& cfg) {
  if (!state.log_history) throw std::logic_error("reghat_sp: history logging is disabled");
  double penalty = 0.0;
  double stability = 0.0;
  for (const SpaRecord& r : state.history) {
    penalty += r.penalty_inc;
    stability += r.eta_z;
  }
  return penalty + cfg.lambda * stability;
}

double bound_certificate_I(const SpaState& state, double epsilon, double h1,
                           const SpaConfig& cfg) {
  const double rad = cfg.c2 + state.last_zbar * h1 + state.sum_zh;
  return 2.0 * (cfg.c1 + cfg.lambda / cfg.c1 * std::log1p(state.sum_z / epsilon)) *
         std::sqrt(rad);
}

double bound_certificate_II(const SpaState& state, double a, double h1, const SpaConfig& cfg) {
  return 2.0 * (cfg.c1 + cfg.lambda / (a * cfg.c1)) * std::sqrt(h1 * state.sum_z);
}

double implicit_residual(const SpaState& state, double alpha, double nu, double h_alpha,
                         const SpaConfig& cfg) {
  const double rad = cfg.c2 + nu * h_alpha + state.sum_zh;
  return alpha - (state.beta + cfg.c1 * nu / std::sqrt(rad));
}

BisectionResult implicit_update_bisection(const SpaState& state, double nu,
                                          const std::function<double(double)>& h_next,
                                          double horizon, const SpaConfig& cfg) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("bisection: nu must be >= 0");
  const double beta = state.beta;
  if (nu == 0.0) return BisectionResult{beta, 0.0, 0};

  auto F = [&](double alpha) { return implicit_residual(state, alpha, nu, h_next(alpha), cfg); };
  // The increment never exceeds c1 nu / sqrt(c2); with c2 = 81 c1^2 that is
  // nu / 9. Narrowing the bracket to it saves iterations.
  double hi = beta + horizon;
  if (cfg.c2 > 0.0) hi = std::min(hi, beta + cfg.c1 * nu / std::sqrt(cfg.c2));
  double lo = beta;
  double f_lo = F(lo);
  double f_hi = F(hi);
  const double tol = 1e-9 * std::max(1.0, beta);
  if (std::abs(f_lo) <= tol) return BisectionResult{lo, f_lo, 0};
  if (std::abs(f_hi) <= tol) return BisectionResult{hi, f_hi, 0};
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    throw BisectionError("bisection: no sign change on the bracket", f_lo, f_hi);
  }
  double mid = lo;
  double f_mid = f_lo;
  int it = 0;
  while (it < kBisectionCap) {
    ++it;
    mid = 0.5 * (lo + hi);
    f_mid = F(mid);
    if (std::abs(f_mid) <= tol) break;
    if (f_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  if (!(std::abs(f_mid) <= tol)) {
    throw BisectionError("bisection: iteration cap reached", f_lo, f_hi);
  }
  return BisectionResult{mid, f_mid, it};
}

}  // namespace spa
