#include "spa/ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spa {
namespace {

constexpr double kQFloor = 1e-300;

// Solves beta * y - c * exp(-y) = r for y = log q <= 0. Returns 0 when the
// root lies above 0, i.e. the coordinate would exceed one.
double invert_coordinate(double r, double beta, double c, double y_floor,
                         int max_inner) {
  if (-c - r <= 0.0) return 0.0;
  // Both beta*y and -c*exp(-y) dominate the map, so each one's inverse is a
  // lower bound for the root. Newton on the concave increasing map started
  // left of the root climbs to it monotonically.
  double y = std::max({r / beta, std::log(c / -r), y_floor});
  for (int it = 0; it < max_inner; ++it) {
    const double u = std::exp(-y);
    const double f = beta * y - c * u - r;
    if (f >= 0.0) break;
    const double step = -f / (beta + c * u);
    y += step;
    if (y >= 0.0) return 0.0;
    if (step <= 1e-16 * std::max(1.0, std::abs(y))) break;
  }
  return y;
}

FtrlSolution solve_entropy_only(std::span<const double> shifted, double shift,
                                double beta, const FtrlOptions& options) {
  const std::size_t k = shifted.size();
  std::vector<double> q(k);
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    q[i] = std::exp(-shifted[i] / beta);
    z += q[i];
  }
  const double log_z = std::log(z);
  double residual = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    q[i] /= z;
    const double log_q = -shifted[i] / beta - log_z;
    residual = std::max(residual, std::abs(shifted[i] + beta * log_q + beta * log_z) / std::max(1.0, shifted[i]));
  }
  const double mu = beta * log_z - shift;
  if (!(residual <= options.tol)) {
    throw FtrlConvergenceError("softmax residual above tolerance", q, mu, residual);
  }
  return FtrlSolution{ProbVector(std::move(q)), mu, residual, 0};
}

}  // namespace

RegularizerSpec::RegularizerSpec(double beta_, double barrier_weight_)
    : beta(beta_), barrier_weight(barrier_weight_) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("RegularizerSpec: beta must be positive");
  }
  if (!(barrier_weight >= 0.0) || !std::isfinite(barrier_weight)) {
    throw std::invalid_argument("RegularizerSpec: barrier weight must be nonnegative");
  }
}

FtrlSolution solve_ftrl(std::span<const double> cum_loss, const RegularizerSpec& reg,
                        const FtrlOptions& options) {
  const std::size_t k = cum_loss.size();
  if (k < 2) throw std::invalid_argument("solve_ftrl: need at least two coordinates");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_ftrl: tol must be positive");
  double shift = std::numeric_limits<double>::infinity();
  for (double v : cum_loss) {
    if (!std::isfinite(v)) throw std::invalid_argument("solve_ftrl: non-finite loss");
    shift = std::min(shift, v);
  }
  // The problem is invariant to adding a constant to L; work with L - min L.
  std::vector<double> d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = cum_loss[i] - shift;

  const double beta = reg.beta;
  const double c = reg.barrier_weight;
  if (c == 0.0) return solve_entropy_only(d, shift, beta, options);

  const double kd = static_cast<double>(k);
  // At mu = 0 the leading coordinate sits at q = 1, so the sum exceeds one.
  // At mu_hi every coordinate is at most 1/k.
  double lo = 0.0;
  double hi = beta * std::log(kd) + c * kd;

  double mu;
  if (options.warm_mu) {
    mu = *options.warm_mu + shift;
  } else {
    double z = 0.0;
    for (double v : d) z += std::exp(-v / beta);
    mu = beta * std::log(z);
  }
  if (!(mu > lo && mu < hi)) mu = 0.5 * (lo + hi);

  std::vector<double> y(k);
  std::vector<double> q(k);
  auto evaluate = [&](double m, double& sum, double& slope) {
    sum = -1.0;
    slope = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double floor_q =
          std::max(c / (d[i] + std::abs(m) + beta + c), kQFloor);
      y[i] = invert_coordinate(-(d[i] + m), beta, c, std::log(floor_q),
                               options.max_inner);
      q[i] = std::exp(y[i]);
      sum += q[i];
      slope -= q[i] * q[i] / (beta * q[i] + c);
    }
  };

  double sum = 0.0;
  double slope = 0.0;
  int it = 0;
  for (; it < options.max_outer; ++it) {
    evaluate(mu, sum, slope);
    if (std::abs(sum) <= 2e-16 * kd) break;
    if (sum > 0.0) {
      lo = mu;
    } else {
      hi = mu;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
    double next = mu - sum / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }

  double residual = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    residual = std::max(residual,
                        std::abs(d[i] + beta * y[i] - c / q[i] + mu));
  }
  const double mu_out = mu - shift;
  if (!(residual <= options.tol) || std::abs(sum) > ProbVector::kRenormalizeTolerance) {
    throw FtrlConvergenceError("hybrid FTRL solve did not converge", q, mu_out, residual);
  }
  return FtrlSolution{ProbVector(std::move(q)), mu_out, residual, it + 1};
}

double regularizer_value(std::span<const double> q, const RegularizerSpec& reg) {
  double neg_entropy = 0.0;
  double barrier = 0.0;
  for (double v : q) {
    if (v > 0.0) neg_entropy += v * std::log(v);
    if (reg.barrier_weight > 0.0) {
      if (!(v > 0.0)) throw DomainError("log-barrier evaluated at a zero coordinate");
      barrier -= std::log(v);
    }
  }
  return reg.beta * neg_entropy + reg.barrier_weight * barrier;
}

double ftrl_objective(std::span<const double> q, std::span<const double> cum_loss,
                      const RegularizerSpec& reg) {
  if (q.size() != cum_loss.size()) throw std::invalid_argument("ftrl_objective: size mismatch");
  double linear = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) linear += cum_loss[i] * q[i];
  return linear + regularizer_value(q, reg);
}

PenaltyStability penalty_stability_split(std::span<const double> q_t,
                                         std::span<const double> q_next,
                                         const RegularizerSpec& reg_t,
                                         const RegularizerSpec& reg_next,
                                         std::span<const double> y_hat) {
  if (q_t.size() != q_next.size() || q_t.size() != y_hat.size()) {
    throw std::invalid_argument("penalty_stability_split: size mismatch");
  }
  PenaltyStability out;
  out.penalty = regularizer_value(q_next, reg_t) - regularizer_value(q_next, reg_next);
  double inner = 0.0;
  for (std::size_t i = 0; i < q_t.size(); ++i) inner += (q_t[i] - q_next[i]) * y_hat[i];
  out.stability = inner - bregman(reg_t.divergence(), q_next, q_t);
  return out;
}

}  // namespace spa
