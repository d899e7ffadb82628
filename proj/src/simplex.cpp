#include "spa/simplex.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace spa {

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("ProbVector needs at least two entries");
  }
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("ProbVector entries must be finite and nonnegative");
    }
    sum += v;
  }
  const double drift = std::abs(sum - 1.0);
  if (drift > kRenormalizeTolerance) {
    throw std::invalid_argument("ProbVector entries sum to " + std::to_string(sum));
  }
  if (drift > kSumTolerance) {
    for (double& v : values_) v /= sum;
  }
}

ProbVector ProbVector::uniform(std::size_t k) {
  return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ProbVector ProbVector::basis(std::size_t k, std::size_t i) {
  std::vector<double> v(k, 0.0);
  v.at(i) = 1.0;
  return ProbVector(std::move(v));
}

bool ProbVector::strictly_positive() const {
  for (double v : values_) {
    if (!(v > 0.0)) return false;
  }
  return true;
}

double range_lower(LossRange r) {
  return r == LossRange::UnitInterval ? 0.0 : -1.0;
}

const char* to_string(LossRange r) {
  return r == LossRange::UnitInterval ? "unit" : "symmetric";
}

LossRange loss_range_from_string(const std::string& s) {
  if (s == "unit") return LossRange::UnitInterval;
  if (s == "symmetric") return LossRange::Symmetric;
  throw std::invalid_argument("unknown loss range '" + s + "'");
}

LossVector::LossVector(std::vector<double> values, LossRange range)
    : values_(std::move(values)), range_(range) {
  const double lo = range_lower(range_);
  for (double v : values_) {
    if (!(v >= lo && v <= 1.0)) {
      throw std::invalid_argument("loss entry " + std::to_string(v) +
                                  " outside declared range");
    }
  }
}

std::size_t LossVector::nonzeros() const {
  std::size_t n = 0;
  for (double v : values_) n += (v != 0.0);
  return n;
}

double LossVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double xi(double x) { return std::expm1(-x) + x; }

double zeta(double x) {
  if (!(x > -1.0)) throw DomainError("zeta requires x > -1");
  return x - std::log1p(x);
}

double stability_sup(ComponentKind kind, double a, double x) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("stability_sup requires x in (0, 1]");
  switch (kind) {
    case ComponentKind::ShannonComponent:
      return x * xi(a);
    case ComponentKind::LogBarrierComponent:
      if (a < -1.0 / x) throw DomainError("log-barrier stability requires a >= -1/x");
      if (a * x <= -1.0) return std::numeric_limits<double>::infinity();
      return zeta(a * x);
  }
  return 0.0;
}

double bregman(const DivergenceKind& kind, std::span<const double> p,
               std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("bregman: size mismatch");
  double shannon = 0.0;
  double barrier = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0.0)) throw DomainError("bregman: q must be strictly positive");
    const double pi = p[i];
    const double qi = q[i];
    // x log x: D(y, x) = y log(y/x) - y + x
    shannon += (pi > 0.0 ? pi * std::log(pi / qi) : 0.0) - pi + qi;
    if (kind.barrier_weight > 0.0) {
      // log(1/x): D(y, x) = -log(y/x) + y/x - 1
      if (!(pi > 0.0)) return std::numeric_limits<double>::infinity();
      const double r = pi / qi;
      barrier += -std::log(r) + r - 1.0;
    }
  }
  double out = 0.0;
  if (kind.shannon_weight != 0.0) out += kind.shannon_weight * shannon;
  if (kind.barrier_weight != 0.0) out += kind.barrier_weight * barrier;
  return out;
}

ProbVector mix_uniform(const ProbVector& q, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 0.5)) {
    throw std::out_of_range("mix_uniform: gamma must lie in [0, 1/2]");
  }
  const double k = static_cast<double>(q.size());
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = (1.0 - gamma) * q[i] + gamma / k;
  }
  return ProbVector(std::move(out));
}

}  // namespace spa
