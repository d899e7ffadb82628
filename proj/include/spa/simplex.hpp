#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <stdexcept>
#include <vector>

namespace spa {

// Raised when an input falls outside the domain of a numeric routine.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A point on the (k-1)-simplex. Entries are nonnegative and sum to one
// within 1e-12. Construction renormalizes sums off by more than that but at
// most 1e-9, and rejects larger drift.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-12;
  static constexpr double kRenormalizeTolerance = 1e-9;

  explicit ProbVector(std::vector<double> values);

  static ProbVector uniform(std::size_t k);
  static ProbVector basis(std::size_t k, std::size_t i);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  bool strictly_positive() const;

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

enum class LossRange { UnitInterval, Symmetric };

double range_lower(LossRange r);
inline constexpr double range_upper(LossRange) { return 1.0; }
const char* to_string(LossRange r);
LossRange loss_range_from_string(const std::string& s);

// A per-round loss vector with its declared range.
class LossVector {
 public:
  LossVector(std::vector<double> values, LossRange range);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  LossRange range() const { return range_; }

  std::size_t nonzeros() const;
  double squared_norm() const;

 private:
  std::vector<double> values_;
  LossRange range_;
};

// Loss estimate fed to FTRL. Unbounded; the inverse-weighted estimator
// produces at most one nonzero entry.
struct EstimatedLoss {
  std::vector<double> values;
};

// -sum p_i log p_i with 0 log 0 = 0.
double shannon_entropy(std::span<const double> p);
inline double shannon_entropy(const ProbVector& p) {
  return shannon_entropy(p.values());
}

// xi(x) = exp(-x) + x - 1
double xi(double x);
// zeta(x) = x - log(1 + x), x > -1
double zeta(double x);

enum class ComponentKind { ShannonComponent, LogBarrierComponent };

// max_y { a (x - y) - D_phi(y, x) } for the scalar components x log x and
// log(1/x), in closed form.
double stability_sup(ComponentKind kind, double a, double x);

// Weights of a separable regularizer
//   shannon_weight * sum q log q + barrier_weight * sum log(1/q).
struct DivergenceKind {
  double shannon_weight = 1.0;
  double barrier_weight = 0.0;

  static DivergenceKind NegShannon() { return {1.0, 0.0}; }
  static DivergenceKind LogBarrier() { return {0.0, 1.0}; }
  static DivergenceKind Hybrid(double beta, double c) { return {beta, c}; }
};

// Bregman divergence D(p, q) of the regularizer described by `kind`.
// q must be strictly positive. A zero entry of p under a positive barrier
// weight yields +infinity.
double bregman(const DivergenceKind& kind, std::span<const double> p,
               std::span<const double> q);
inline double bregman(const DivergenceKind& kind, const ProbVector& p,
                      const ProbVector& q) {
  return bregman(kind, p.values(), q.values());
}

// (1 - gamma) q + gamma / k, gamma in [0, 1/2].
ProbVector mix_uniform(const ProbVector& q, double gamma);

}  // namespace spa
