#include "spa/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace spa {
namespace {

double need(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::invalid_argument("theorem_bound: missing input '" + key + "'");
  return it->second;
}

}  // namespace

double bobw_self_bounding_bound(double k, double T, double c1, double beta1, double s_eff,
                                double delta_min, double corruption) {
  const double e = std::numbers::e;
  const double log_k = std::log(k);
  const double log_kT = std::log(k * T);
  // Leading factor of the adaptive-rate certificate with nu_t <= T.
  const double A = 2.0 * (c1 + 2.0 / c1 * std::log1p(T * T / beta1));
  const double c2 = 81.0 * c1 * c1;
  const double b = 20.0 * k / 9.0 * std::log(T / k);
  const double additive = 2.0 * k + 4.0 * k * std::log(T) + 15.0 * k * log_k;
  const double slope = 2.0 * A * std::sqrt(6.0 * s_eff * log_kT);
  const double offset =
      A * (std::sqrt(c2) + std::sqrt(2.0 * s_eff * log_k) + 2.0 * std::sqrt(6.0 * e * s_eff * log_kT) + b) +
      additive;
  // Reg <= slope sqrt(P) + offset and Reg >= delta_min P - C, for every
  // lambda in (0, 1].
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 1000; ++i) {
    const double lam = i / 1000.0;
    const double v = (1.0 + lam) * (1.0 + lam) * slope * slope / (4.0 * lam * delta_min) +
                     (1.0 + lam) * offset + lam * corruption;
    best = std::min(best, v);
  }
  return best;
}

double theorem_bound(const std::string& kind, const std::map<std::string, double>& params,
                     const std::map<std::string, double>& totals) {
  if (kind == "none") return std::numeric_limits<double>::infinity();
  const double k = need(params, "k");
  const double T = need(params, "T");
  const double log_k = std::log(k);
  if (kind == "exp3-sparse") {
    const double l2 = need(totals, "l2");
    return 2.0 * std::numbers::sqrt2 * std::sqrt(l2 * log_k) +
           (2.0 * std::numbers::sqrt2 + 1.0) * std::cbrt(k * T * log_k);
  }
  if (kind == "logbarrier-sparse") {
    const double l2 = need(totals, "l2");
    return 4.0 * std::numbers::sqrt2 * std::sqrt(l2 * log_k) + 2.0 * k * std::log(T) + k + 0.25;
  }
  if (kind == "bobw-adversarial") {
    const double l2 = need(totals, "l2");
    return 4.0 * std::sqrt(l2 * log_k * std::log1p(T)) + kBobwAdditiveConstant * k * std::log(T);
  }
  if (kind == "bobw-stochastic" || kind == "bobw-corrupted") {
    const double corruption = kind == "bobw-corrupted" ? need(params, "corruption_budget") : 0.0;
    return bobw_self_bounding_bound(k, T, need(params, "c1"), need(params, "beta1"),
                                    need(params, "s_eff"), need(params, "delta_min"), corruption);
  }
  if (kind == "pm-adversarial") {
    const double sum_v = need(totals, "sum_vprime");
    const double B = need(params, "B");
    return std::sqrt(2.0 * sum_v * log_k * std::log1p(T)) +
           kPmAdditiveConstant * B * std::sqrt(log_k * std::log(T));
  }
  throw std::invalid_argument("theorem_bound: unknown bound kind '" + kind + "'");
}

}  // namespace spa
