#pragma once

#include <map>
#include <string>

namespace spa {

// Absolute constant on the k log T term of the sparse best-of-both-worlds
// adversarial bound. The proof's additive terms are 2k + 4k log T + 15k log k,
// which is 7.6 k log T at k = 8, T = 1e4.
inline constexpr double kBobwAdditiveConstant = 8.0;

// Constant on the B sqrt(log k log T) term of the partial-monitoring bound.
// (1 + 2 sqrt 2) sqrt(log(1+T) / log T) stays below 4 for T >= 100.
inline constexpr double kPmAdditiveConstant = 4.0;

// Bound families. Inputs are read from the two maps by name:
//   exp3-sparse, logbarrier-sparse, bobw-adversarial: k, T (params), l2 (totals)
//   bobw-stochastic: k, T, c1, beta1, s_eff, delta_min
//   bobw-corrupted: the above plus corruption_budget
//   pm-adversarial: k, T, B (params), sum_vprime (totals)
//   none: +infinity
double theorem_bound(const std::string& kind, const std::map<std::string, double>& params,
                     const std::map<std::string, double>& totals);

// Explicit stochastic and corrupted bounds of the sparse best-of-both-worlds
// algorithm, obtained by the self-bounding argument from the proof's
// constants. corruption = 0 gives the stochastic bound.
double bobw_self_bounding_bound(double k, double T, double c1, double beta1, double s_eff,
                                double delta_min, double corruption);

}  // namespace spa
