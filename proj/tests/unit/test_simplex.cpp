#include "doctest.h"

#include <cmath>
#include <random>

#include "spa/simplex.hpp"

using namespace spa;

namespace {

// Maximizes a (x - y) - D(y, x) over y in (0, 10] with a coarse pass
// followed by a 1e-6 pass around the coarse winner.
double grid_sup(ComponentKind kind, double a, double x) {
  auto obj = [&](double y) {
    double d;
    if (kind == ComponentKind::ShannonComponent) {
      d = y * std::log(y / x) - y + x;
    } else {
      d = -std::log(y / x) + y / x - 1.0;
    }
    return a * (x - y) - d;
  };
  double best_y = 1e-3;
  double best = -INFINITY;
  for (int i = 1; i <= 10000; ++i) {
    const double y = i * 1e-3;
    const double v = obj(y);
    if (v > best) {
      best = v;
      best_y = y;
    }
  }
  const double lo = std::max(1e-7, best_y - 2e-3);
  for (double y = lo; y <= best_y + 2e-3; y += 1e-6) {
    best = std::max(best, obj(y));
  }
  return best;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  std::vector<double> v(k);
  double s = 0.0;
  double mx = -INFINITY;
  for (auto& x : v) {
    x = n(rng);
    mx = std::max(mx, x);
  }
  for (auto& x : v) {
    x = std::exp(x - mx);
    s += x;
  }
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace

TEST_CASE("probvector invariants") {
  CHECK_THROWS_AS(ProbVector({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(ProbVector({-0.1, 1.1}), std::invalid_argument);
  ProbVector p({0.5 + 5e-10, 0.5});
  CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
  CHECK(ProbVector::uniform(4)[3] == doctest::Approx(0.25));
}

TEST_CASE("loss vector range") {
  CHECK_THROWS(LossVector({-0.5, 0.2}, LossRange::UnitInterval));
  LossVector l({-0.5, 0.0, 1.0}, LossRange::Symmetric);
  CHECK(l.nonzeros() == 2);
  CHECK(l.squared_norm() == doctest::Approx(1.25));
}

TEST_CASE("shannon entropy examples") {
  CHECK(shannon_entropy(ProbVector::uniform(4)) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(shannon_entropy(ProbVector::basis(5, 2)) == 0.0);
  const double two_term = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  CHECK(shannon_entropy(ProbVector({0.25, 0.75})) == doctest::Approx(two_term).epsilon(1e-14));
  CHECK(two_term == doctest::Approx(0.562335).epsilon(1e-6));
}

TEST_CASE("xi and zeta") {
  CHECK(xi(0.0) == 0.0);
  CHECK(zeta(0.0) == 0.0);
  CHECK(xi(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(xi(1.0) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK_THROWS_AS(zeta(-1.0), DomainError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    CHECK(xi(x) >= 0.0);
    if (x >= 0.0) CHECK(xi(x) <= x * x / 2.0 + 1e-15);
    CHECK(xi(x) <= x * x + 1e-15);
    if (x > -1.0) CHECK(zeta(x) >= 0.0);
    if (std::abs(x) <= 0.5) CHECK(zeta(x) <= x * x + 1e-15);
  }
}

TEST_CASE("stability_sup closed forms") {
  CHECK(stability_sup(ComponentKind::ShannonComponent, 0.0, 0.3) == 0.0);
  CHECK(stability_sup(ComponentKind::LogBarrierComponent, 0.0, 0.5) == 0.0);
  CHECK(stability_sup(ComponentKind::ShannonComponent, 1.0, 0.5) ==
        doctest::Approx(0.183940).epsilon(1e-5));
  CHECK(std::abs(grid_sup(ComponentKind::ShannonComponent, 1.0, 0.5) - 0.183940) <= 1e-5);
  CHECK_THROWS_AS(stability_sup(ComponentKind::LogBarrierComponent, -3.0, 0.5), DomainError);
  CHECK_THROWS_AS(stability_sup(ComponentKind::ShannonComponent, 1.0, 0.0), DomainError);
}

TEST_CASE("stability_sup agrees with grid maximization") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(0.01, 1.0);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = ux(rng);
    const bool shannon = (i % 2 == 0);
    double a;
    if (shannon) {
      a = -2.0 + 7.0 * ua(rng);
    } else {
      const double lo = std::max(-0.9 / x, -2.0);
      a = lo + (5.0 - lo) * ua(rng);
    }
    const auto kind = shannon ? ComponentKind::ShannonComponent : ComponentKind::LogBarrierComponent;
    const double closed = stability_sup(kind, a, x);
    const double grid = grid_sup(kind, a, x);
    CHECK(std::abs(closed - grid) <= 1e-5);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("bregman examples and properties") {
  const ProbVector p({0.3, 0.7});
  CHECK(bregman(DivergenceKind::NegShannon(), p, p) == 0.0);
  CHECK(bregman(DivergenceKind::NegShannon(), ProbVector({1.0, 0.0}), ProbVector({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const double lb = (-std::log(1.2) + 1.2 - 1.0) + (-std::log(0.8) + 0.8 - 1.0);
  CHECK(bregman(DivergenceKind::LogBarrier(), ProbVector({0.6, 0.4}), ProbVector({0.5, 0.5})) ==
        doctest::Approx(lb).epsilon(1e-14));
  CHECK(lb == doctest::Approx(0.040822).epsilon(1e-5));
  CHECK_THROWS_AS(bregman(DivergenceKind::NegShannon(), ProbVector({0.5, 0.5}),
                          ProbVector({1.0, 0.0})),
                  DomainError);

  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> uk(2, 8);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t k = uk(rng);
    const auto a = random_simplex(rng, k, 2.0);
    const auto b = random_simplex(rng, k, 2.0);
    const DivergenceKind kind = DivergenceKind::Hybrid(0.1 + (i % 7), (i % 3) * 2.0);
    CHECK(bregman(kind, a, b) >= -1e-12);
    CHECK(std::abs(bregman(kind, a, a)) <= 1e-12);
  }
}

TEST_CASE("mix_uniform") {
  const ProbVector q({0.2, 0.3, 0.5});
  CHECK(mix_uniform(q, 0.0) == q);
  const ProbVector u = ProbVector::uniform(3);
  for (double g : {0.1, 0.3, 0.5}) {
    const ProbVector m = mix_uniform(u, g);
    for (std::size_t i = 0; i < 3; ++i) CHECK(m[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  const ProbVector m = mix_uniform(ProbVector({1.0, 0.0}), 0.5);
  CHECK(m[0] == 0.75);
  CHECK(m[1] == 0.25);
  CHECK_THROWS_AS(mix_uniform(q, 0.6), std::out_of_range);
  CHECK_THROWS_AS(mix_uniform(q, -0.1), std::out_of_range);

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ug(0.0, 0.5);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t k = 2 + i % 9;
    const ProbVector base(random_simplex(rng, k, 6.0));
    const double g = ug(rng);
    const ProbVector mixed = mix_uniform(base, g);
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(mixed[j] >= g / static_cast<double>(k));
      CHECK(2.0 * mixed[j] >= base[j]);
    }
  }
}

TEST_CASE("entropy sum bounded by distance from a vertex") {
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<int> uT(1, 200);
  std::uniform_int_distribution<int> uk(2, 10);
  std::uniform_real_distribution<double> us(0.1, 8.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t k = uk(rng);
    const int T = uT(rng);
    const double spread = us(rng);
    std::vector<std::vector<double>> seq;
    double h_sum = 0.0;
    for (int t = 0; t < T; ++t) {
      seq.push_back(random_simplex(rng, k, spread));
      h_sum += shannon_entropy(seq.back());
    }
    for (std::size_t i = 0; i < k; ++i) {
      double Q = 0.0;
      for (const auto& q : seq) Q += 1.0 - q[i];
      if (Q == 0.0) continue;
      const double bound = Q * std::log(std::exp(1.0) * k * T / Q);
      CHECK(h_sum <= bound + 1e-9);
    }
  }
}

TEST_CASE("sum-to-integral comparison") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const double a0 = 0.05 + 2.0 * u(rng);
    const int T = 1 + static_cast<int>(200 * u(rng));
    double cum = a0;
    double s_sqrt = 0.0;
    double s_inv = 0.0;
    for (int t = 0; t < T; ++t) {
      const double a = (u(rng) < 0.3) ? 0.0 : 5.0 * u(rng);
      cum += a;
      s_sqrt += a / std::sqrt(cum);
      s_inv += a / cum;
    }
    CHECK(s_sqrt <= 2.0 * (std::sqrt(cum) - std::sqrt(a0)) + 1e-9);
    CHECK(s_inv <= std::log(cum / a0) + 1e-9);
  }
}
