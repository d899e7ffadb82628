#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "spa/pm/game.hpp"

namespace spa::pm {

enum class ActionClass { Pareto, Dominated, Degenerate, DuplicateOf };

const char* to_string(ActionClass c);

// Affine dimension of {u >= 0 : A_ub u <= b_ub, A_eq u = b_eq}, or -1 when
// empty. Inequalities (including u_j >= 0) that cannot be made strictly slack
// are treated as implicit equalities.
int polytope_dimension(const std::vector<std::vector<double>>& A_ub, const std::vector<double>& b_ub,
                       const std::vector<std::vector<double>>& A_eq, const std::vector<double>& b_eq,
                       std::size_t n);

// Witness for the ordered pair (a, b), a < b: w_a[s] + w_b[s'] reproduces
// L_a - L_b through the feedback. Indexed by symbol id; zero off-row.
struct Witness {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<double> w_a;
  std::vector<double> w_b;
  double residual = 0.0;
};

struct GameGeometry {
  std::size_t k = 0;
  std::size_t d = 0;
  std::vector<ActionClass> classes;
  std::vector<std::size_t> duplicate_of;  // meaningful for DuplicateOf
  std::vector<int> cell_dim;              // -1 for empty cells
  std::vector<std::size_t> pareto;
  std::vector<std::pair<std::size_t, std::size_t>> neighbors;  // a < b
  std::vector<Witness> witnesses;                              // one per neighbor pair

  bool is_pareto(std::size_t a) const;
  const Witness* witness(std::size_t a, std::size_t b) const;
  bool locally_observable() const { return witnesses.size() == neighbors.size(); }
};

// Classification only; never throws on degenerate or unobservable games.
GameGeometry classify_game(const PmGame& game);

// Full analysis; throws GameError on duplicate rows, degenerate actions or a
// neighbor pair without a witness.
GameGeometry analyze_geometry(const PmGame& game);

// G(a, s)_b, dense over k actions x |alphabet| symbols x k coordinates.
class EstimatorG {
 public:
  EstimatorG() = default;
  EstimatorG(std::size_t k, std::size_t n_symbols) : k_(k), ns_(n_symbols), v_(k * n_symbols * k, 0.0) {}

  std::size_t k() const { return k_; }
  std::size_t n_symbols() const { return ns_; }
  double& operator()(std::size_t a, std::size_t s, std::size_t b) { return v_[(a * ns_ + s) * k_ + b]; }
  double operator()(std::size_t a, std::size_t s, std::size_t b) const { return v_[(a * ns_ + s) * k_ + b]; }
  const double* row(std::size_t a, std::size_t s) const { return &v_[(a * ns_ + s) * k_]; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  friend bool operator==(const EstimatorG&, const EstimatorG&) = default;

 private:
  std::size_t k_ = 0;
  std::size_t ns_ = 0;
  std::vector<double> v_;
};

// Spanning tree over the Pareto set rooted at the smallest Pareto index,
// built by BFS over neighbors in index order. G0(a, s)_b sums the witnesses
// along the tree path from b to the root.
EstimatorG build_g0(const PmGame& game, const GameGeometry& geom);

// max over Pareto b, c and outcomes x of
// |sum_a (G(a, Phi_ax)_b - G(a, Phi_ax)_c) - (L_bx - L_cx)|.
double g_identity_residual(const PmGame& game, const GameGeometry& geom, const EstimatorG& G);

}  // namespace spa::pm
