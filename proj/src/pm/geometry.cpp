#include "spa/pm/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>

#include "spa/pm/lp.hpp"

namespace spa::pm {

namespace {

constexpr double kWitnessTolerance = 1e-8;
constexpr double kRankTolerance = 1e-9;

int matrix_rank(const std::vector<std::vector<double>>& rows, std::size_t n) {
  if (rows.empty()) return 0;
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  cod.setThreshold(kRankTolerance);
  return static_cast<int>(cod.rank());
}

// Cell of a inside the simplex: (L_a - L_b)'u <= 0 for all b, plus extra
// equalities (L_a - L_c)'u = 0 for the actions in `tied`.
int cell_dimension(const PmGame& g, std::size_t a, const std::vector<std::size_t>& tied) {
  std::vector<std::vector<double>> A_ub;
  std::vector<double> b_ub;
  for (std::size_t b = 0; b < g.k; ++b) {
    if (b == a) continue;
    std::vector<double> row(g.d);
    for (std::size_t x = 0; x < g.d; ++x) row[x] = g.L[a][x] - g.L[b][x];
    A_ub.push_back(std::move(row));
    b_ub.push_back(0.0);
  }
  std::vector<std::vector<double>> A_eq{std::vector<double>(g.d, 1.0)};
  std::vector<double> b_eq{1.0};
  for (std::size_t c : tied) {
    std::vector<double> row(g.d);
    for (std::size_t x = 0; x < g.d; ++x) row[x] = g.L[a][x] - g.L[c][x];
    A_eq.push_back(std::move(row));
    b_eq.push_back(0.0);
  }
  return polytope_dimension(A_ub, b_ub, A_eq, b_eq, g.d);
}

std::optional<Witness> solve_witness(const PmGame& g, std::size_t a, std::size_t b) {
  const auto syms = g.row_symbols();
  const std::size_t na = syms[a].size();
  const std::size_t nb = syms[b].size();
  auto col_of = [&](std::size_t row, int s) {
    return static_cast<Eigen::Index>(std::lower_bound(syms[row].begin(), syms[row].end(), s) - syms[row].begin());
  };
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.d), static_cast<Eigen::Index>(na + nb));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(g.d));
  for (std::size_t x = 0; x < g.d; ++x) {
    const auto r = static_cast<Eigen::Index>(x);
    M(r, col_of(a, g.Phi[a][x])) += 1.0;
    M(r, static_cast<Eigen::Index>(na) + col_of(b, g.Phi[b][x])) += 1.0;
    rhs(r) = g.L[a][x] - g.L[b][x];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  const Eigen::VectorXd w = cod.solve(rhs);
  const double residual = (M * w - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= kWitnessTolerance)) return std::nullopt;
  Witness out;
  out.a = a;
  out.b = b;
  out.w_a.assign(g.alphabet_size(), 0.0);
  out.w_b.assign(g.alphabet_size(), 0.0);
  for (std::size_t i = 0; i < na; ++i) out.w_a[static_cast<std::size_t>(syms[a][i])] = w(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < nb; ++i)
    out.w_b[static_cast<std::size_t>(syms[b][i])] = w(static_cast<Eigen::Index>(na + i));
  out.residual = residual;
  return out;
}

std::string action_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

const char* to_string(ActionClass c) {
  switch (c) {
    case ActionClass::Pareto: return "pareto";
    case ActionClass::Dominated: return "dominated";
    case ActionClass::Degenerate: return "degenerate";
    case ActionClass::DuplicateOf: return "duplicate";
  }
  return "?";
}

int polytope_dimension(const std::vector<std::vector<double>>& A_ub, const std::vector<double>& b_ub,
                       const std::vector<std::vector<double>>& A_eq, const std::vector<double>& b_eq,
                       std::size_t n) {
  LinearProgram base;
  base.c.assign(n, 0.0);
  base.A_ub = A_ub;
  base.b_ub = b_ub;
  base.A_eq = A_eq;
  base.b_eq = b_eq;
  if (solve_lp(base).status != LpStatus::Optimal) return -1;

  std::vector<std::vector<double>> tight = A_eq;
  // An inequality row is implicit when min of its slack over the polytope is
  // zero at every point, i.e. max slack <= tol.
  for (std::size_t i = 0; i < A_ub.size(); ++i) {
    LinearProgram lp = base;
    lp.c = A_ub[i];  // min a'u  <=>  max slack b - a'u
    const LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Optimal && b_ub[i] - r.value <= kLpTolerance) tight.push_back(A_ub[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    LinearProgram lp = base;
    lp.c.assign(n, 0.0);
    lp.c[j] = -1.0;
    const LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Optimal && -r.value <= kLpTolerance) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      tight.push_back(std::move(e));
    }
  }
  return static_cast<int>(n) - matrix_rank(tight, n);
}

bool GameGeometry::is_pareto(std::size_t a) const {
  return a < classes.size() && classes[a] == ActionClass::Pareto;
}

const Witness* GameGeometry::witness(std::size_t a, std::size_t b) const {
  for (const auto& w : witnesses)
    if (w.a == std::min(a, b) && w.b == std::max(a, b)) return &w;
  return nullptr;
}

GameGeometry classify_game(const PmGame& g) {
  g.validate();
  GameGeometry geo;
  geo.k = g.k;
  geo.d = g.d;
  geo.classes.assign(g.k, ActionClass::Dominated);
  geo.duplicate_of.assign(g.k, g.k);
  geo.cell_dim.assign(g.k, -1);

  for (std::size_t a = 0; a < g.k; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (g.L[a] == g.L[b]) {
        geo.classes[a] = ActionClass::DuplicateOf;
        geo.duplicate_of[a] = b;
        break;
      }
    }
  }
  const int full = static_cast<int>(g.d) - 1;
  for (std::size_t a = 0; a < g.k; ++a) {
    if (geo.classes[a] == ActionClass::DuplicateOf) continue;
    // A duplicate's twin would force (L_a - L_b)'u <= 0 both ways; cells are
    // computed among distinct rows only.
    geo.cell_dim[a] = cell_dimension(g, a, {});
    if (geo.cell_dim[a] == full) {
      geo.classes[a] = ActionClass::Pareto;
      geo.pareto.push_back(a);
    } else if (geo.cell_dim[a] >= 0) {
      geo.classes[a] = ActionClass::Degenerate;
    }
  }
  for (std::size_t i = 0; i < geo.pareto.size(); ++i) {
    for (std::size_t j = i + 1; j < geo.pareto.size(); ++j) {
      const std::size_t a = geo.pareto[i], b = geo.pareto[j];
      if (cell_dimension(g, a, {b}) == full - 1) {
        geo.neighbors.emplace_back(a, b);
        if (auto w = solve_witness(g, a, b)) geo.witnesses.push_back(std::move(*w));
      }
    }
  }
  return geo;
}

GameGeometry analyze_geometry(const PmGame& g) {
  using K = GameError::Kind;
  GameGeometry geo = classify_game(g);
  for (std::size_t a = 0; a < g.k; ++a) {
    if (geo.classes[a] == ActionClass::DuplicateOf) {
      throw GameError(K::DuplicateActions,
                      "game " + g.name + ": actions " + action_list({geo.duplicate_of[a], a}) + " have identical loss rows",
                      {geo.duplicate_of[a], a});
    }
  }
  for (std::size_t a = 0; a < g.k; ++a) {
    if (geo.classes[a] == ActionClass::Degenerate) {
      throw GameError(K::DegenerateGame,
                      "game " + g.name + ": action " + std::to_string(a) + " has a cell of dimension " +
                          std::to_string(geo.cell_dim[a]) + " < d - 1",
                      {a});
    }
  }
  for (const auto& [a, b] : geo.neighbors) {
    if (!geo.witness(a, b)) {
      throw GameError(K::NotLocallyObservable,
                      "game " + g.name + ": neighbors " + action_list({a, b}) + " have no local witness", {a, b});
    }
  }
  return geo;
}

EstimatorG build_g0(const PmGame& g, const GameGeometry& geo) {
  EstimatorG G(g.k, g.alphabet_size());
  if (geo.pareto.empty()) return G;
  const std::size_t root = geo.pareto.front();
  std::vector<std::size_t> parent(g.k, g.k);
  std::vector<bool> seen(g.k, false);
  std::deque<std::size_t> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : geo.pareto) {
      if (seen[u]) continue;
      const bool adjacent = std::find(geo.neighbors.begin(), geo.neighbors.end(),
                                      std::make_pair(std::min(u, v), std::max(u, v))) != geo.neighbors.end();
      if (!adjacent) continue;
      seen[u] = true;
      parent[u] = v;
      queue.push_back(u);
    }
  }
  for (std::size_t b : geo.pareto) {
    if (!seen[b]) {
      throw GameError(GameError::Kind::Disconnected,
                      "game " + g.name + ": Pareto action " + std::to_string(b) + " is not connected to " +
                          std::to_string(root) + " in the neighbor graph",
                      {root, b});
    }
  }
  // Edge (v, parent v) contributes an estimate of L_v - L_parent.
  for (std::size_t b : geo.pareto) {
    for (std::size_t v = b; v != root; v = parent[v]) {
      const std::size_t p = parent[v];
      const Witness* w = geo.witness(v, p);
      if (!w) throw GameError(GameError::Kind::NotLocallyObservable, "missing witness", {v, p});
      const double sign = v == w->a ? 1.0 : -1.0;
      for (std::size_t s = 0; s < g.alphabet_size(); ++s) {
        G(w->a, s, b) += sign * w->w_a[s];
        G(w->b, s, b) += sign * w->w_b[s];
      }
    }
  }
  return G;
}

double g_identity_residual(const PmGame& g, const GameGeometry& geo, const EstimatorG& G) {
  double worst = 0.0;
  for (std::size_t x = 0; x < g.d; ++x) {
    std::vector<double> S(g.k, 0.0);
    for (std::size_t a = 0; a < g.k; ++a) {
      const double* r = G.row(a, static_cast<std::size_t>(g.Phi[a][x]));
      for (std::size_t b = 0; b < g.k; ++b) S[b] += r[b];
    }
    for (std::size_t b : geo.pareto)
      for (std::size_t c : geo.pareto)
        worst = std::max(worst, std::abs(S[b] - S[c] - (g.L[b][x] - g.L[c][x])));
  }
  return worst;
}

}  // namespace spa::pm
