#include "spa/pm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spa/bounds.hpp"
#include "spa/environment.hpp"
#include "spa/ftrl.hpp"
#include "spa/rng.hpp"
#include "spa/spa_rate.hpp"

namespace spa::pm {

const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Stochastic: return "stochastic";
    case OutcomeKind::Constant: return "constant";
    case OutcomeKind::Adversarial: return "adversarial";
  }
  return "?";
}

OutcomeKind outcome_kind_from_string(const std::string& s) {
  if (s == "stochastic") return OutcomeKind::Stochastic;
  if (s == "constant") return OutcomeKind::Constant;
  if (s == "adversarial") return OutcomeKind::Adversarial;
  throw std::invalid_argument("unknown outcome kind '" + s + "' (expected stochastic, constant or adversarial)");
}

void OutcomeSpec::validate(std::size_t d) const {
  switch (kind) {
    case OutcomeKind::Stochastic: {
      if (probs.size() != d) throw std::invalid_argument("outcomes.probs needs d entries");
      for (double p : probs)
        if (!(p >= 0.0)) throw std::invalid_argument("outcomes.probs must be nonnegative");
      const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
      if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("outcomes.probs must sum to one");
      break;
    }
    case OutcomeKind::Constant:
      if (constant >= d) throw std::invalid_argument("outcomes.constant must be an outcome index < d");
      break;
    case OutcomeKind::Adversarial:
      if (phases.empty()) throw std::invalid_argument("outcomes.phases must be nonempty");
      for (auto x : phases)
        if (x >= d) throw std::invalid_argument("outcomes.phases entries must be < d");
      if (period < 1) throw std::invalid_argument("outcomes.period must be >= 1");
      break;
  }
}

std::string OutcomeSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(";
  switch (kind) {
    case OutcomeKind::Stochastic:
      for (std::size_t i = 0; i < probs.size(); ++i) os << (i ? " " : "") << probs[i];
      break;
    case OutcomeKind::Constant: os << constant; break;
    case OutcomeKind::Adversarial:
      for (std::size_t i = 0; i < phases.size(); ++i) os << (i ? " " : "") << phases[i];
      os << "; period " << period;
      break;
  }
  os << ")";
  return os.str();
}

PreparedGame prepare_game(PmGame game) {
  GameGeometry geom = analyze_geometry(game);
  EstimatorG g0 = build_g0(game, geom);
  return PreparedGame{std::move(game), std::move(geom), std::move(g0)};
}

RegretTrace pm_run(const PreparedGame& pg, const OutcomeSpec& outcomes, const PmRunConfig& cfg,
                   std::uint64_t episode) {
  const PmGame& g = pg.game;
  const std::size_t k = g.k;
  outcomes.validate(g.d);
  if (cfg.T < 2) throw std::invalid_argument("pm_run: need T >= 2");

  const double Tn = static_cast<double>(cfg.T);
  const double log_k = std::log(static_cast<double>(k));
  const double B = model_B(cfg.model, g);
  const double vbar = model_Vbar(cfg.model, g);
  const double m = static_cast<double>(g.m());
  const double eta_gate = 1.0 / (2.0 * m * static_cast<double>(k * k));
  const double h1 = log_k;
  SpaConfig sc;
  sc.c1 = std::sqrt(std::log1p(Tn) / 2.0);
  sc.c2 = 0.0;
  sc.beta1 = std::max(B * std::sqrt(std::log1p(Tn) / log_k), cfg.beta1_floor);
  sc.lambda = 1.0;
  SpaState spa = SpaState::initial(sc);

  // Mean loss of each action under a stochastic source.
  std::optional<std::size_t> best;
  std::vector<double> mean_loss(k, 0.0);
  if (outcomes.kind == OutcomeKind::Stochastic) {
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t x = 0; x < g.d; ++x) mean_loss[a] += g.L[a][x] * outcomes.probs[x];
    best = static_cast<std::size_t>(std::min_element(mean_loss.begin(), mean_loss.end()) - mean_loss.begin());
  }

  Rng env_rng = make_rng(cfg.seed, episode, Stream::Environment);
  Rng rng = make_rng(cfg.seed, episode, Stream::Agent);
  RegretAccumulator acc(k, best);

  RegretTrace tr;
  tr.kind = "pm";
  tr.algo = std::string("ebo-spa-") + to_string(cfg.model);
  tr.env = g.name + " " + outcomes.describe();
  tr.k = k;
  tr.T = cfg.T;
  tr.master_seed = cfg.seed;
  tr.episode = episode;
  tr.bound_kind = "pm-adversarial";
  tr.rows.reserve(static_cast<std::size_t>(cfg.T));

  std::vector<double> cum(k, 0.0);
  FtrlOptions fopt;
  FtrlSolution cur = solve_ftrl(cum, RegularizerSpec(spa.beta));
  EstimatorG prev_G = pg.g0;
  double zbar = vbar;
  double sum_v = 0.0, max_v = 0.0, penalty = 0.0, stability = 0.0;
  long nonconverged = 0, ebo_iterations = 0;

  for (long t = 1; t <= cfg.T; ++t) {
    const ProbVector& q = cur.q;
    const double eta = spa.eta();
    const EboResult r = ebo_solve(g, pg.geom, pg.g0, q, eta, cfg.model, cfg.ebo, &prev_G);
    nonconverged += r.converged ? 0 : 1;
    ebo_iterations += r.iterations;

    bool feasible = true;
    for (std::size_t a = 0; a < k; ++a) {
      feasible = feasible && (cfg.model == Model::PMLocal ? r.p[a] >= q[a] / (2.0 * static_cast<double>(k))
                                                         : r.p[a] == q[a]);
    }
    tr.record("feasibility", feasible, t);

    std::size_t x = 0;
    switch (outcomes.kind) {
      case OutcomeKind::Stochastic: x = sample_index(outcomes.probs, uniform01(env_rng)); break;
      case OutcomeKind::Constant: x = outcomes.constant; break;
      case OutcomeKind::Adversarial:
        x = outcomes.phases[static_cast<std::size_t>((t - 1) / outcomes.period) % outcomes.phases.size()];
        break;
    }
    const std::size_t A = sample_index(r.p.values(), uniform01(rng));
    const auto sigma = static_cast<std::size_t>(g.Phi[A][x]);
    for (std::size_t b = 0; b < k; ++b) cum[b] += r.G(A, sigma, b) / r.p[A];

    std::vector<double> column(k);
    for (std::size_t a = 0; a < k; ++a) column[a] = g.L[a][x];
    acc.add(RoundLosses{LossVector(column, LossRange::UnitInterval),
                        best ? std::optional<std::vector<double>>(mean_loss) : std::nullopt, 0.0},
            A);

    const double v = r.vprime;
    zbar = std::max(zbar, v);
    const bool s1 = check_s1(spa, v, zbar, h1, vbar, sc);
    const bool gated = eta <= eta_gate * (1.0 + 1e-12);
    const bool vbar_ok = v <= vbar;
    tr.record("s1", s1, t);
    if (gated) tr.record("vbar", vbar_ok, t);

    const double beta_next = spa.beta + spa_increment(spa, v, zbar, h1, sc);
    fopt.warm_mu = cur.mu;
    FtrlSolution next = solve_ftrl(cum, RegularizerSpec(beta_next), fopt);
    const double h_next = shannon_entropy(next.q);
    const SpaState after = spa_update(spa, v, zbar, h_next, h1, sc);
    tr.record("beta_monotone", after.beta >= spa.beta, t);

    sum_v += v;
    max_v = std::max(max_v, v);
    penalty += (after.beta - spa.beta) * h_next;
    stability += v / spa.beta;

    TraceRow row;
    row.t = t;
    row.action = A;
    row.loss_observed = g.L[A][x];
    row.regret_cum = acc.regret();
    row.beta = spa.beta;
    row.h = h_next;
    row.z = v;
    row.s1_ok = s1;
    row.stab_lemma_ok = !gated || vbar_ok;
    row.f4_ok = feasible;
    tr.rows.push_back(row);

    spa = after;
    cur = std::move(next);
    prev_G = r.G;
  }

  tr.beta_final = spa.beta;
  tr.totals = {{"sum_vprime", sum_v},
               {"max_vprime", max_v},
               {"final_regret", acc.regret()},
               {"learner_loss", acc.learner_loss()},
               {"ebo_nonconverged", static_cast<double>(nonconverged)},
               {"ebo_iterations", static_cast<double>(ebo_iterations)}};
  tr.params = {{"k", static_cast<double>(k)},
               {"d", static_cast<double>(g.d)},
               {"m", m},
               {"T", Tn},
               {"B", B},
               {"Vbar", vbar},
               {"c1", sc.c1},
               {"c2", sc.c2},
               {"lambda", sc.lambda},
               {"epsilon", vbar},
               {"beta1", sc.beta1},
               {"h1", h1},
               {"eta_gate", eta_gate},
               {"zbar_T", zbar}};
  const double reghat = penalty + sc.lambda * stability;
  const double cert_I = bound_certificate_I(spa, vbar, h1, sc);
  tr.certificates["reghat"] = reghat;
  tr.certificates["cert_I"] = cert_I;
  tr.record("certificate", reghat <= cert_I * (1.0 + 1e-12), cfg.T);
  tr.certificates["cert_adversarial"] = std::sqrt(2.0 * sum_v * log_k * std::log1p(Tn));
  tr.certificates["theorem_bound"] = theorem_bound(tr.bound_kind, tr.params, tr.totals);
  return tr;
}

}  // namespace spa::pm
