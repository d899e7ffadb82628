// Acceptance suite: one PASS/FAIL line per criterion. Long Monte-Carlo runs
// go through the shipped configs so the CLI and this binary agree.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spa/bench/config.hpp"
#include "spa/bench/experiment.hpp"
#include "spa/ftrl.hpp"
#include "spa/mab.hpp"
#include "spa/pm/game.hpp"
#include "spa/pm/geometry.hpp"
#include "spa/pm/lp.hpp"
#include "spa/simplex.hpp"
#include "spa/spa_rate.hpp"

namespace fs = std::filesystem;
using namespace spa;

namespace {

const fs::path kConfigs = SPA_CONFIG_DIR;
const fs::path kOut = SPA_ACCEPTANCE_OUT;
const std::string kGames = SPA_FIXTURE_DIR "/games/";

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bench::RunOutcome run_config(const std::string& name, const std::string& out_sub, int parallel = 0) {
  bench::ExperimentConfig cfg = bench::load_config(kConfigs / (name + ".json"));
  cfg.out = kOut / out_sub;
  fs::remove_all(cfg.out);
  if (parallel > 0) cfg.parallel = parallel;
  return bench::run_experiment(cfg);
}

// Families that were checked, with a violation count, plus run errors.
void require_clean(Verdict& v, const bench::SummaryReport& rep) {
  for (const auto& e : rep.errors) v.require(false, "episode error: " + e);
  for (const auto& g : rep.groups)
    for (const auto& [name, f] : g.families)
      v.require(f.violations == 0, g.group + " T=" + std::to_string(g.T) + " " + name + " failed " +
                                       std::to_string(f.violations) + "x, first round " +
                                       std::to_string(f.first_round));
}

std::string ratio_text(const bench::GroupSummary& g) {
  return "T=" + std::to_string(g.T) + " regret " + fmt("%.1f", g.mean_regret) + " +- " + fmt("%.1f", g.se_regret) +
         " bound " + fmt("%.4g", g.mean_bound) + " ratio " + fmt("%.3f", g.mean_regret / g.mean_bound);
}

void require_bounds(Verdict& v, const bench::SummaryReport& rep) {
  for (const auto& g : rep.groups) {
    v.note(ratio_text(g));
    v.require(g.bound_ok, "mean regret above the bound at T=" + std::to_string(g.T));
  }
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  std::vector<double> v(k);
  double mx = -INFINITY, s = 0.0;
  for (auto& x : v) mx = std::max(mx, x = n(rng));
  for (auto& x : v) s += (x = std::exp(x - mx));
  for (auto& x : v) x /= s;
  return v;
}

// Minimizer of a convex function of one variable on (0, 1): a 1e-4 grid,
// then a 1e-8 grid around the winner.
double grid_argmin(const std::function<double(double)>& f) {
  double best = INFINITY, arg = 0.5;
  for (int i = 1; i < 10000; ++i) {
    const double x = i * 1e-4;
    const double v = f(x);
    if (v < best) best = v, arg = x;
  }
  const double lo = std::max(1e-12, arg - 2e-4), hi = std::min(1.0 - 1e-12, arg + 2e-4);
  for (double x = lo; x <= hi; x += 1e-8) {
    const double v = f(x);
    if (v < best) best = v, arg = x;
  }
  return arg;
}

// ---- criterion 1
Verdict ftrl_solver_correctness() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> uk(2, 8);
  std::uniform_real_distribution<double> uL(-50.0, 50.0);
  std::uniform_real_distribution<double> ulogb(std::log(0.1), std::log(100.0));
  double worst_kkt = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> L(static_cast<std::size_t>(uk(rng)));
    for (auto& x : L) x = uL(rng);
    const RegularizerSpec reg(std::exp(ulogb(rng)), (rep % 3) * 2.0);
    worst_kkt = std::max(worst_kkt, solve_ftrl(L, reg).kkt_residual);
  }
  v.require(worst_kkt <= 1e-8, "KKT residual " + fmt("%.2e", worst_kkt));
  double worst_gap = 0.0;
  std::uniform_real_distribution<double> uL2(-5.0, 5.0);
  for (int rep = 0; rep < 500; ++rep) {
    const std::vector<double> L{uL2(rng), uL2(rng)};
    const double beta = std::exp(ulogb(rng));
    const double c = (rep % 3) * 2.0;
    const double q0 = solve_ftrl(L, RegularizerSpec(beta, c)).q[0];
    const double g = grid_argmin([&](double x) {
      const double y = 1.0 - x;
      return L[0] * x + L[1] * y + beta * (x * std::log(x) + y * std::log(y)) - c * (std::log(x) + std::log(y));
    });
    worst_gap = std::max(worst_gap, std::abs(q0 - g));
  }
  v.require(worst_gap <= 1e-5, "k=2 grid gap " + fmt("%.2e", worst_gap));
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, "took " + fmt("%.1f s", secs));
  v.note("max KKT " + fmt("%.1e", worst_kkt) + ", max grid gap " + fmt("%.1e", worst_gap) + ", " +
         fmt("%.1f s", secs));
  return v;
}

// ---- criterion 2
Verdict rate_certificates() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad_i = 0, bad_ii = 0, skipped = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const bool constant_h = pass == 1;
    for (int rep = 0; rep < 1000; ++rep) {
      const int T = 1 + rep % 500;
      const double h1 = 0.2 + 3.0 * u(rng);
      const double zb0 = 0.5 + 5.0 * u(rng);
      std::vector<double> h{h1}, z, zbar;
      double zb = zb0;
      for (int t = 0; t < T; ++t) {
        h.push_back(constant_h ? h1 : std::min(h.back(), h1 * (0.5 + 0.5 * u(rng))));
        z.push_back(u(rng) < 0.2 ? 0.0 : zb * u(rng));
        zbar.push_back(zb);
        if (u(rng) < 0.05) zb *= 1.0 + u(rng);
      }
      const double c1 = 0.3 + 2.0 * u(rng), lambda = 0.5 + 2.0 * u(rng);
      if (!constant_h) {
        const double c2 = 10.0 * u(rng), eps = 0.5 + u(rng);
        // beta_1 large enough for the first-order condition throughout
        const double beta1 = c1 * (eps + zb) / std::sqrt(c2 + zbar[0] * h1) + u(rng);
        const SpaConfig cfg(c1, c2, beta1, lambda);
        SpaState s = SpaState::initial(cfg, true);
        bool cond = true;
        for (int t = 0; t < T; ++t) {
          cond = cond && check_s1(s, z[t], zbar[t], h1, eps, cfg);
          s = spa_update(s, z[t], zbar[t], h[t + 1], h1, cfg);
        }
        if (!cond) {
          ++skipped;
          continue;
        }
        bad_i += reghat_sp(s, cfg) <= bound_certificate_I(s, eps, h1, cfg) ? 0 : 1;
      } else {
        const double a = 0.25 + 2.0 * u(rng);
        const double beta1 = a * c1 / std::sqrt(h1) * std::sqrt(zb * T) + 1e-9;
        const SpaConfig cfg(c1, 0.0, beta1, lambda);
        SpaState s = SpaState::initial(cfg, true);
        bool cond = true;
        for (int t = 0; t < T; ++t) {
          cond = cond && check_s2(s, z[t], h1, a, cfg);
          s = spa_update(s, z[t], zbar[t], h[t + 1], h1, cfg);
        }
        if (!cond) {
          ++skipped;
          continue;
        }
        bad_ii += reghat_sp(s, cfg) <= bound_certificate_II(s, a, h1, cfg) ? 0 : 1;
      }
    }
  }
  v.require(bad_i == 0, std::to_string(bad_i) + " first-order certificate violations");
  v.require(bad_ii == 0, std::to_string(bad_ii) + " square-root certificate violations");
  v.require(skipped == 0, std::to_string(skipped) + " sequences broke the stability condition");
  const double secs = seconds_since(t0);
  v.require(secs < 30.0, "took " + fmt("%.1f s", secs));
  v.note("2000 sequences, " + fmt("%.1f s", secs));
  return v;
}

// ---- criterion 9 oracle: F_t(alpha) scanned on a grid over the bracket
Verdict bisection_against_grid_scan(const std::vector<const bench::SummaryReport*>& bobw_runs) {
  Verdict v;
  long checks = 0;
  for (const auto* rep : bobw_runs) {
    require_clean(v, *rep);
    for (const auto& g : rep->groups)
      if (g.families.count("bisection")) checks += g.families.at("bisection").checks;
  }
  v.require(checks > 0, "no bisection checks were logged");

  AgentConfig c;
  c.algo = Algo::SparseBobw;
  c.k = 8;
  c.T = 4000;
  c.seed = 109;
  c.runtime_checks = false;
  EnvSpec e;
  e.k = 8;
  e.T = 4000;
  e.variant = AdversarialSparseSpec{2, LossRange::Symmetric, SupportPattern::Random, 0.5};
  Agent agent(c);
  Environment env(e, 7);
  Rng rng(8);
  int compared = 0;
  double worst = 0.0;
  for (long t = 1; t <= e.T && compared < 100; ++t) {
    const RoundLosses r = env.generate_round(t);
    const std::size_t a = agent.sample(rng);
    const double loss = r.loss[a];
    env.observe_action(a);
    const SpaState before = agent.spa();
    std::vector<double> L = agent.cumulative_estimate();
    const double p_arm = agent.p()[a];
    const double nu_t = nu(omega(loss, p_arm), p_arm, before.eta());
    L[a] += loss / p_arm;
    const StepResult st = agent.update(a, loss);
    if (nu_t == 0.0 || t % 5 != 0) continue;
    const AgentParams& ap = agent.params();
    auto F = [&](double alpha) {
      const ProbVector q = solve_ftrl(L, RegularizerSpec(alpha, ap.barrier)).q;
      const double h = shannon_entropy(mix_uniform(q, ap.gamma)) / (1.0 - ap.gamma);
      return implicit_residual(before, alpha, nu_t, h, ap.spa);
    };
    const double lo = before.beta;
    const double hi = before.beta + ap.spa.c1 * nu_t / std::sqrt(ap.spa.c2);
    const int n = 2000;
    double root = hi;
    double prev = F(lo);
    for (int i = 1; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      const double f = F(x);
      if (prev < 0.0 && f >= 0.0) {
        root = x;
        break;
      }
      prev = f;
    }
    const double tol = (hi - lo) / n + 2e-9 * std::max(1.0, before.beta);
    worst = std::max(worst, std::abs(st.beta_after - root) / tol);
    v.require(st.beta_after >= before.beta && st.beta_after <= before.beta + static_cast<double>(c.T),
              "beta left its bracket at round " + std::to_string(t));
    ++compared;
  }
  v.require(compared == 100, "only " + std::to_string(compared) + " rounds compared");
  v.require(worst <= 1.0, "grid disagreement " + fmt("%.2f", worst) + "x tolerance");
  v.note(std::to_string(checks) + " logged rounds, " + std::to_string(compared) + " grid-scanned (worst " +
         fmt("%.2f", worst) + " of tolerance)");
  return v;
}

// ---- criterion 10
// Max t with u in the simplex, (L_a - L_b) u + t <= 0 for b != a and, when
// `tie` is set, (L_a - L_tie) u = 0 and u >= t. Positive t certifies a
// full-dimensional cell, or a tie set meeting the relative interior.
double cell_slack(const pm::PmGame& g, std::size_t a, std::optional<std::size_t> tie) {
  const std::size_t d = g.d;
  pm::LinearProgram lp;
  lp.c.assign(d + 1, 0.0);
  lp.c[d] = -1.0;  // minimize -t; t is split as t = t+ with t+ <= 1
  for (std::size_t b = 0; b < g.k; ++b) {
    if (b == a || (tie && b == *tie)) continue;
    std::vector<double> row(d + 1, 0.0);
    for (std::size_t x = 0; x < d; ++x) row[x] = g.L[a][x] - g.L[b][x];
    row[d] = 1.0;
    lp.A_ub.push_back(row);
    lp.b_ub.push_back(0.0);
  }
  if (tie) {
    std::vector<double> row(d + 1, 0.0);
    for (std::size_t x = 0; x < d; ++x) row[x] = g.L[a][x] - g.L[*tie][x];
    lp.A_eq.push_back(row);
    lp.b_eq.push_back(0.0);
    for (std::size_t x = 0; x < d; ++x) {
      std::vector<double> r(d + 1, 0.0);
      r[x] = -1.0;
      r[d] = 1.0;
      lp.A_ub.push_back(r);
      lp.b_ub.push_back(0.0);
    }
  }
  std::vector<double> cap(d + 1, 0.0);
  cap[d] = 1.0;
  lp.A_ub.push_back(cap);
  lp.b_ub.push_back(1.0);
  std::vector<double> sum(d + 1, 1.0);
  sum[d] = 0.0;
  lp.A_eq.push_back(sum);
  lp.b_eq.push_back(1.0);
  const pm::LpResult r = pm::solve_lp(lp);
  return r.status == pm::LpStatus::Optimal ? r.x[d] : -1.0;
}

Verdict pm_geometry() {
  Verdict v;
  for (const std::string name : {"fi-2x2", "mab2-as-pm"}) {
    const pm::PmGame g = pm::load_game(kGames + name + ".json");
    const pm::GameGeometry geo = pm::analyze_geometry(g);
    std::vector<std::size_t> pareto;
    for (std::size_t a = 0; a < g.k; ++a)
      if (cell_slack(g, a, std::nullopt) > 1e-9) pareto.push_back(a);
    v.require(geo.pareto == pareto, name + ": Pareto set differs from the LP oracle");
    std::vector<std::pair<std::size_t, std::size_t>> nb;
    for (std::size_t i = 0; i < pareto.size(); ++i)
      for (std::size_t j = i + 1; j < pareto.size(); ++j)
        if (cell_slack(g, pareto[i], pareto[j]) > 1e-9) nb.emplace_back(pareto[i], pareto[j]);
    v.require(geo.neighbors == nb, name + ": neighbor pairs differ from the LP oracle");
    v.require(geo.locally_observable(), name + " not locally observable");
    const double res = pm::g_identity_residual(g, geo, pm::build_g0(g, geo));
    v.require(res <= 1e-8, name + ": G0 residual " + fmt("%.1e", res));
    v.note(name + " pareto " + std::to_string(pareto.size()) + " neighbors " + std::to_string(nb.size()) +
           " G0 residual " + fmt("%.1e", res));
  }
  try {
    pm::analyze_geometry(pm::load_game(kGames + "duplicate-rows.json"));
    v.require(false, "duplicate-row fixture accepted");
  } catch (const pm::GameError& e) {
    v.require(e.kind() == pm::GameError::Kind::DuplicateActions, std::string("wrong rejection: ") + e.what());
  }
  return v;
}

// ---- criterion 13
double grid_sup(ComponentKind kind, double a, double x) {
  auto obj = [&](double y) {
    const double d = kind == ComponentKind::ShannonComponent ? y * std::log(y / x) - y + x
                                                             : -std::log(y / x) + y / x - 1.0;
    return a * (x - y) - d;
  };
  double best_y = 1e-3, best = -INFINITY;
  for (int i = 1; i <= 10000; ++i) {
    const double y = i * 1e-3;
    const double val = obj(y);
    if (val > best) best = val, best_y = y;
  }
  for (double y = std::max(1e-7, best_y - 2e-3); y <= best_y + 2e-3; y += 1e-6) best = std::max(best, obj(y));
  return best;
}

Verdict stability_facts() {
  Verdict v;
  std::mt19937_64 rng(113);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.01 + 0.99 * u(rng);
    const bool shannon = i % 2 == 0;
    // both signs of a for each component
    const double lo = shannon ? -2.0 : std::max(-0.9 / x, -2.0);
    const double a = lo + (5.0 - lo) * u(rng);
    const auto kind = shannon ? ComponentKind::ShannonComponent : ComponentKind::LogBarrierComponent;
    worst = std::max(worst, std::abs(stability_sup(kind, a, x) - grid_sup(kind, a, x)));
  }
  v.require(worst <= 1e-5, "closed form vs grid " + fmt("%.2e", worst));

  int entropy_bad = 0, integral_bad = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t k = 2 + rep % 9;
    const int T = 1 + static_cast<int>(200 * u(rng));
    const double spread = 0.1 + 8.0 * u(rng);
    std::vector<std::vector<double>> seq;
    double h_sum = 0.0;
    for (int t = 0; t < T; ++t) {
      seq.push_back(random_simplex(rng, k, spread));
      h_sum += shannon_entropy(seq.back());
    }
    for (std::size_t i = 0; i < k; ++i) {
      double Q = 0.0;
      for (const auto& q : seq) Q += 1.0 - q[i];
      if (Q > 0.0 && h_sum > Q * std::log(std::exp(1.0) * static_cast<double>(k) * T / Q) + 1e-9) ++entropy_bad;
    }
    const double a0 = 0.05 + 2.0 * u(rng);
    double cum = a0, s_sqrt = 0.0, s_inv = 0.0;
    for (int t = 0; t < T; ++t) {
      const double a = u(rng) < 0.3 ? 0.0 : 5.0 * u(rng);
      cum += a;
      s_sqrt += a / std::sqrt(cum);
      s_inv += a / cum;
    }
    if (s_sqrt > 2.0 * (std::sqrt(cum) - std::sqrt(a0)) + 1e-9 || s_inv > std::log(cum / a0) + 1e-9) ++integral_bad;
  }
  v.require(entropy_bad == 0, std::to_string(entropy_bad) + " entropy-sum violations");
  v.require(integral_bad == 0, std::to_string(integral_bad) + " sum-to-integral violations");
  v.note("closed forms within " + fmt("%.1e", worst) + " of the grid");
  return v;
}

// ---- criterion 14
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void require_identical_traces(Verdict& v, const fs::path& a, const fs::path& b, const std::string& label) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a / "traces")) files.push_back(e.path().filename());
  std::size_t n_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b / "traces")) ++n_b;
  v.require(!files.empty() && files.size() == n_b, label + ": trace file sets differ");
  std::size_t differ = 0;
  for (const auto& f : files) differ += slurp(a / "traces" / f) == slurp(b / "traces" / f) ? 0 : 1;
  v.require(differ == 0, label + ": " + std::to_string(differ) + " trace files differ");
  v.require(slurp(a / "summary.json") == slurp(b / "summary.json"), label + ": summaries differ");
  v.note(label + " " + std::to_string(files.size()) + " files identical");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  int failed = 0;
  auto report = [&](int id, const std::string& name, const Verdict& v) {
    std::printf("criterion %2d %s  %s  [%s]\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  };
  auto guarded = [&](int id, const std::string& name, const std::function<Verdict()>& f) {
    try {
      report(id, name, f());
    } catch (const std::exception& e) {
      Verdict v;
      v.require(false, std::string("exception: ") + e.what());
      report(id, name, v);
    }
  };

  guarded(1, "hybrid FTRL solver meets KKT tolerance and the 1-D grid oracle", ftrl_solver_correctness);
  guarded(2, "rate certificates dominate the regret proxy on synthetic sequences", rate_certificates);

  const bench::RunOutcome exp3 = run_config("exp3-sparse-unit", "exp3-sparse-unit");
  guarded(3, "Exp3 with the adaptive rate stays below its L2 bound on unit sparse losses", [&] {
    Verdict v;
    require_clean(v, exp3.report);
    require_bounds(v, exp3.report);
    return v;
  });

  const bench::RunOutcome lb = run_config("logbarrier-sparse-symmetric", "logbarrier-sparse-symmetric");
  guarded(4, "log-barrier hybrid stays below its bound on signed sparse losses", [&] {
    Verdict v;
    require_clean(v, lb.report);
    require_bounds(v, lb.report);
    return v;
  });

  const bench::RunOutcome adv = run_config("bobw-adversarial", "bobw-adversarial");
  guarded(5, "best-of-both-worlds agent stays below the adversarial bound", [&] {
    Verdict v;
    require_clean(v, adv.report);
    require_bounds(v, adv.report);
    return v;
  });

  const bench::RunOutcome sto = run_config("bobw-stochastic", "bobw-stochastic");
  guarded(6, "best-of-both-worlds regret grows slowly per decade on a stochastic instance", [&] {
    Verdict v;
    require_clean(v, sto.report);
    require_bounds(v, sto.report);
    for (const auto& t : sto.report.trends) {
      std::string r;
      for (double x : t.ratios) r += (r.empty() ? "" : ", ") + fmt("%.2f", x);
      v.require(t.ok, "decade ratios " + r + " exceed " + fmt("%.1f", t.max_ratio));
    }
    return v;
  });

  const bench::RunOutcome cor = run_config("bobw-corrupted", "bobw-corrupted");
  guarded(7, "best-of-both-worlds agent stays below the corrupted-regime bound", [&] {
    Verdict v;
    require_clean(v, cor.report);
    require_bounds(v, cor.report);
    return v;
  });

  guarded(8, "no per-round stability or sensitivity check fails in any bandit run", [&] {
    Verdict v;
    std::map<std::string, long> checks;
    for (const auto* rep : {&exp3.report, &lb.report, &adv.report, &sto.report, &cor.report}) {
      require_clean(v, *rep);
      for (const auto& g : rep->groups)
        for (const auto& [name, f] : g.families) checks[name] += f.checks;
    }
    for (const char* fam : {"stability_lemma", "ratio_band", "entropy_growth", "nu_bound", "sandwich",
                            "monotone_power", "shifted_power"}) {
      v.require(checks[fam] > 0, std::string(fam) + " never checked");
      v.note(std::string(fam) + " " + std::to_string(checks[fam]));
    }
    return v;
  });

  guarded(9, "implicit rate update solves its fixed point within the bracket",
          [&] { return bisection_against_grid_scan({&adv.report, &sto.report, &cor.report}); });

  guarded(10, "game geometry matches the LP oracle and duplicates are rejected", pm_geometry);

  guarded(11, "EbO optimal values stay below the model constants under the step-size condition", [&] {
    Verdict v;
    for (const std::string name : {"pm-fi-certificate", "pm-mab2-certificate", "pm3-local-certificate"}) {
      const bench::ExperimentConfig cfg = bench::load_config(kConfigs / (name + ".json"));
      const double vbar = pm::model_Vbar(cfg.pm->model, pm::load_game(cfg.pm->game_path));
      const bench::RunOutcome run = run_config(name, name);
      require_clean(v, run.report);
      double max_v = 0.0;
      for (const auto& e : run.episodes) max_v = std::max(max_v, e.totals.at("max_vprime"));
      v.require(max_v <= vbar, name + ": V' reached " + fmt("%.4g", max_v));
      for (const auto& g : run.report.groups) {
        const long checks = g.families.count("vbar") ? g.families.at("vbar").checks : 0;
        v.require(checks == static_cast<long>(g.episodes) * g.T, name + ": step-size gate skipped rounds");
      }
      v.note(name + " max V' " + fmt("%.3g", max_v) + " <= " + fmt("%.3g", vbar));
    }
    return v;
  });

  const bench::RunOutcome pm_adv = run_config("pm-mab2-adversarial", "pm-mab2-adversarial");
  const bench::RunOutcome pm_sto = run_config("pm-mab2-stochastic", "pm-mab2-stochastic");
  guarded(12, "partial-monitoring regret stays below the logged certificate and grows slowly", [&] {
    Verdict v;
    require_clean(v, pm_adv.report);
    for (const auto& g : pm_adv.report.groups) {
      const double cert = g.mean_certificates.at("cert_adversarial");
      v.note("adversarial " + ratio_text(g) + " certificate " + fmt("%.1f", cert));
      v.require(g.bound_ok, "adversarial mean regret above the bound");
    }
    require_clean(v, pm_sto.report);
    for (const auto& t : pm_sto.report.trends) {
      std::string r;
      for (double x : t.ratios) r += (r.empty() ? "" : ", ") + fmt("%.2f", x);
      v.note("stochastic decade ratios " + r);
      v.require(t.ok, "stochastic trend above " + fmt("%.1f", t.max_ratio));
    }
    return v;
  });

  guarded(13, "stability closed forms, entropy sums and sum-to-integral facts hold", stability_facts);

  guarded(14, "reruns reproduce trace files byte for byte, serial or parallel", [&] {
    Verdict v;
    run_config("bobw-adversarial", "repro-bobw-serial", 1);
    require_identical_traces(v, kOut / "bobw-adversarial", kOut / "repro-bobw-serial", "bobw-adversarial");
    run_config("pm-fi-certificate", "repro-pm-fi-serial", 1);
    require_identical_traces(v, kOut / "pm-fi-certificate", kOut / "repro-pm-fi-serial", "pm-fi-certificate");
    run_config("pm-fi-certificate", "repro-pm-fi-parallel", 3);
    require_identical_traces(v, kOut / "pm-fi-certificate", kOut / "repro-pm-fi-parallel", "pm-fi-certificate x3");
    return v;
  });

  std::printf("%d of 14 criteria failed (%.0f s)\n", failed, seconds_since(start));
  return failed == 0 ? 0 : 1;
}
