#include "spa/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "json.hpp"
#include "spa/bounds.hpp"
#include "spa/mab.hpp"
#include "spa/pm/runner.hpp"
#include "spa/spa_rate.hpp"

namespace spa::bench {

namespace {

double param(const RegretTrace& tr, const std::string& key) {
  auto it = tr.params.find(key);
  if (it == tr.params.end()) throw TraceFormatError("trace lacks parameter " + key);
  return it->second;
}

void add_family(EpisodeSummary& s, const std::string& family, long checks, long violations, long first) {
  s.checks[family] = checks;
  s.violations[family] = violations;
  if (violations > 0) s.first_violation[family] = first;
  else s.first_violation.erase(family);
}

bool close(double a, double b) {
  return a == b || std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

EpisodeSummary check_trace(const RegretTrace& tr, const std::vector<long>& marks) {
  EpisodeSummary s;
  s.group = tr.group;
  s.T = tr.T;
  s.episode = tr.episode;
  s.kind = tr.kind;
  s.algo = tr.algo;
  s.env = tr.env;
  s.bound_kind = tr.bound_kind;
  s.totals = tr.totals;
  s.certificates = tr.certificates;
  s.checks = tr.checks;
  s.violations = tr.violations;
  s.first_violation = tr.first_violation;
  if (tr.rows.size() != static_cast<std::size_t>(tr.T)) {
    s.error = "trace has " + std::to_string(tr.rows.size()) + " rows for T = " + std::to_string(tr.T);
    return s;
  }

  // beta_t from the rows; beta_{T+1} is beta_final.
  long bad = 0, first = -1;
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    const double next = i + 1 < tr.rows.size() ? tr.rows[i + 1].beta : tr.beta_final;
    if (!(next >= tr.rows[i].beta)) {
      ++bad;
      if (first < 0) first = tr.rows[i].t + 1;
    }
  }
  add_family(s, "beta_monotone", tr.T, bad, first);

  // Row flags against the logged families.
  long s1_false = 0;
  for (const auto& r : tr.rows) s1_false += r.s1_ok ? 0 : 1;
  const std::string s1_family = tr.checks.count("s1") ? "s1" : "s2";
  const long logged_s1 = tr.violations.count(s1_family) ? tr.violations.at(s1_family) : 0;

  // Regret proxy and its certificate from beta, h and z.
  SpaConfig sc;
  sc.c1 = param(tr, "c1");
  sc.c2 = param(tr, "c2");
  sc.lambda = param(tr, "lambda");
  sc.beta1 = param(tr, "beta1");
  SpaState st = SpaState::initial(sc);
  double penalty = 0.0, stability = 0.0;
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    const TraceRow& r = tr.rows[i];
    const double next = i + 1 < tr.rows.size() ? tr.rows[i + 1].beta : tr.beta_final;
    penalty += (next - r.beta) * r.h;
    stability += r.z / r.beta;
    st.sum_zh += r.z * r.h;
    st.sum_z += r.z;
  }
  st.beta = tr.beta_final;
  st.last_zbar = param(tr, "zbar_T");
  const double reghat = penalty + sc.lambda * stability;
  double cert = std::numeric_limits<double>::quiet_NaN();
  if (tr.certificates.count("cert_I")) {
    cert = bound_certificate_I(st, param(tr, "epsilon"), param(tr, "h1"), sc);
  } else if (tr.certificates.count("cert_II")) {
    cert = bound_certificate_II(st, param(tr, "a"), param(tr, "h1"), sc);
  }
  const bool cert_ok = reghat <= cert * (1.0 + 1e-12);
  add_family(s, "certificate", 1, cert_ok ? 0 : 1, tr.T);

  long mism = 0;
  const double final_regret = tr.totals.count("final_regret") ? tr.totals.at("final_regret") : 0.0;
  mism += tr.rows.back().regret_cum == final_regret ? 0 : 1;
  mism += tr.certificates.count("reghat") && close(tr.certificates.at("reghat"), reghat) ? 0 : 1;
  mism += tr.certificates.count("cert_I") && !close(tr.certificates.at("cert_I"), cert) ? 1 : 0;
  mism += tr.certificates.count("cert_II") && !close(tr.certificates.at("cert_II"), cert) ? 1 : 0;
  mism += s1_false == logged_s1 ? 0 : 1;
  const double bound = theorem_bound(tr.bound_kind, tr.params, tr.totals);
  mism += tr.certificates.count("theorem_bound") && close(tr.certificates.at("theorem_bound"), bound) ? 0 : 1;
  add_family(s, "trace_consistency", 6, mism, tr.T);
  s.certificates["reghat"] = reghat;
  s.certificates["theorem_bound"] = bound;

  for (long m : marks) {
    if (m >= 1 && m <= tr.T) s.prefix_regret.emplace_back(m, tr.rows[static_cast<std::size_t>(m - 1)].regret_cum);
  }
  return s;
}

bool SummaryReport::families_ok() const {
  if (!check_per_round) return true;
  for (const auto& g : groups)
    for (const auto& [name, f] : g.families)
      if (f.violations > 0) return false;
  return true;
}

bool SummaryReport::bounds_ok() const {
  if (!check_bound) return true;
  return std::all_of(groups.begin(), groups.end(), [](const GroupSummary& g) { return g.bound_ok; });
}

bool SummaryReport::trends_ok() const {
  return std::all_of(trends.begin(), trends.end(), [](const TrendSummary& t) { return t.ok; });
}

bool SummaryReport::pass() const { return errors.empty() && families_ok() && bounds_ok() && trends_ok(); }

SummaryReport aggregate(const std::vector<EpisodeSummary>& eps, const CertificateToggles& toggles) {
  SummaryReport rep;
  rep.check_per_round = toggles.per_round;
  rep.check_bound = toggles.theorem_bound;
  std::map<std::pair<std::string, long>, std::vector<const EpisodeSummary*>> by;
  for (const auto& e : eps) {
    if (!e.error.empty()) {
      rep.errors.push_back(e.group + " T=" + std::to_string(e.T) + " episode " + std::to_string(e.episode) + ": " +
                           e.error);
      continue;
    }
    by[{e.group, e.T}].push_back(&e);
  }
  for (auto& [key, list] : by) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->episode < b->episode; });
    GroupSummary g;
    g.group = key.first;
    g.T = key.second;
    g.kind = list.front()->kind;
    g.algo = list.front()->algo;
    g.env = list.front()->env;
    g.bound_kind = list.front()->bound_kind;
    g.episodes = list.size();
    const double n = static_cast<double>(list.size());
    double sum = 0.0, sq = 0.0;
    for (auto* e : list) {
      const double r = e->totals.count("final_regret") ? e->totals.at("final_regret") : 0.0;
      sum += r;
      sq += r * r;
      for (const auto& [k, v] : e->totals) g.mean_totals[k] += v / n;
      for (const auto& [k, v] : e->certificates) g.mean_certificates[k] += v / n;
      for (const auto& [fam, c] : e->checks) {
        FamilyStatus& f = g.families[fam];
        f.checks += c;
        const long v = e->violations.count(fam) ? e->violations.at(fam) : 0;
        f.violations += v;
        if (v > 0 && e->first_violation.count(fam)) {
          const long r = e->first_violation.at(fam);
          if (f.first_round < 0 || r < f.first_round) {
            f.first_round = r;
            f.first_episode = static_cast<long>(e->episode);
          }
        }
      }
    }
    g.mean_regret = sum / n;
    g.se_regret = n > 1 ? std::sqrt(std::max(0.0, (sq - n * g.mean_regret * g.mean_regret) / (n - 1)) / n) : 0.0;
    g.mean_l2 = g.mean_totals.count("l2") ? g.mean_totals.at("l2") : 0.0;
    g.mean_bound = g.mean_certificates.count("theorem_bound") ? g.mean_certificates.at("theorem_bound")
                                                               : std::numeric_limits<double>::infinity();
    g.bound_ok = g.mean_regret <= g.mean_bound;
    rep.groups.push_back(std::move(g));
  }

  if (toggles.trend.enabled) {
    auto ratio = [](double prev, double cur) {
      if (prev > 0.0) return cur / prev;
      return cur <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    };
    if (toggles.trend.source == "grid") {
      std::map<std::string, TrendSummary> trends;
      for (const auto& g : rep.groups) {
        TrendSummary& t = trends[g.group];
        t.group = g.group;
        t.source = "grid";
        t.max_ratio = toggles.trend.max_ratio;
        t.at.push_back(g.T);
        t.mean_regret.push_back(g.mean_regret);
      }
      for (auto& [name, t] : trends) {
        for (std::size_t i = 1; i < t.at.size(); ++i) t.ratios.push_back(ratio(t.mean_regret[i - 1], t.mean_regret[i]));
        t.ok = std::all_of(t.ratios.begin(), t.ratios.end(), [&](double r) { return r <= t.max_ratio; });
        rep.trends.push_back(t);
      }
    } else {
      for (auto& [key, list] : by) {
        TrendSummary t;
        t.group = key.first + " T=" + std::to_string(key.second);
        t.source = "prefix";
        t.max_ratio = toggles.trend.max_ratio;
        t.at = toggles.trend.marks;
        t.mean_regret.assign(t.at.size(), 0.0);
        for (auto* e : list)
          for (std::size_t i = 0; i < t.at.size(); ++i)
            for (const auto& [m, r] : e->prefix_regret)
              if (m == t.at[i]) t.mean_regret[i] += r / static_cast<double>(list.size());
        for (std::size_t i = 1; i < t.at.size(); ++i) t.ratios.push_back(ratio(t.mean_regret[i - 1], t.mean_regret[i]));
        t.ok = std::all_of(t.ratios.begin(), t.ratios.end(), [&](double r) { return r <= t.max_ratio; });
        rep.trends.push_back(t);
      }
    }
  }
  return rep;
}

std::string report_json(const SummaryReport& rep) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["pass"] = rep.pass();
  j["families_ok"] = rep.families_ok();
  j["bounds_ok"] = rep.bounds_ok();
  j["trends_ok"] = rep.trends_ok();
  j["errors"] = rep.errors;
  j["groups"] = ordered_json::array();
  for (const auto& g : rep.groups) {
    ordered_json gj;
    gj["group"] = g.group;
    gj["T"] = g.T;
    gj["kind"] = g.kind;
    gj["algo"] = g.algo;
    gj["env"] = g.env;
    gj["bound_kind"] = g.bound_kind;
    gj["episodes"] = g.episodes;
    gj["mean_regret"] = format_double(g.mean_regret);
    gj["se_regret"] = format_double(g.se_regret);
    gj["mean_l2"] = format_double(g.mean_l2);
    gj["mean_bound"] = format_double(g.mean_bound);
    gj["regret_to_bound"] = format_double(g.mean_regret / g.mean_bound);
    gj["bound_ok"] = g.bound_ok;
    for (const auto& [k, v] : g.mean_certificates) gj["certificates"][k] = format_double(v);
    for (const auto& [k, v] : g.mean_totals) gj["totals"][k] = format_double(v);
    for (const auto& [name, f] : g.families) {
      gj["families"][name] = {{"checks", f.checks},
                              {"violations", f.violations},
                              {"first_round", f.first_round},
                              {"first_episode", f.first_episode},
                              {"pass", f.violations == 0}};
    }
    j["groups"].push_back(gj);
  }
  j["trends"] = ordered_json::array();
  for (const auto& t : rep.trends) {
    ordered_json tj;
    tj["group"] = t.group;
    tj["source"] = t.source;
    tj["at"] = t.at;
    std::vector<std::string> m, r;
    for (double v : t.mean_regret) m.push_back(format_double(v));
    for (double v : t.ratios) r.push_back(format_double(v));
    tj["mean_regret"] = m;
    tj["ratios"] = r;
    tj["max_ratio"] = format_double(t.max_ratio);
    tj["ok"] = t.ok;
    j["trends"].push_back(tj);
  }
  return j.dump(2) + "\n";
}

std::string report_long_csv(const SummaryReport& rep) {
  std::string out = "group,T,metric,value\n";
  auto row = [&](const std::string& g, long T, const std::string& metric, const std::string& v) {
    out += g + "," + std::to_string(T) + "," + metric + "," + v + "\n";
  };
  for (const auto& g : rep.groups) {
    row(g.group, g.T, "episodes", std::to_string(g.episodes));
    row(g.group, g.T, "mean_regret", format_double(g.mean_regret));
    row(g.group, g.T, "se_regret", format_double(g.se_regret));
    row(g.group, g.T, "mean_l2", format_double(g.mean_l2));
    row(g.group, g.T, "mean_bound", format_double(g.mean_bound));
    for (const auto& [k, v] : g.mean_certificates) row(g.group, g.T, "certificate." + k, format_double(v));
    for (const auto& [name, f] : g.families) row(g.group, g.T, "violations." + name, std::to_string(f.violations));
  }
  for (const auto& t : rep.trends)
    for (std::size_t i = 0; i < t.at.size(); ++i)
      row(t.group, t.at[i], "trend_mean_regret", format_double(t.mean_regret[i]));
  return out;
}

void write_report(const SummaryReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "summary.json") << report_json(rep);
  std::ofstream(dir / "summary_long.csv") << report_long_csv(rep);
}

std::string trace_stem(const std::string& name, long T, std::uint64_t episode) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "_T%ld_ep%04llu", T, static_cast<unsigned long long>(episode));
  return name + buf;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  struct Job {
    long T;
    std::uint64_t episode;
  };
  std::vector<Job> jobs;
  for (long T : cfg.T)
    for (std::uint64_t ep : cfg.episodes) jobs.push_back({T, ep});

  std::optional<pm::PreparedGame> game;
  if (cfg.pm) game = pm::prepare_game(pm::load_game(cfg.pm->game_path));
  const std::vector<long> marks = cfg.certificates.trend.source == "prefix" ? cfg.certificates.trend.marks
                                                                             : std::vector<long>{};
  const auto trace_dir = cfg.out / "traces";
  const std::string hash = cfg.hash();

  std::vector<EpisodeSummary> results(jobs.size());
  auto run_job = [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      RegretTrace tr;
      if (cfg.mab) {
        AgentConfig ac = cfg.mab->agent;
        ac.T = job.T;
        ac.seed = cfg.master_seed;
        EnvSpec es = cfg.mab->env;
        es.T = job.T;
        tr = run_episode(ac, es, job.episode);
      } else {
        pm::PmRunConfig pc;
        pc.model = cfg.pm->model;
        pc.T = job.T;
        pc.seed = cfg.master_seed;
        pc.ebo.tol = cfg.pm->ebo_tol;
        if (cfg.pm->eta_condition) {
          const double k = static_cast<double>(game->game.k);
          pc.beta1_floor = 2.0 * static_cast<double>(game->game.m()) * k * k;
        }
        tr = pm::pm_run(*game, cfg.pm->outcomes, pc, job.episode);
      }
      tr.group = cfg.name;
      tr.config_hash = hash;
      if (cfg.write_traces) write_trace(tr, trace_dir, trace_stem(cfg.name, job.T, job.episode));
      results[i] = check_trace(tr, marks);
    } catch (const std::exception& e) {
      EpisodeSummary s;
      s.group = cfg.name;
      s.T = job.T;
      s.episode = job.episode;
      s.error = e.what();
      results[i] = std::move(s);
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallel), jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  RunOutcome out;
  out.report = aggregate(results, cfg.certificates);
  out.episodes = std::move(results);
  write_report(out.report, cfg.out);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::ordered_json timing{{"config_hash", hash},
                                {"jobs", jobs.size()},
                                {"parallel", cfg.parallel},
                                {"wall_seconds", out.wall_seconds}};
  std::ofstream(cfg.out / "timing.json") << timing.dump(2) << "\n";
  return out;
}

SummaryReport certify_traces(const std::filesystem::path& dir, const CertificateToggles& toggles) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw TraceFormatError("trace directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "summary_long.csv")
      files.push_back(e.path());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw TraceFormatError("no trace files under " + dir.string());
  std::vector<EpisodeSummary> eps;
  eps.reserve(files.size());
  for (const auto& f : files) eps.push_back(check_trace(read_trace(f), toggles.trend.marks));
  return aggregate(eps, toggles);
}

}  // namespace spa::bench
