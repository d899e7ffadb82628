#include "spa/bench/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#ifndef SPA_FIXTURE_DIR
#define SPA_FIXTURE_DIR "fixtures"
#endif

namespace spa::bench {

namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + key, "required field is missing");
  return j.at(key);
}

template <class T>
T as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field, "has the wrong type");
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
  return as<T>(need(j, key, path), path + key);
}

template <class T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  return as<T>(j.at(key), path + key);
}

template <class F>
auto wrap(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

EnvSpec parse_env(const json& j, std::size_t k) {
  const std::string p = "env.";
  const auto type = get<std::string>(j, "type", p);
  EnvSpec e;
  e.k = k;
  auto stochastic = [&]() {
    StochasticSparseSpec s;
    s.means = get<std::vector<double>>(j, "means", p);
    s.noise = wrap(p + "noise", [&] { return noise_from_string(get_or<std::string>(j, "noise", p, "bernoulli")); });
    s.range = wrap(p + "range", [&] { return loss_range_from_string(get_or<std::string>(j, "range", p, "symmetric")); });
    return s;
  };
  if (type == "adversarial-sparse") {
    AdversarialSparseSpec a;
    a.s = get<std::size_t>(j, "s", p);
    a.range = wrap(p + "range", [&] { return loss_range_from_string(get_or<std::string>(j, "range", p, "unit")); });
    a.pattern = wrap(p + "pattern",
                     [&] { return support_pattern_from_string(get_or<std::string>(j, "pattern", p, "random")); });
    a.favored_weight = get_or<double>(j, "favored_weight", p, 0.5);
    e.variant = a;
  } else if (type == "stochastic-sparse") {
    e.variant = stochastic();
  } else if (type == "corrupted-stochastic") {
    CorruptedStochasticSpec c;
    c.base = stochastic();
    c.budget = get<double>(j, "budget", p);
    c.schedule = wrap(p + "schedule", [&] {
      return corruption_schedule_from_string(get_or<std::string>(j, "schedule", p, "front-loaded"));
    });
    e.variant = c;
  } else {
    throw ConfigError(p + "type", "unknown environment '" + type +
                                      "' (expected adversarial-sparse, stochastic-sparse or corrupted-stochastic)");
  }
  return e;
}

pm::OutcomeSpec parse_outcomes(const json& j) {
  const std::string p = "outcomes.";
  pm::OutcomeSpec o;
  o.kind = wrap(p + "type", [&] { return pm::outcome_kind_from_string(get<std::string>(j, "type", p)); });
  switch (o.kind) {
    case pm::OutcomeKind::Stochastic: o.probs = get<std::vector<double>>(j, "probs", p); break;
    case pm::OutcomeKind::Constant: o.constant = get<std::size_t>(j, "outcome", p); break;
    case pm::OutcomeKind::Adversarial:
      o.phases = get<std::vector<std::size_t>>(j, "phases", p);
      o.period = get_or<long>(j, "period", p, 100);
      break;
  }
  return o;
}

std::filesystem::path resolve_game(const std::string& ref, const std::filesystem::path& base_dir) {
  namespace fs = std::filesystem;
  const fs::path as_path(ref);
  if (as_path.is_absolute() && fs::exists(as_path)) return as_path;
  for (const fs::path& cand : {base_dir / as_path, fixture_dir() / as_path, fixture_dir() / "games" / (ref + ".json")}) {
    if (fs::exists(cand)) return fs::weakly_canonical(cand);
  }
  throw ConfigError("game", "no game file or shipped fixture named '" + ref + "'");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::filesystem::path fixture_dir() { return SPA_FIXTURE_DIR; }

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("<config>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<config>", "top level must be an object");

  ExperimentConfig c;
  c.schema_version = get_or<int>(j, "schema_version", "", kConfigSchemaVersion);
  if (c.schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(c.schema_version));
  }
  c.name = get<std::string>(j, "name", "");
  if (c.name.empty() || c.name.find_first_of("/\\ ") != std::string::npos) {
    throw ConfigError("name", "must be nonempty without spaces or slashes");
  }
  const auto kind = get<std::string>(j, "kind", "");
  if (kind == "mab") {
    c.kind = ArtifactKind::Mab;
  } else if (kind == "pm") {
    c.kind = ArtifactKind::Pm;
  } else {
    throw ConfigError("kind", "expected mab or pm, got '" + kind + "'");
  }

  const json& T = need(j, "T", "");
  c.T = T.is_array() ? as<std::vector<long>>(T, "T") : std::vector<long>{as<long>(T, "T")};
  if (c.T.empty()) throw ConfigError("T", "needs at least one horizon");
  for (long t : c.T)
    if (t < 2) throw ConfigError("T", "horizons must be >= 2");

  const json& seeds = need(j, "seeds", "");
  if (seeds.is_array()) {
    c.episodes = as<std::vector<std::uint64_t>>(seeds, "seeds");
    if (c.episodes.empty()) throw ConfigError("seeds", "needs at least one episode");
  } else {
    const auto n = as<long>(seeds, "seeds");
    if (n < 1) throw ConfigError("seeds", "count must be >= 1");
    for (long i = 0; i < n; ++i) c.episodes.push_back(static_cast<std::uint64_t>(i));
  }
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", "", 0);
  c.parallel = get_or<int>(j, "parallel", "", 1);
  if (c.parallel < 1) throw ConfigError("parallel", "must be >= 1");
  c.out = get_or<std::string>(j, "out", "", "out/" + c.name);
  c.write_traces = get_or<bool>(j, "write_traces", "", true);

  if (j.contains("certificates")) {
    const json& cj = j.at("certificates");
    const std::string p = "certificates.";
    c.certificates.per_round = get_or<bool>(cj, "per_round", p, true);
    c.certificates.theorem_bound = get_or<bool>(cj, "theorem_bound", p, true);
    if (cj.contains("trend")) {
      const json& tj = cj.at("trend");
      const std::string tp = p + "trend.";
      TrendCheck& tc = c.certificates.trend;
      tc.enabled = true;
      tc.source = get_or<std::string>(tj, "source", tp, "grid");
      tc.max_ratio = get_or<double>(tj, "max_ratio", tp, 3.0);
      if (tc.source == "prefix") {
        tc.marks = get<std::vector<long>>(tj, "marks", tp);
        for (long m : tc.marks)
          for (long t : c.T)
            if (m < 1 || m > t) throw ConfigError(tp + "marks", "checkpoints must lie in [1, T]");
        if (tc.marks.size() < 2) throw ConfigError(tp + "marks", "needs at least two checkpoints");
      } else if (tc.source == "grid") {
        if (c.T.size() < 2) throw ConfigError(tp + "source", "a grid trend needs at least two horizons");
      } else {
        throw ConfigError(tp + "source", "expected grid or prefix");
      }
    }
  }

  if (c.kind == ArtifactKind::Mab) {
    const json& a = need(j, "agent", "");
    MabSetup m;
    m.agent.algo = wrap("agent.algo", [&] { return algo_from_string(get<std::string>(a, "algo", "agent.")); });
    m.agent.k = get<std::size_t>(a, "k", "agent.");
    m.agent.c1_preset = wrap("agent.c1_preset", [&] {
      return c1_preset_from_string(get_or<std::string>(a, "c1_preset", "agent.", "statement"));
    });
    if (a.contains("c1")) m.agent.c1_override = get<double>(a, "c1", "agent.");
    m.agent.runtime_checks = get_or<bool>(a, "runtime_checks", "agent.", true);
    m.env = parse_env(need(j, "env", ""), m.agent.k);
    for (long t : c.T) {
      AgentConfig ac = m.agent;
      ac.T = t;
      EnvSpec es = m.env;
      es.T = t;
      wrap("agent", [&] { ac.validate(); return 0; });
      wrap("env", [&] { es.validate(); return 0; });
      if (derive_params(ac).range == LossRange::UnitInterval && es.range() != LossRange::UnitInterval) {
        throw ConfigError("env.range", std::string(to_string(ac.algo)) + " needs losses in [0, 1]");
      }
    }
    c.mab = std::move(m);
  } else {
    PmSetup p;
    p.game_path = resolve_game(get<std::string>(j, "game", ""), base_dir);
    const pm::PmGame game = wrap("game", [&] { return pm::load_game(p.game_path); });
    if (j.contains("model")) {
      p.model = wrap("model", [&] { return pm::model_from_string(get<std::string>(j, "model", "")); });
    } else if (game.model) {
      p.model = *game.model;
    } else {
      throw ConfigError("model", "required field is missing and the game file declares none");
    }
    p.outcomes = parse_outcomes(need(j, "outcomes", ""));
    wrap("outcomes", [&] { p.outcomes.validate(game.d); return 0; });
    p.eta_condition = get_or<bool>(j, "eta_condition", "", false);
    p.ebo_tol = get_or<double>(j, "ebo_tol", "", 1e-6);
    if (!(p.ebo_tol > 0.0)) throw ConfigError("ebo_tol", "must be positive");
    c.pm = std::move(p);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<config>", "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void override_seed_count(ExperimentConfig& cfg, std::size_t n) {
  if (n < 1) throw ConfigError("--seeds", "must be >= 1");
  cfg.episodes.clear();
  for (std::size_t i = 0; i < n; ++i) cfg.episodes.push_back(i);
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["name"] = name;
  j["kind"] = kind == ArtifactKind::Mab ? "mab" : "pm";
  j["T"] = T;
  j["episodes"] = episodes;
  j["master_seed"] = master_seed;
  if (mab) {
    j["agent"] = {{"algo", to_string(mab->agent.algo)},
                  {"k", mab->agent.k},
                  {"c1_preset", to_string(mab->agent.c1_preset)},
                  {"runtime_checks", mab->agent.runtime_checks}};
    if (mab->agent.c1_override) j["agent"]["c1"] = *mab->agent.c1_override;
    EnvSpec e = mab->env;
    e.T = 0;
    j["env"] = e.describe();
  }
  if (pm) {
    j["game"] = pm->game_path.filename().string();
    j["model"] = pm::to_string(pm->model);
    j["outcomes"] = pm->outcomes.describe();
    j["eta_condition"] = pm->eta_condition;
    j["ebo_tol"] = pm->ebo_tol;
  }
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json())));
  return buf;
}

}  // namespace spa::bench
