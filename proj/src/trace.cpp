#include "spa/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spa {
namespace {

using nlohmann::json;

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw TraceFormatError("trace: bad number '" + s + "'");
  }
  if (pos != s.size()) throw TraceFormatError("trace: bad number '" + s + "'");
  return v;
}

bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw TraceFormatError("trace: bad flag '" + s + "'");
}

// JSON has no infinities; non-finite values travel as strings.
json encode(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double decode(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw TraceFormatError("trace: cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void RegretTrace::record(const std::string& family, bool ok, long t) {
  ++checks[family];
  long& v = violations[family];
  if (!ok) {
    if (v == 0) first_violation[family] = t;
    ++v;
  }
}

long RegretTrace::total_violations() const {
  long n = 0;
  for (const auto& [_, v] : violations) n += v;
  return n;
}

std::string trace_csv(const RegretTrace& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  out.reserve(out.size() + trace.rows.size() * 96);
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.action);
    for (double v : {r.loss_observed, r.regret_cum, r.beta, r.h, r.z}) {
      out += ',';
      out += format_double(v);
    }
    for (bool b : {r.s1_ok, r.stab_lemma_ok, r.f4_ok}) {
      out += ',';
      out += b ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

std::string trace_sidecar_json(const RegretTrace& trace) {
  json j;
  j["format_version"] = trace.format_version;
  j["kind"] = trace.kind;
  j["algo"] = trace.algo;
  j["env"] = trace.env;
  j["group"] = trace.group;
  j["config_hash"] = trace.config_hash;
  j["k"] = trace.k;
  j["T"] = trace.T;
  j["master_seed"] = trace.master_seed;
  j["episode"] = trace.episode;
  j["bound_kind"] = trace.bound_kind;
  j["beta_final"] = encode(trace.beta_final);
  j["rows"] = trace.rows.size();
  for (const auto* m : {&trace.totals, &trace.params, &trace.certificates}) {
    const char* key = m == &trace.totals ? "totals" : m == &trace.params ? "params" : "certificates";
    json obj = json::object();
    for (const auto& [name, v] : *m) obj[name] = encode(v);
    j[key] = obj;
  }
  j["checks"] = trace.checks;
  j["violations"] = trace.violations;
  j["first_violation"] = trace.first_violation;
  return j.dump(2) + "\n";
}

RegretTrace parse_trace(const std::string& csv, const std::string& sidecar_json) {
  RegretTrace tr;
  json j;
  try {
    j = json::parse(sidecar_json);
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("trace sidecar: ") + e.what());
  }
  try {
    tr.format_version = j.at("format_version").get<int>();
    if (tr.format_version != kTraceFormatVersion) {
      throw TraceFormatError("trace sidecar: format version " + std::to_string(tr.format_version) +
                             " not supported (expected " + std::to_string(kTraceFormatVersion) + ")");
    }
    tr.kind = j.at("kind").get<std::string>();
    tr.algo = j.at("algo").get<std::string>();
    tr.env = j.at("env").get<std::string>();
    tr.group = j.at("group").get<std::string>();
    tr.config_hash = j.at("config_hash").get<std::string>();
    tr.k = j.at("k").get<std::size_t>();
    tr.T = j.at("T").get<long>();
    tr.master_seed = j.at("master_seed").get<std::uint64_t>();
    tr.episode = j.at("episode").get<std::uint64_t>();
    tr.bound_kind = j.at("bound_kind").get<std::string>();
    tr.beta_final = decode(j.at("beta_final"));
    for (auto [key, m] : {std::pair{"totals", &tr.totals}, std::pair{"params", &tr.params},
                          std::pair{"certificates", &tr.certificates}}) {
      for (const auto& [name, v] : j.at(key).items()) (*m)[name] = decode(v);
    }
    tr.checks = j.at("checks").get<std::map<std::string, long>>();
    tr.violations = j.at("violations").get<std::map<std::string, long>>();
    tr.first_violation = j.at("first_violation").get<std::map<std::string, long>>();
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("trace sidecar: ") + e.what());
  }
  const std::size_t expected_rows = j.at("rows").get<std::size_t>();

  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw TraceFormatError("trace csv: unexpected header");
  }
  std::vector<std::string> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    cells.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 10) {
      throw TraceFormatError("trace csv: expected 10 columns in row " +
                             std::to_string(tr.rows.size() + 1));
    }
    TraceRow r;
    r.t = std::stol(cells[0]);
    r.action = std::stoul(cells[1]);
    r.loss_observed = parse_double(cells[2]);
    r.regret_cum = parse_double(cells[3]);
    r.beta = parse_double(cells[4]);
    r.h = parse_double(cells[5]);
    r.z = parse_double(cells[6]);
    r.s1_ok = parse_flag(cells[7]);
    r.stab_lemma_ok = parse_flag(cells[8]);
    r.f4_ok = parse_flag(cells[9]);
    tr.rows.push_back(r);
  }
  if (tr.rows.size() != expected_rows) {
    throw TraceFormatError("trace csv: row count does not match the sidecar");
  }
  return tr;
}

void write_trace(const RegretTrace& trace, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (stem + ".csv"), std::ios::binary);
    out << trace_csv(trace);
  }
  std::ofstream out(dir / (stem + ".json"), std::ios::binary);
  out << trace_sidecar_json(trace);
}

RegretTrace read_trace(const std::filesystem::path& csv_path) {
  std::filesystem::path side = csv_path;
  side.replace_extension(".json");
  return parse_trace(slurp(csv_path), slurp(side));
}

std::vector<RegretTrace> read_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw TraceFormatError("trace directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> csvs;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv" &&
        std::filesystem::exists(std::filesystem::path(e.path()).replace_extension(".json"))) {
      csvs.push_back(e.path());
    }
  }
  std::sort(csvs.begin(), csvs.end());
  std::vector<RegretTrace> out;
  out.reserve(csvs.size());
  for (const auto& p : csvs) out.push_back(read_trace(p));
  return out;
}

}  // namespace spa
