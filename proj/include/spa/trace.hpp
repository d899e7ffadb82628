#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace spa {

inline constexpr int kTraceFormatVersion = 1;

// One round. beta is beta_t (before the update), h is h_{t+1} and z is z_t.
// s1_ok holds the stability condition the algorithm relies on, stab_lemma_ok
// the per-round stability bound, f4_ok the entropy growth bound.
struct TraceRow {
  long t = 0;
  std::size_t action = 0;
  double loss_observed = 0.0;
  double regret_cum = 0.0;
  double beta = 0.0;
  double h = 0.0;
  double z = 0.0;
  bool s1_ok = true;
  bool stab_lemma_ok = true;
  bool f4_ok = true;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct RegretTrace {
  int format_version = kTraceFormatVersion;
  std::string kind;  // "mab" or "pm"
  std::string algo;
  std::string env;
  std::string group;
  std::string config_hash;
  std::size_t k = 0;
  long T = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t episode = 0;
  std::string bound_kind;
  double beta_final = 0.0;
  std::vector<TraceRow> rows;
  std::map<std::string, double> totals;
  std::map<std::string, double> params;
  std::map<std::string, double> certificates;
  std::map<std::string, long> checks;
  std::map<std::string, long> violations;
  std::map<std::string, long> first_violation;

  void record(const std::string& family, bool ok, long t);
  long total_violations() const;

  friend bool operator==(const RegretTrace&, const RegretTrace&) = default;
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTraceHeader =
    "t,A_t,loss_observed,regret_cum,beta,h,z,s1_ok,stab_lemma_ok,f4_ok";

std::string trace_csv(const RegretTrace& trace);
std::string trace_sidecar_json(const RegretTrace& trace);
// Inverse of the two serializers.
RegretTrace parse_trace(const std::string& csv, const std::string& sidecar_json);

// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
void write_trace(const RegretTrace& trace, const std::filesystem::path& dir, const std::string& stem);
// Reads the pair sharing the stem of `csv_path`.
RegretTrace read_trace(const std::filesystem::path& csv_path);
// All traces under `dir`, sorted by file name.
std::vector<RegretTrace> read_trace_dir(const std::filesystem::path& dir);

std::string format_double(double x);

}  // namespace spa
