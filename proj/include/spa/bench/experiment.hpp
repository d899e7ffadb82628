#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spa/bench/config.hpp"
#include "spa/trace.hpp"

namespace spa::bench {

// What the aggregator keeps of one episode after its trace has been checked.
struct EpisodeSummary {
  std::string group;
  long T = 0;
  std::uint64_t episode = 0;
  std::string kind, algo, env, bound_kind;
  std::map<std::string, double> totals;
  std::map<std::string, double> certificates;
  std::map<std::string, long> checks, violations, first_violation;
  std::vector<std::pair<long, double>> prefix_regret;
  std::string error;
};

// Re-derives what can be re-derived from the rows (beta monotonicity, the
// regret proxy and its certificate, the theorem bound, row flag counts) and
// merges it with the logged families.
EpisodeSummary check_trace(const RegretTrace& trace, const std::vector<long>& marks = {});

struct FamilyStatus {
  long checks = 0;
  long violations = 0;
  long first_round = -1;  // earliest violating round over all episodes
  long first_episode = -1;
};

struct GroupSummary {
  std::string group, kind, algo, env, bound_kind;
  long T = 0;
  std::size_t episodes = 0;
  double mean_regret = 0.0;
  double se_regret = 0.0;
  double mean_l2 = 0.0;
  double mean_bound = 0.0;
  std::map<std::string, double> mean_certificates;
  std::map<std::string, double> mean_totals;
  std::map<std::string, FamilyStatus> families;
  bool bound_ok = true;
};

struct TrendSummary {
  std::string group;
  std::string source;
  std::vector<long> at;
  std::vector<double> mean_regret;
  std::vector<double> ratios;
  double max_ratio = 3.0;
  bool ok = true;
};

struct SummaryReport {
  std::vector<GroupSummary> groups;
  std::vector<TrendSummary> trends;
  std::vector<std::string> errors;
  bool check_per_round = true;
  bool check_bound = true;

  bool families_ok() const;
  bool bounds_ok() const;
  bool trends_ok() const;
  bool pass() const;
};

SummaryReport aggregate(const std::vector<EpisodeSummary>& episodes, const CertificateToggles& toggles);

std::string report_json(const SummaryReport& report);
// group,T,metric,value
std::string report_long_csv(const SummaryReport& report);
// summary.json and summary_long.csv under `dir`.
void write_report(const SummaryReport& report, const std::filesystem::path& dir);

struct RunOutcome {
  SummaryReport report;
  std::vector<EpisodeSummary> episodes;
  double wall_seconds = 0.0;
};

// Runs every (T, episode) job on `cfg.parallel` threads. Traces go to
// <out>/traces, the report to <out>. Results are joined in (T, episode)
// order whatever the completion order.
RunOutcome run_experiment(const ExperimentConfig& cfg);

// Stem of the trace files of one job.
std::string trace_stem(const std::string& name, long T, std::uint64_t episode);

// Re-checks every trace under `dir`. Throws TraceFormatError on an empty set
// or a version mismatch.
SummaryReport certify_traces(const std::filesystem::path& dir, const CertificateToggles& toggles = {});

}  // namespace spa::bench
