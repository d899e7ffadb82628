#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spa/environment.hpp"
#include "spa/mab.hpp"
#include "spa/pm/runner.hpp"

namespace spa::bench {

inline constexpr int kConfigSchemaVersion = 1;

// Validation failure; `field` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ArtifactKind { Mab, Pm };

// Regret at successive checkpoints must not grow by more than max_ratio.
// Checkpoints are the T grid ("grid") or prefixes of every episode
// ("prefix", at `marks`).
struct TrendCheck {
  bool enabled = false;
  std::string source = "grid";
  std::vector<long> marks;
  double max_ratio = 3.0;
};

struct CertificateToggles {
  bool per_round = true;      // every logged assertion family must be clean
  bool theorem_bound = true;  // mean regret <= mean theorem bound
  TrendCheck trend;
};

struct MabSetup {
  AgentConfig agent;  // T and seed are filled per job
  EnvSpec env;
};

struct PmSetup {
  std::filesystem::path game_path;
  pm::OutcomeSpec outcomes;
  pm::Model model = pm::Model::FI;
  // Enforce eta_t <= 1 / (2 m k^2) by raising beta_1.
  bool eta_condition = false;
  double ebo_tol = 1e-6;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name;
  ArtifactKind kind = ArtifactKind::Mab;
  std::optional<MabSetup> mab;
  std::optional<PmSetup> pm;
  std::vector<long> T;
  std::vector<std::uint64_t> episodes;
  std::uint64_t master_seed = 0;
  int parallel = 1;
  std::filesystem::path out = "out";
  bool write_traces = true;
  CertificateToggles certificates;

  // Canonical JSON of everything that influences results (not parallelism
  // or output location).
  std::string canonical_json() const;
  std::string hash() const;
};

// Parses and validates. Relative game paths resolve against `base_dir`, then
// against the shipped fixture directory; bare names select a shipped fixture.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies --seeds N (episodes 0..N-1).
void override_seed_count(ExperimentConfig& cfg, std::size_t n);

std::filesystem::path fixture_dir();

}  // namespace spa::bench
