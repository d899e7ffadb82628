#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "spa/bench/config.hpp"
#include "spa/bench/experiment.hpp"
#include "spa/pm/game.hpp"
#include "spa/pm/geometry.hpp"

namespace fs = std::filesystem;
using namespace spa;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCertificate = 1;
constexpr int kExitConfig = 2;

void print_report(const bench::SummaryReport& rep) {
  for (const auto& g : rep.groups) {
    std::printf("%s T=%ld episodes=%zu regret=%.4g +- %.2g bound=%.4g ratio=%.3f %s\n", g.group.c_str(), g.T,
                g.episodes, g.mean_regret, g.se_regret, g.mean_bound, g.mean_regret / g.mean_bound,
                g.bound_ok ? "ok" : "ABOVE BOUND");
    for (const auto& [name, f] : g.families) {
      if (f.violations == 0) continue;
      std::printf("  %s: %ld of %ld checks failed, first at round %ld of episode %ld\n", name.c_str(), f.violations,
                  f.checks, f.first_round, f.first_episode);
    }
  }
  for (const auto& t : rep.trends) {
    std::printf("trend %s (%s):", t.group.c_str(), t.source.c_str());
    for (double r : t.ratios) std::printf(" %.3f", r);
    std::printf(" max %.2f %s\n", t.max_ratio, t.ok ? "ok" : "FAILED");
  }
  for (const auto& e : rep.errors) std::printf("error: %s\n", e.c_str());
  std::printf("%s\n", rep.pass() ? "PASS" : "FAIL");
}

int list_fixtures() {
  const fs::path dir = bench::fixture_dir() / "games";
  std::vector<fs::path> files;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      const pm::PmGame g = pm::load_game(f);
      const pm::GameGeometry geo = pm::analyze_geometry(g);
      std::printf("%-16s k=%zu d=%zu model=%s pareto=%zu neighbors=%zu\n", f.stem().c_str(), g.k, g.d,
                  g.model ? pm::to_string(*g.model) : "-", geo.pareto.size(), geo.neighbors.size());
    } catch (const std::exception& e) {
      std::printf("%-16s rejected: %s\n", f.stem().c_str(), e.what());
    }
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse and partial-monitoring bandit benchmark"};
  app.require_subcommand(1);

  std::string config_path, trace_dir, out_dir;
  std::size_t seeds = 0;
  int parallel = 0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seeds", seeds, "episodes 0..N-1 instead of the configured seeds");
  run->add_option("--parallel", parallel, "worker threads");
  run->add_option("--out", out_dir, "output directory");

  auto* certify = app.add_subcommand("certify", "re-check every trace in a directory");
  certify->add_option("trace-dir", trace_dir, "directory with trace CSV/JSON pairs")->required();
  certify->add_option("--out", out_dir, "write summary.json and summary_long.csv here");

  app.add_subcommand("list-fixtures", "list shipped game fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitConfig;
  }

  if (app.got_subcommand("list-fixtures")) return list_fixtures();

  if (run->parsed()) {
    bench::ExperimentConfig cfg;
    try {
      cfg = bench::load_config(config_path);
      if (seeds > 0) bench::override_seed_count(cfg, seeds);
      if (parallel > 0) cfg.parallel = parallel;
      if (!out_dir.empty()) cfg.out = out_dir;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitConfig;
    }
    try {
      const bench::RunOutcome res = bench::run_experiment(cfg);
      print_report(res.report);
      std::printf("wrote %s (%.1f s)\n", cfg.out.string().c_str(), res.wall_seconds);
      return res.report.pass() ? kExitPass : kExitCertificate;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "run failed: %s\n", e.what());
      return kExitConfig;
    }
  }

  try {
    const bench::SummaryReport rep = bench::certify_traces(trace_dir);
    if (!out_dir.empty()) bench::write_report(rep, out_dir);
    print_report(rep);
    return rep.pass() ? kExitPass : kExitCertificate;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "certify failed: %s\n", e.what());
    return kExitConfig;
  }
}
