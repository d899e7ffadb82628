#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "spa/trace.hpp"

using namespace spa;

namespace {

RegretTrace sample_trace() {
  RegretTrace tr;
  tr.kind = "mab";
  tr.algo = "SparseBobw";
  tr.env = "adversarial-sparse(s=2, symmetric, random)";
  tr.group = "g";
  tr.config_hash = "abc";
  tr.k = 3;
  tr.T = 2;
  tr.master_seed = 18446744073709551615ull;
  tr.episode = 4;
  tr.bound_kind = "bobw-adversarial";
  tr.beta_final = 0.1 + 0.2;
  tr.rows.push_back(TraceRow{1, 2, -0.75, 0.125, 45.0, 1.0986122886681098, 1.0 / 3.0, true, false, true});
  tr.rows.push_back(TraceRow{2, 0, 0.0, 0.0, 46.5, 1.0, 0.0, true, true, true});
  tr.totals = {{"l2", 1.5}, {"final_regret", -2.0}};
  tr.params = {{"delta_min", 0.0}, {"inf", std::numeric_limits<double>::infinity()}};
  tr.certificates = {{"theorem_bound", 12.0}};
  tr.record("s1", true, 1);
  tr.record("s1", false, 2);
  return tr;
}

}  // namespace

TEST_CASE("trace survives a serialization round trip bit for bit") {
  const RegretTrace tr = sample_trace();
  const RegretTrace back = parse_trace(trace_csv(tr), trace_sidecar_json(tr));
  CHECK(back == tr);
  CHECK(trace_csv(back) == trace_csv(tr));
}

TEST_CASE("violations remember the first failing round") {
  RegretTrace tr = sample_trace();
  CHECK(tr.checks.at("s1") == 2);
  CHECK(tr.violations.at("s1") == 1);
  CHECK(tr.first_violation.at("s1") == 2);
  CHECK(tr.total_violations() == 1);
}

TEST_CASE("trace with another format version is rejected") {
  RegretTrace tr = sample_trace();
  std::string side = trace_sidecar_json(tr);
  const auto pos = side.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  side.replace(pos, 19, "\"format_version\": 2");
  CHECK_THROWS_AS(parse_trace(trace_csv(tr), side), TraceFormatError);
}

TEST_CASE("malformed csv rows are rejected") {
  const RegretTrace tr = sample_trace();
  std::string csv = trace_csv(tr);
  CHECK_THROWS_AS(parse_trace("t,A_t\n", trace_sidecar_json(tr)), TraceFormatError);
  CHECK_THROWS_AS(parse_trace(csv + "3,1,0\n", trace_sidecar_json(tr)), TraceFormatError);
  CHECK_THROWS_AS(parse_trace(csv + "3,1,0,0,1,1,0,1,1,1\n", trace_sidecar_json(tr)), TraceFormatError);
}

TEST_CASE("trace directories are read in file-name order") {
  const auto dir = std::filesystem::temp_directory_path() / "spa_trace_dir_test";
  std::filesystem::remove_all(dir);
  RegretTrace a = sample_trace();
  RegretTrace b = sample_trace();
  b.episode = 9;
  write_trace(b, dir / "nested", "z");
  write_trace(a, dir, "a");
  const auto all = read_trace_dir(dir);
  REQUIRE(all.size() == 2);
  CHECK(all[0] == a);
  CHECK(all[1] == b);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_trace_dir(dir), TraceFormatError);
}

TEST_CASE("doubles print with round-trip precision") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
}
