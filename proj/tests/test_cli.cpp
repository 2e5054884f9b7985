#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "irhc/analysis.hpp"
#include "irhc/cli.hpp"

using namespace irhc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() / ("irhc_cli_test_" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ostringstream ss;
  ss << std::ifstream(p).rdbuf();
  return ss.str();
}

json itec_config(int max_steps) {
  return json{
      {"plant", {{"preset", "oscillator"}, {"dt", 0.05}, {"method", "rk4"}}},
      {"x0", {2.0, -1.0}},
      {"controller",
       {{"mode", "irhc"}, {"itec", true}, {"beta", 0.8}, {"C", 4.8}, {"N", 4},
        {"max_steps", max_steps}}},
      {"solver", {{"feas_tol", 1e-6}, {"grad_tol", 1e-6}}},
  };
}

}  // namespace

TEST_CASE("cmd_simulate writes trace and summary") {
  const fs::path dir = temp_dir();
  const fs::path cfg = write_config(dir, "cfg.json", itec_config(20));
  CHECK(cmd_simulate(cfg.string(), (dir / "out").string()) == kExitOk);

  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["steps"].get<int>() == 20);
  CHECK(summary["total_cost"].get<double>() > 0.0);
  CHECK_FALSE(summary["aborted"].get<bool>());
  for (double e : summary["itec_window_energies"]) CHECK(e <= 4.8 + 1e-6);

  // trace round-trips through the analysis-side parser
  const RunRecord rec = RunRecord::from_csv(slurp(dir / "out" / "trace.csv"));
  CHECK(rec.steps == 20);
  CHECK(rec.total_cost == doctest::Approx(summary["total_cost"].get<double>()));
}

TEST_CASE("configuration errors exit with code 2") {
  const fs::path dir = temp_dir();

  json bad = itec_config(0);  // empty run disallowed
  const fs::path cfg0 = write_config(dir, "zero.json", bad);
  CHECK(cmd_simulate(cfg0.string(), (dir / "o1").string()) == kExitConfig);

  json badbeta = itec_config(10);
  badbeta["controller"]["beta"] = 1.5;
  const fs::path cfg1 = write_config(dir, "beta.json", badbeta);
  CHECK(cmd_simulate(cfg1.string(), (dir / "o2").string()) == kExitConfig);

  CHECK(cmd_simulate((dir / "missing.json").string(), (dir / "o3").string()) ==
        kExitConfig);

  std::ofstream(dir / "garbage.json") << "{not json";
  CHECK(cmd_simulate((dir / "garbage.json").string(), (dir / "o4").string()) ==
        kExitConfig);
}

TEST_CASE("rhc with horizon 10 is flagged divergent") {
  const fs::path dir = temp_dir();
  // the state crosses the 10x divergence threshold around step 530
  json cfg = itec_config(1000);
  cfg["controller"]["mode"] = "rhc";
  cfg["controller"]["N"] = 5;  // horizon defaults to 2N = 10
  const fs::path p = write_config(dir, "rhc5.json", cfg);
  CHECK(cmd_simulate(p.string(), (dir / "out").string()) == kExitOk);
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["diverged"].get<bool>());
}

TEST_CASE("certify + check-bounds round trip") {
  const fs::path dir = temp_dir();

  // Cheap scalar-linear setting so the full pipeline runs fast.
  json cfg = {
      {"plant", {{"preset", "scalar_linear"}, {"a", 0.9}, {"b", 1.0}}},
      {"x0", {1.0}},
      {"controller",
       {{"mode", "irhc"}, {"itec", true}, {"beta", 0.8}, {"C", 2.0}, {"N", 3},
        {"max_steps", 24}, {"convergence_eps", 0.0}}},
      {"certify",
       {{"beta", 0.8}, {"N", 3}, {"C", 2.0}, {"ball_radius", 1.0}, {"directions", 4},
        {"radii", 2}}},
  };
  const fs::path p = write_config(dir, "cfg.json", cfg);
  REQUIRE(cmd_simulate(p.string(), (dir / "run").string()) == kExitOk);
  REQUIRE(cmd_certify(p.string(), (dir / "cert").string()) == kExitOk);

  const json cert = json::parse(slurp(dir / "cert" / "certificate.json"));
  CHECK(cert["all_feasible"].get<bool>());
  CHECK(cert["sigma"].get<double>() > 0.0);

  json cb = cfg;
  cb["check_bounds"] = {{"trace", (dir / "run" / "trace.csv").string()},
                        {"certificate", (dir / "cert" / "certificate.json").string()}};
  const fs::path pcb = write_config(dir, "cb.json", cb);
  REQUIRE(cmd_check_bounds(pcb.string(), (dir / "report").string()) == kExitOk);
  const json rep = json::parse(slurp(dir / "report" / "bounds_report.json"));
  CHECK(rep.contains("checks"));
  CHECK(rep["gamma_values"].size() >= 4);
}

TEST_CASE("table1 artifacts are byte-identical across reruns") {
  const fs::path dir = temp_dir();
  json cfg = itec_config(40);  // reduced-horizon determinism check
  const fs::path p = write_config(dir, "t1.json", cfg);
  REQUIRE(cmd_table1(p.string(), (dir / "a").string(), 7) == kExitOk);
  REQUIRE(cmd_table1(p.string(), (dir / "b").string(), 7) == kExitOk);
  CHECK(slurp(dir / "a" / "table1.csv") == slurp(dir / "b" / "table1.csv"));
  CHECK(slurp(dir / "a" / "table1.md") == slurp(dir / "b" / "table1.md"));
  CHECK_FALSE(slurp(dir / "a" / "table1.csv").empty());
}

TEST_CASE("certify requires its config block") {
  const fs::path dir = temp_dir();
  const fs::path p = write_config(dir, "nocert.json", itec_config(10));
  CHECK(cmd_certify(p.string(), (dir / "out").string()) == kExitConfig);
}
