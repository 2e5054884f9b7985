#include <CLI11.hpp>

#include "irhc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Interval-wise receding horizon control experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the solver seed");
  };

  auto* sim = app.add_subcommand("simulate", "run the configured controller");
  auto* cert = app.add_subcommand("certify", "empirical stabilizability certificate");
  auto* tab = app.add_subcommand("table1", "benchmark cost table");
  auto* chk = app.add_subcommand("check-bounds", "gamma diagnostics on a trace");
  for (auto* sub : {sim, cert, tab, chk}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return irhc::cmd_simulate(config_path, out_dir, seed);
  if (cert->parsed()) return irhc::cmd_certify(config_path, out_dir, seed);
  if (tab->parsed()) return irhc::cmd_table1(config_path, out_dir, seed);
  if (chk->parsed()) return irhc::cmd_check_bounds(config_path, out_dir, seed);
  return irhc::kExitConfig;
}
