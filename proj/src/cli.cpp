#include "irhc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "irhc/baselines.hpp"

namespace irhc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json summary_json(const ExperimentConfig& cfg, const RunRecord& rec) {
  json s;
  s["mode"] = cfg.controller.mode;
  s["total_cost"] = rec.total_cost;
  s["steps"] = rec.steps;
  s["converged"] = rec.converged;
  s["diverged"] = rec.diverged;
  s["aborted"] = rec.aborted;
  if (rec.aborted) {
    s["abort_step"] = rec.abort_step;
    s["abort_reason"] = rec.abort_reason;
  }
  if (rec.x_final.size() > 0) s["final_state"] = vector_to_json(rec.x_final);
  s["itec_window_energies"] = rec.itec_window_energies(cfg.controller.N);
  return s;
}

ExperimentConfig with_seed(ExperimentConfig cfg, std::optional<std::uint64_t> seed) {
  if (seed) cfg.solver.seed = *seed;
  return cfg;
}

Certificate certificate_from_json(const json& j) {
  Certificate c;
  c.beta = j.at("beta").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.N = j.at("N").get<int>();
  c.C = j.at("C").get<double>();
  c.ball_radius = j.at("ball_radius").get<double>();
  c.all_feasible = j.at("all_feasible").get<bool>();
  if (j.contains("sample_states")) {
    for (const auto& s : j["sample_states"]) {
      Vector v(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i].get<double>();
      c.sample_states.push_back(std::move(v));
    }
  }
  return c;
}

json certificate_to_json(const Certificate& c) {
  json j;
  j["beta"] = c.beta;
  j["sigma"] = c.sigma;
  j["N"] = c.N;
  j["C"] = c.C;
  j["ball_radius"] = c.ball_radius;
  j["all_feasible"] = c.all_feasible;
  j["sigma_note"] = "sigma estimated empirically from the sampled states; "
                    "not a reported constant";
  json samples = json::array();
  for (const auto& s : c.sample_states) samples.push_back(vector_to_json(s));
  j["sample_states"] = std::move(samples);
  return j;
}

std::string fmt_cost(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
  if (cfg.x0.size() == 0) throw ConfigError("missing x0");
  const DiscreteSystem system = make_system(cfg.plant);
  if (cfg.x0.size() != system.state_dim()) throw ConfigError("x0 dimension mismatch");
  const auto& cb = cfg.controller;

  if (cb.mode == "irhc") {
    ControllerConfig cc;
    cc.mode = cb.itec ? ControllerMode::itec : ControllerMode::non_itec;
    cc.beta = cb.beta;
    cc.itec = ItecSpec{cb.C, cb.N};
    cc.input_set = cfg.input_set;
    cc.solver = cfg.solver;
    cc.convergence_eps = cb.convergence_eps;
    cc.divergence_factor = cb.divergence_factor;
    IrhcController ctrl(system, cc);
    return ctrl.run(cfg.x0, cb.max_steps);
  }
  if (cb.mode == "rhc") {
    const int horizon = cb.horizon > 0 ? cb.horizon : 2 * cb.N;
    TraditionalRhc rhc(system, horizon, cfg.input_set, cfg.solver);
    return run_closed_loop(
        system,
        [&rhc](int k, const Vector& x, StepRow& row) {
          row.k = k;
          return rhc.step(x, row);
        },
        cfg.x0, cb.max_steps, cb.convergence_eps, cb.divergence_factor);
  }
  if (cb.mode == "proportional") {
    ProportionalItecRhc prop(system, ItecSpec{cb.C, cb.N}, cfg.input_set, cfg.solver);
    return run_closed_loop(
        system,
        [&prop](int, const Vector& x, StepRow& row) { return prop.step(x, row); },
        cfg.x0, cb.max_steps, cb.convergence_eps, cb.divergence_factor);
  }
  if (cb.mode == "feedback") {
    return run_closed_loop(
        system,
        [](int k, const Vector& x, StepRow& row) {
          row.k = k;
          row.x = x;
          row.terminal_bound = std::numeric_limits<double>::infinity();
          row.solver_status = "closed_form";
          row.u = static_feedback(x);
          return row.u;
        },
        cfg.x0, cb.max_steps, cb.convergence_eps, cb.divergence_factor);
  }
  throw ConfigError("unknown controller mode: " + cb.mode);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg;
  try {
    cfg = with_seed(load_config(config_path), seed);
    if (cfg.x0.size() == 0) throw ConfigError("missing x0");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  RunRecord rec;
  try {
    rec = run_experiment(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitSolver;
  }
  const fs::path out(out_dir);
  write_file(out / "trace.csv", rec.to_csv());
  write_file(out / "summary.json", summary_json(cfg, rec).dump(2) + "\n");
  std::cout << "steps=" << rec.steps << " total_cost=" << rec.total_cost
            << " converged=" << rec.converged << " diverged=" << rec.diverged << "\n";
  return rec.aborted ? kExitSolver : kExitOk;
}

int cmd_certify(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg;
  try {
    cfg = with_seed(load_config(config_path), seed);
    if (!cfg.certify) throw ConfigError("missing certify block");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto& cb = *cfg.certify;
  try {
    const DiscreteSystem system = make_system(cfg.plant);
    std::vector<Vector> samples = sample_ball(system.state_dim(), cb.ball_radius,
                                              cb.directions, cb.radii, cfg.solver.seed);
    if (cb.include_x0 && cfg.x0.size() == system.state_dim() && cfg.x0.norm() > 0.0) {
      samples.push_back(cfg.x0);
    }
    Certificate cert;
    cert.beta = cb.beta;
    cert.N = cb.N;
    cert.C = cb.C;
    cert.ball_radius = cb.ball_radius;
    cert.sample_states = samples;
    cert.sigma = estimate_sigma(system, samples, cb.beta, cb.N, cb.C, cfg.input_set,
                                cfg.solver, cb.sigma_cap);
    cert.all_feasible = true;
    write_file(fs::path(out_dir) / "certificate.json",
               certificate_to_json(cert).dump(2) + "\n");
    std::cout << "sigma=" << cert.sigma << " samples=" << samples.size() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return kExitSolver;
  }
}

int cmd_table1(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed) {
  ExperimentConfig base;
  try {
    base = with_seed(load_config(config_path), seed);
    if (base.x0.size() == 0) throw ConfigError("missing x0");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  struct Cell {
    std::string label;
    int N;
    std::string paper;
    ExperimentConfig cfg;
  };
  auto make_cell = [&base](const std::string& mode, int N, double beta, bool itec) {
    ExperimentConfig c = base;
    c.controller.mode = mode;
    c.controller.N = N;
    c.controller.beta = beta;
    c.controller.itec = itec;
    c.controller.horizon = 0;
    return c;
  };
  std::vector<Cell> cells = {
      {"u=-3x2", 4, "325.4", make_cell("feedback", 4, 0.8, false)},
      {"RHC", 4, "437.2", make_cell("rhc", 4, 0.8, false)},
      {"RHC", 5, "Unstable", make_cell("rhc", 5, 0.8, false)},
      {"IRHC(beta=0.8)", 4, "412.9", make_cell("irhc", 4, 0.8, false)},
      {"IRHC(beta=0.8)", 5, "539.4", make_cell("irhc", 5, 0.8, false)},
      {"IRHC(beta=0.2)", 4, "3947", make_cell("irhc", 4, 0.2, false)},
      {"IRHC(beta=0.2)", 5, "2053", make_cell("irhc", 5, 0.2, false)},
  };

  std::ostringstream csv, md;
  csv << "controller,N,cost,status,paper_cost\n";
  md << "| controller | N | cost | status | paper |\n|---|---|---|---|---|\n";
  bool any_abort = false;
  for (auto& cell : cells) {
    RunRecord rec;
    try {
      rec = run_experiment(cell.cfg);
    } catch (const std::exception& e) {
      std::cerr << "table1 cell " << cell.label << " N=" << cell.N << " failed: "
                << e.what() << "\n";
      return kExitSolver;
    }
    any_abort = any_abort || rec.aborted;
    const std::string status =
        rec.diverged ? "Unstable" : (rec.aborted ? "aborted" : "stable");
    const std::string cost = rec.diverged ? "Unstable" : fmt_cost(rec.total_cost);
    csv << cell.label << ',' << cell.N << ',' << cost << ',' << status << ','
        << cell.paper << '\n';
    md << "| " << cell.label << " | " << cell.N << " | " << cost << " | " << status
       << " | " << cell.paper << " |\n";
  }
  const fs::path out(out_dir);
  write_file(out / "table1.csv", csv.str());
  write_file(out / "table1.md", md.str());
  std::cout << csv.str();
  return any_abort ? kExitSolver : kExitOk;
}

int cmd_check_bounds(const std::string& config_path, const std::string& out_dir,
                     std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg;
  try {
    cfg = with_seed(load_config(config_path), seed);
    if (!cfg.check_bounds) throw ConfigError("missing check_bounds block");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const DiscreteSystem system = make_system(cfg.plant);
    const RunRecord rec = RunRecord::from_csv(read_file(cfg.check_bounds->trace));
    const Certificate cert =
        certificate_from_json(json::parse(read_file(cfg.check_bounds->certificate)));
    const BoundsReport rep = check_bounds(rec, system, cert);

    json j;
    j["sigma"] = cert.sigma;
    j["beta"] = cert.beta;
    j["N"] = cert.N;
    j["bound"] = rep.gammas.bound;
    j["truncated_cost"] = rep.truncated_cost;
    j["gamma_values"] = rep.gammas.values;
    j["all_pass"] = rep.all_pass;
    json checks = json::array();
    for (const auto& c : rep.checks) {
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}});
    }
    j["checks"] = std::move(checks);
    write_file(fs::path(out_dir) / "bounds_report.json", j.dump(2) + "\n");
    for (const auto& c : rep.checks) {
      std::cout << (c.pass ? "pass " : "FAIL ") << c.name << " margin=" << c.margin
                << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "check-bounds failed: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace irhc
