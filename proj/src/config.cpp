#include "irhc/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace irhc {

using nlohmann::json;

DiscreteSystem make_system(const PlantConfig& cfg) {
  if (cfg.preset == "oscillator") {
    return DiscreteSystem(make_oscillator(), DiscretizerConfig{cfg.dt, cfg.method});
  }
  if (cfg.preset == "scalar_linear") {
    return DiscreteSystem::scalar_linear(cfg.a, cfg.b);
  }
  throw ConfigError("unknown plant preset: " + cfg.preset);
}

namespace {

Vector parse_vector(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty number array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number array");
    v[i] = j[i].get<double>();
  }
  return v;
}

PlantConfig parse_plant(const json& j) {
  PlantConfig p;
  p.preset = j.value("preset", p.preset);
  p.dt = j.value("dt", p.dt);
  if (p.dt <= 0.0) throw ConfigError("plant.dt must be positive");
  const std::string method = j.value("method", std::string("rk4"));
  if (method == "rk4") {
    p.method = IntegrationMethod::rk4;
  } else if (method == "euler") {
    p.method = IntegrationMethod::euler;
  } else {
    throw ConfigError("plant.method must be rk4 or euler");
  }
  p.a = j.value("a", p.a);
  p.b = j.value("b", p.b);
  return p;
}

ControllerBlock parse_controller(const json& j) {
  ControllerBlock c;
  c.mode = j.value("mode", c.mode);
  if (c.mode != "irhc" && c.mode != "rhc" && c.mode != "proportional" &&
      c.mode != "feedback") {
    throw ConfigError("controller.mode must be irhc, rhc, proportional or feedback");
  }
  c.itec = j.value("itec", c.itec);
  c.beta = j.value("beta", c.beta);
  if (c.beta < 0.0 || c.beta >= 1.0) throw ConfigError("controller.beta must lie in [0,1)");
  c.C = j.value("C", c.C);
  if (c.C < 0.0) throw ConfigError("controller.C must be >= 0");
  c.N = j.value("N", c.N);
  if (c.N < 1) throw ConfigError("controller.N must be >= 1");
  c.horizon = j.value("horizon", c.horizon);
  c.max_steps = j.value("max_steps", c.max_steps);
  if (c.max_steps < 1) throw ConfigError("controller.max_steps must be >= 1");
  c.convergence_eps = j.value("convergence_eps", c.convergence_eps);
  c.divergence_factor = j.value("divergence_factor", c.divergence_factor);
  return c;
}

InputSet parse_input_set(const json& j) {
  const std::string kind = j.value("kind", std::string("unbounded"));
  if (kind == "unbounded") return InputSet::unbounded();
  if (kind == "box") {
    if (!j.contains("lower") || !j.contains("upper")) {
      throw ConfigError("box input set needs lower and upper");
    }
    try {
      return InputSet::box(parse_vector(j["lower"]), parse_vector(j["upper"]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("input_set.kind must be unbounded or box");
}

SolverConfig parse_solver(const json& j) {
  SolverConfig s;
  s.feas_tol = j.value("feas_tol", s.feas_tol);
  s.grad_tol = j.value("grad_tol", s.grad_tol);
  s.max_outer = j.value("max_outer", s.max_outer);
  s.max_inner = j.value("max_inner", s.max_inner);
  s.restarts = j.value("restarts", s.restarts);
  s.seed = j.value("seed", s.seed);
  if (s.feas_tol <= 0.0 || s.grad_tol <= 0.0 || s.max_outer < 1 || s.max_inner < 1 ||
      s.restarts < 0) {
    throw ConfigError("invalid solver block");
  }
  return s;
}

CertifyBlock parse_certify(const json& j) {
  CertifyBlock c;
  c.beta = j.value("beta", c.beta);
  c.N = j.value("N", c.N);
  c.C = j.value("C", c.C);
  c.sigma_cap = j.value("sigma_cap", c.sigma_cap);
  c.ball_radius = j.value("ball_radius", c.ball_radius);
  c.directions = j.value("directions", c.directions);
  c.radii = j.value("radii", c.radii);
  c.include_x0 = j.value("include_x0", c.include_x0);
  if (c.beta < 0.0 || c.beta >= 1.0 || c.N < 1 || c.C < 0.0 || c.sigma_cap <= 0.0 ||
      c.ball_radius <= 0.0 || c.directions < 1 || c.radii < 1) {
    throw ConfigError("invalid certify block");
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    if (j.contains("plant")) cfg.plant = parse_plant(j["plant"]);
    if (j.contains("x0")) cfg.x0 = parse_vector(j["x0"]);
    if (j.contains("controller")) cfg.controller = parse_controller(j["controller"]);
    if (j.contains("input_set")) cfg.input_set = parse_input_set(j["input_set"]);
    if (j.contains("solver")) cfg.solver = parse_solver(j["solver"]);
    if (j.contains("certify")) cfg.certify = parse_certify(j["certify"]);
    if (j.contains("check_bounds")) {
      CheckBoundsBlock cb;
      cb.trace = j["check_bounds"].value("trace", std::string());
      cb.certificate = j["check_bounds"].value("certificate", std::string());
      if (cb.trace.empty() || cb.certificate.empty()) {
        throw ConfigError("check_bounds block needs trace and certificate paths");
      }
      cfg.check_bounds = cb;
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace irhc
