#pragma once

#include <optional>
#include <string>

#include "irhc/analysis.hpp"
#include "irhc/controller.hpp"

namespace irhc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlantConfig {
  std::string preset = "oscillator";  // "oscillator" | "scalar_linear"
  double dt = 0.05;
  IntegrationMethod method = IntegrationMethod::rk4;
  double a = 0.5;  // scalar_linear: x(k+1) = a·x + b·u
  double b = 1.0;
};

DiscreteSystem make_system(const PlantConfig& cfg);

struct ControllerBlock {
  std::string mode = "irhc";  // irhc | rhc | proportional | feedback
  bool itec = true;           // irhc only: ITEC vs. plain contractive variant
  double beta = 0.8;
  double C = 4.8;
  int N = 4;
  int horizon = 0;  // rhc only; 0 means 2N
  int max_steps = 400;
  double convergence_eps = 1e-3;
  double divergence_factor = 10.0;
};

struct CertifyBlock {
  double beta = 0.8;
  int N = 4;
  double C = 4.8;
  double sigma_cap = 1e6;
  double ball_radius = 1.0;
  int directions = 32;
  int radii = 3;
  bool include_x0 = true;
};

struct CheckBoundsBlock {
  std::string trace;        // trace CSV produced by simulate
  std::string certificate;  // certificate JSON produced by certify
};

struct ExperimentConfig {
  PlantConfig plant;
  Vector x0;
  ControllerBlock controller;
  InputSet input_set;
  SolverConfig solver;
  std::optional<CertifyBlock> certify;
  std::optional<CheckBoundsBlock> check_bounds;
};

/// Parses and validates one experiment config document. Throws
/// ConfigError on any malformed or out-of-range field.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace irhc
