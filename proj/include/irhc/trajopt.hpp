#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irhc/plant.hpp"

namespace irhc {

enum class InputSetKind { unbounded, box };

/// Admissible input set U. Box sets must contain the origin so that
/// zero-padded control sequences stay admissible.
struct InputSet {
  InputSetKind kind = InputSetKind::unbounded;
  Vector lower;
  Vector upper;

  static InputSet unbounded() { return {}; }
  static InputSet box(Vector lo, Vector hi);

  Vector project(const Vector& u) const;
  /// Componentwise exceedance, 0 inside the set.
  double violation(const Vector& u) const;
};

/// ITEC window inside one horizon problem. Offsets index the control
/// sequence relative to the current step; both ends inclusive.
struct EnergyWindow {
  int start_offset = 0;
  int end_offset = 0;
  double budget = 0.0;
};

/// One finite-horizon constrained optimization instance:
///   minimize Σ_{j=1..h} ‖x(j)‖² + ‖u(j−1)‖²
///   s.t.     dynamics rollout from x_init, u(j) ∈ U,
///            Σ_{window} ‖u(j)‖² ≤ budget          (if energy_window)
///            ‖x(h)‖² ≤ terminal_bound             (if terminal_bound)
struct HorizonProblem {
  Vector x_init;
  int horizon = 1;
  const DiscreteSystem* system = nullptr;
  InputSet input_set;
  std::optional<EnergyWindow> energy_window;
  std::optional<double> terminal_bound;

  void validate() const;
};

struct SolverConfig {
  double feas_tol = 1e-6;   // absolute, on squared-norm residuals
  double grad_tol = 1e-6;   // projected-gradient stationarity
  int max_outer = 200;
  int max_inner = 500;
  int restarts = 0;         // seeded random restarts (certifier only)
  std::uint64_t seed = 0;
};

enum class SolveStatus { optimal, feasible_suboptimal, infeasible, max_iter };

std::string to_string(SolveStatus s);

struct ConstraintResidual {
  std::string id;
  double residual;  // max(0, g)
};

struct SolveResult {
  std::vector<Vector> controls;
  double cost = 0.0;
  double max_constraint_violation = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;

  bool feasible() const {
    return status == SolveStatus::optimal || status == SolveStatus::feasible_suboptimal;
  }
};

/// Rollout cost and per-constraint residuals of a candidate control sequence.
std::pair<double, std::vector<ConstraintResidual>> evaluate(
    const HorizonProblem& problem, const std::vector<Vector>& controls);

/// Gradient of the rollout cost w.r.t. all control entries, stacked
/// step-major (adjoint backward sweep).
Vector gradient(const HorizonProblem& problem, const std::vector<Vector>& controls);

/// Augmented-Lagrangian single-shooting solve. Deterministic given
/// identical inputs and configuration.
SolveResult solve(const HorizonProblem& problem, const SolverConfig& config = {},
                  const std::vector<Vector>& warm_start = {});

}  // namespace irhc
