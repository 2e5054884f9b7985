#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "irhc/plant.hpp"
#include "irhc/trajopt.hpp"

namespace irhc {

/// Interval-wise total energy constraint: Σ‖u(j)‖² ≤ C over every window
/// [(2p−1)N, 2pN−1], p = 1, 2, … (first window starts at k = N).
struct ItecSpec {
  double C = 0.0;
  int N = 1;
};

enum class ControllerMode { itec, non_itec };

/// Bookkeeping of the interval-wise receding horizon algorithm.
struct ControllerState {
  int k = 0;          // step index
  int h = 0;          // horizon length at the next solve
  double gamma = 0.0; // energy spent in the active ITEC window
  int i = 0;          // contraction exponent counter
  int f = 0;          // window-position flag (trace fidelity only)
  int p = 0;          // start index of the active/next ITEC window
  double x0_norm_sq = 0.0;
  double beta = 0.0;
  ItecSpec itec;
  ControllerMode mode = ControllerMode::itec;
};

struct StepRow {
  int k = 0;
  Vector x;               // measured state at the solve
  Vector u;               // applied control
  int h = 0;              // horizon at the solve
  double gamma = 0.0;     // energy tracker at the solve
  int i = 0;              // exponent counter at the solve
  double terminal_bound = 0.0;  // +inf when no terminal constraint
  std::string solver_status;
  double stage_cost = 0.0;  // ‖x(k+1)‖² + ‖u(k)‖²
};

struct RunRecord {
  std::vector<StepRow> rows;
  Vector x_final;
  double total_cost = 0.0;
  int steps = 0;
  bool converged = false;
  bool diverged = false;
  bool aborted = false;
  int abort_step = -1;
  std::string abort_reason;

  std::vector<Vector> applied_controls() const;
  /// Applied energy of every completed ITEC window [(2p−1)N, 2pN−1].
  std::vector<double> itec_window_energies(int N) const;

  std::string to_csv() const;
  static RunRecord from_csv(const std::string& csv);
};

/// Raised when a horizon solve comes back infeasible mid-run.
class ControllerError : public std::runtime_error {
 public:
  ControllerError(int step, Vector last_state, const std::string& what)
      : std::runtime_error(what), step_(step), last_state_(std::move(last_state)) {}
  int step() const { return step_; }
  const Vector& last_state() const { return last_state_; }

 private:
  int step_;
  Vector last_state_;
};

struct ControllerConfig {
  ControllerMode mode = ControllerMode::itec;
  double beta = 0.8;
  ItecSpec itec;
  InputSet input_set;
  SolverConfig solver;
  double convergence_eps = 1e-3;
  double divergence_factor = 10.0;
};

/// IRHC with contractive terminal constraints. The horizon starts at 2N,
/// shrinks to N+1, then is pushed N steps ahead so the active ITEC window
/// always sits entirely inside it. The terminal bound β^{i+1}‖x(0)‖² is
/// anchored to the initial state for the whole run.
class IrhcController {
 public:
  IrhcController(const DiscreteSystem& system, ControllerConfig cfg);

  ControllerState init(const Vector& x0);

  HorizonProblem build_problem(const ControllerState& state, const Vector& x_k) const;

  /// Solve, apply the first control, advance the schedule. Throws
  /// ControllerError when the solve is infeasible.
  Vector step(ControllerState& state, const Vector& x_k, StepRow& row);

  RunRecord run(const Vector& x0, int max_steps);

  const ControllerConfig& config() const { return cfg_; }

 private:
  const DiscreteSystem* system_;
  ControllerConfig cfg_;
  std::vector<Vector> warm_;
};

/// Generic closed-loop driver: policy(k, x, row) returns the control to
/// apply; rows are appended until convergence, divergence, max_steps or a
/// ControllerError abort.
using StepPolicy = std::function<Vector(int k, const Vector& x, StepRow& row)>;

RunRecord run_closed_loop(const DiscreteSystem& system, const StepPolicy& policy,
                          const Vector& x0, int max_steps, double convergence_eps,
                          double divergence_factor);

}  // namespace irhc
