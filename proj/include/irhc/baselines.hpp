#pragma once

#include "irhc/controller.hpp"

namespace irhc {

/// u = −3·x₂ for the two-dimensional oscillator benchmark.
Vector static_feedback(const Vector& x);

/// Step-wise receding horizon control with a fixed horizon and no
/// endpoint constraints; shares the solver and warm-start policy of the
/// interval-wise controller.
class TraditionalRhc {
 public:
  TraditionalRhc(const DiscreteSystem& system, int horizon, InputSet input_set = {},
                 SolverConfig solver = {});

  Vector step(const Vector& x_k, StepRow& row);
  void reset();

 private:
  const DiscreteSystem* system_;
  int horizon_;
  InputSet input_set_;
  SolverConfig solver_;
  std::vector<Vector> warm_;
};

/// Step-wise RHC of horizon N that proportionally allocates the energy
/// budget: a horizon tail overlapping the first j steps of an upcoming
/// ITEC window gets budget j·C/N; once the window head is behind the
/// current step the budget is C minus the energy already spent.
class ProportionalItecRhc {
 public:
  ProportionalItecRhc(const DiscreteSystem& system, ItecSpec itec,
                      InputSet input_set = {}, SolverConfig solver = {});

  Vector step(const Vector& x_k, StepRow& row);
  void reset();

  /// The quadratic budget imposed at step k, with the window offsets it
  /// covers; no window overlap yields no constraint.
  std::optional<EnergyWindow> budget_at(int k) const;

 private:
  const DiscreteSystem* system_;
  ItecSpec itec_;
  InputSet input_set_;
  SolverConfig solver_;
  std::vector<Vector> warm_;
  int k_ = 0;
  int p_ = 0;          // start of the active/next ITEC window
  double gamma_ = 0.0; // energy spent in the active window
};

}  // namespace irhc
