#include "irhc/baselines.hpp"

#include <cmath>
#include <limits>

namespace irhc {

Vector static_feedback(const Vector& x) {
  if (x.size() != 2) throw std::invalid_argument("static_feedback: expects a 2-state plant");
  Vector u(1);
  u[0] = -3.0 * x[1];
  return u;
}

TraditionalRhc::TraditionalRhc(const DiscreteSystem& system, int horizon,
                               InputSet input_set, SolverConfig solver)
    : system_(&system),
      horizon_(horizon),
      input_set_(std::move(input_set)),
      solver_(solver) {
  if (horizon < 1) throw std::invalid_argument("rhc: horizon must be >= 1");
  reset();
}

void TraditionalRhc::reset() {
  warm_.assign(horizon_, Vector::Zero(system_->input_dim()));
}

Vector TraditionalRhc::step(const Vector& x_k, StepRow& row) {
  HorizonProblem P;
  P.x_init = x_k;
  P.horizon = horizon_;
  P.system = system_;
  P.input_set = input_set_;
  const SolveResult res = solve(P, solver_, warm_);

  row.x = x_k;
  row.h = horizon_;
  row.terminal_bound = std::numeric_limits<double>::infinity();
  row.solver_status = to_string(res.status);
  if (!res.feasible()) {
    throw ControllerError(row.k, x_k, "rhc: infeasible solve");
  }
  row.u = res.controls.front();

  // Fixed horizon: shift and append one zero control.
  warm_.assign(res.controls.begin() + 1, res.controls.end());
  warm_.push_back(Vector::Zero(system_->input_dim()));
  return res.controls.front();
}

ProportionalItecRhc::ProportionalItecRhc(const DiscreteSystem& system, ItecSpec itec,
                                         InputSet input_set, SolverConfig solver)
    : system_(&system),
      itec_(itec),
      input_set_(std::move(input_set)),
      solver_(solver) {
  if (itec_.N < 1) throw std::invalid_argument("proportional rhc: N must be >= 1");
  reset();
}

void ProportionalItecRhc::reset() {
  warm_.assign(itec_.N, Vector::Zero(system_->input_dim()));
  k_ = 0;
  p_ = itec_.N;
  gamma_ = 0.0;
}

std::optional<EnergyWindow> ProportionalItecRhc::budget_at(int k) const {
  const int N = itec_.N;
  if (k + N - 1 < p_) return std::nullopt;  // horizon ends before the window
  EnergyWindow w;
  if (k < p_) {
    // Tail overlap of j = k+N-p steps: proportional share j·C/N.
    const int j = k + N - p_;
    w.start_offset = p_ - k;
    w.end_offset = N - 1;
    w.budget = static_cast<double>(j) * itec_.C / N;
  } else {
    w.start_offset = 0;
    w.end_offset = p_ + N - 1 - k;
    w.budget = std::max(0.0, itec_.C - gamma_);
  }
  return w;
}

Vector ProportionalItecRhc::step(const Vector& x_k, StepRow& row) {
  const int N = itec_.N;
  HorizonProblem P;
  P.x_init = x_k;
  P.horizon = N;
  P.system = system_;
  P.input_set = input_set_;
  P.energy_window = budget_at(k_);
  const SolveResult res = solve(P, solver_, warm_);

  row.k = k_;
  row.x = x_k;
  row.h = N;
  row.gamma = gamma_;
  row.terminal_bound = std::numeric_limits<double>::infinity();
  row.solver_status = to_string(res.status);
  if (!res.feasible()) {
    throw ControllerError(k_, x_k, "proportional rhc: infeasible solve at step " +
                                       std::to_string(k_));
  }
  const Vector u1 = res.controls.front();
  row.u = u1;

  if (k_ >= p_ && k_ < p_ + N) gamma_ += u1.squaredNorm();
  if (k_ == p_ + N - 1) {
    p_ += 2 * N;
    gamma_ = 0.0;
  }
  warm_.assign(res.controls.begin() + 1, res.controls.end());
  warm_.push_back(Vector::Zero(system_->input_dim()));
  ++k_;
  return u1;
}

}  // namespace irhc
