#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace irhc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Continuous-time plant ẋ = f(x, u) with optional analytic Jacobians.
/// All shipped presets satisfy f(0, 0) = 0.
struct PlantModel {
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vector(const Vector&, const Vector&)> dynamics;
  // Jacobians of f w.r.t. x and u; empty means "use finite differences".
  std::function<Matrix(const Vector&, const Vector&)> jac_state;
  std::function<Matrix(const Vector&, const Vector&)> jac_input;
};

enum class IntegrationMethod { euler, rk4 };

struct DiscretizerConfig {
  double dt = 0.05;
  IntegrationMethod method = IntegrationMethod::rk4;
};

struct Trajectory {
  std::vector<Vector> states;    // x(0..K)
  std::vector<Vector> controls;  // u(0..K-1)
};

/// The two-dimensional nonlinear oscillator benchmark:
///   ẋ₁ = x₂
///   ẋ₂ = −x₁(π/2 + atan(5x₁)) − 5x₁²/(2(1+25x₁²)) + 4x₂ + 3u
PlantModel make_oscillator();

/// Scalar linear decay ẋ = −λx, bu (for integrator oracle tests).
PlantModel make_scalar_decay(double lambda, double b = 0.0);

Vector eval_continuous(const PlantModel& model, const Vector& x, const Vector& u);

Vector discretize_step(const PlantModel& model, const Vector& x, const Vector& u,
                       const DiscretizerConfig& cfg);

/// Discrete-time step map x(k+1) = Φ(x(k), u(k)), either a fixed-step
/// discretization of a continuous plant (zero-order-hold input) or a
/// direct discrete map such as x(k+1) = a·x + b·u.
class DiscreteSystem {
 public:
  DiscreteSystem(PlantModel model, DiscretizerConfig cfg);

  /// Direct discrete scalar map x(k+1) = a·x + b·u.
  static DiscreteSystem scalar_linear(double a, double b);

  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }

  Vector step(const Vector& x, const Vector& u) const;

  /// One step together with the Jacobians A = ∂Φ/∂x, B = ∂Φ/∂u.
  void step_with_jacobians(const Vector& x, const Vector& u, Vector& x_next,
                           Matrix& A, Matrix& B) const;

 private:
  DiscreteSystem() = default;

  int state_dim_ = 0;
  int input_dim_ = 0;
  bool direct_ = false;
  double a_ = 0.0, b_ = 0.0;  // direct scalar map only
  PlantModel model_;
  DiscretizerConfig cfg_;
};

Trajectory simulate(const DiscreteSystem& system, const Vector& x0,
                    const std::vector<Vector>& controls);

Trajectory simulate(const PlantModel& model, const DiscretizerConfig& cfg,
                    const Vector& x0, const std::vector<Vector>& controls);

/// Σ_{k=1..K} ‖x(k)‖² + ‖u(k−1)‖²; the initial state is not charged.
double trajectory_cost(const Trajectory& traj);

}  // namespace irhc
