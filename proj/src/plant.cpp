#include "irhc/plant.hpp"

#include <cmath>

namespace irhc {

namespace {

void check_dims(const PlantModel& model, const Vector& x, const Vector& u) {
  if (x.size() != model.state_dim || u.size() != model.input_dim) {
    throw std::invalid_argument("plant: state/input dimension mismatch");
  }
}

void check_finite(const Vector& x, const Vector& u) {
  if (!x.allFinite() || !u.allFinite()) {
    throw std::domain_error("plant: non-finite state or input");
  }
}

}  // namespace

PlantModel make_oscillator() {
  PlantModel m;
  m.state_dim = 2;
  m.input_dim = 1;
  m.dynamics = [](const Vector& x, const Vector& u) {
    const double x1 = x[0], x2 = x[1];
    Vector dx(2);
    dx[0] = x2;
    dx[1] = -x1 * (M_PI / 2.0 + std::atan(5.0 * x1)) -
            5.0 * x1 * x1 / (2.0 * (1.0 + 25.0 * x1 * x1)) + 4.0 * x2 + 3.0 * u[0];
    return dx;
  };
  m.jac_state = [](const Vector& x, const Vector&) {
    const double x1 = x[0];
    const double d = 1.0 + 25.0 * x1 * x1;
    Matrix J(2, 2);
    J(0, 0) = 0.0;
    J(0, 1) = 1.0;
    J(1, 0) = -(M_PI / 2.0 + std::atan(5.0 * x1)) - 5.0 * x1 / d - 5.0 * x1 / (d * d);
    J(1, 1) = 4.0;
    return J;
  };
  m.jac_input = [](const Vector&, const Vector&) {
    Matrix J(2, 1);
    J(0, 0) = 0.0;
    J(1, 0) = 3.0;
    return J;
  };
  return m;
}

PlantModel make_scalar_decay(double lambda, double b) {
  PlantModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.dynamics = [lambda, b](const Vector& x, const Vector& u) {
    Vector dx(1);
    dx[0] = -lambda * x[0] + b * u[0];
    return dx;
  };
  m.jac_state = [lambda](const Vector&, const Vector&) {
    Matrix J(1, 1);
    J(0, 0) = -lambda;
    return J;
  };
  m.jac_input = [b](const Vector&, const Vector&) {
    Matrix J(1, 1);
    J(0, 0) = b;
    return J;
  };
  return m;
}

Vector eval_continuous(const PlantModel& model, const Vector& x, const Vector& u) {
  check_dims(model, x, u);
  return model.dynamics(x, u);
}

Vector discretize_step(const PlantModel& model, const Vector& x, const Vector& u,
                       const DiscretizerConfig& cfg) {
  check_dims(model, x, u);
  check_finite(x, u);
  if (cfg.dt <= 0.0) throw std::invalid_argument("plant: dt must be positive");
  const double dt = cfg.dt;
  if (cfg.method == IntegrationMethod::euler) {
    return x + dt * model.dynamics(x, u);
  }
  const Vector k1 = model.dynamics(x, u);
  const Vector k2 = model.dynamics(x + 0.5 * dt * k1, u);
  const Vector k3 = model.dynamics(x + 0.5 * dt * k2, u);
  const Vector k4 = model.dynamics(x + dt * k3, u);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

DiscreteSystem::DiscreteSystem(PlantModel model, DiscretizerConfig cfg)
    : state_dim_(model.state_dim),
      input_dim_(model.input_dim),
      model_(std::move(model)),
      cfg_(cfg) {
  if (cfg_.dt <= 0.0) throw std::invalid_argument("plant: dt must be positive");
}

DiscreteSystem DiscreteSystem::scalar_linear(double a, double b) {
  DiscreteSystem s;
  s.state_dim_ = 1;
  s.input_dim_ = 1;
  s.direct_ = true;
  s.a_ = a;
  s.b_ = b;
  return s;
}

Vector DiscreteSystem::step(const Vector& x, const Vector& u) const {
  if (direct_) {
    if (x.size() != 1 || u.size() != 1) {
      throw std::invalid_argument("plant: state/input dimension mismatch");
    }
    check_finite(x, u);
    Vector out(1);
    out[0] = a_ * x[0] + b_ * u[0];
    return out;
  }
  return discretize_step(model_, x, u, cfg_);
}

void DiscreteSystem::step_with_jacobians(const Vector& x, const Vector& u,
                                         Vector& x_next, Matrix& A, Matrix& B) const {
  if (direct_) {
    x_next = step(x, u);
    A = Matrix::Constant(1, 1, a_);
    B = Matrix::Constant(1, 1, b_);
    return;
  }
  check_dims(model_, x, u);
  check_finite(x, u);
  const int n = state_dim_, m = input_dim_;
  const double dt = cfg_.dt;

  if (!model_.jac_state || !model_.jac_input) {
    // Central differences on the step map.
    x_next = discretize_step(model_, x, u, cfg_);
    A.resize(n, n);
    B.resize(n, m);
    const double eps = 1e-6;
    Vector xp = x, xm = x, up = u, um = u;
    for (int j = 0; j < n; ++j) {
      xp[j] += eps;
      xm[j] -= eps;
      A.col(j) = (discretize_step(model_, xp, u, cfg_) -
                  discretize_step(model_, xm, u, cfg_)) /
                 (2.0 * eps);
      xp[j] = x[j];
      xm[j] = x[j];
    }
    for (int j = 0; j < m; ++j) {
      up[j] += eps;
      um[j] -= eps;
      B.col(j) = (discretize_step(model_, x, up, cfg_) -
                  discretize_step(model_, x, um, cfg_)) /
                 (2.0 * eps);
      up[j] = u[j];
      um[j] = u[j];
    }
    return;
  }

  if (cfg_.method == IntegrationMethod::euler) {
    x_next = x + dt * model_.dynamics(x, u);
    A = Matrix::Identity(n, n) + dt * model_.jac_state(x, u);
    B = dt * model_.jac_input(x, u);
    return;
  }

  // RK4 stage sensitivities via the chain rule; ZOH input on [0, dt].
  const Vector k1 = model_.dynamics(x, u);
  const Vector z2 = x + 0.5 * dt * k1;
  const Vector k2 = model_.dynamics(z2, u);
  const Vector z3 = x + 0.5 * dt * k2;
  const Vector k3 = model_.dynamics(z3, u);
  const Vector z4 = x + dt * k3;
  const Vector k4 = model_.dynamics(z4, u);
  x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  const Matrix I = Matrix::Identity(n, n);
  const Matrix J1x = model_.jac_state(x, u), J1u = model_.jac_input(x, u);
  const Matrix J2x = model_.jac_state(z2, u), J2u = model_.jac_input(z2, u);
  const Matrix J3x = model_.jac_state(z3, u), J3u = model_.jac_input(z3, u);
  const Matrix J4x = model_.jac_state(z4, u), J4u = model_.jac_input(z4, u);

  const Matrix dk1x = J1x;
  const Matrix dk2x = J2x * (I + 0.5 * dt * dk1x);
  const Matrix dk3x = J3x * (I + 0.5 * dt * dk2x);
  const Matrix dk4x = J4x * (I + dt * dk3x);
  A = I + (dt / 6.0) * (dk1x + 2.0 * dk2x + 2.0 * dk3x + dk4x);

  const Matrix dk1u = J1u;
  const Matrix dk2u = J2u + 0.5 * dt * J2x * dk1u;
  const Matrix dk3u = J3u + 0.5 * dt * J3x * dk2u;
  const Matrix dk4u = J4u + dt * J4x * dk3u;
  B = (dt / 6.0) * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);
}

Trajectory simulate(const DiscreteSystem& system, const Vector& x0,
                    const std::vector<Vector>& controls) {
  if (controls.empty()) throw std::invalid_argument("simulate: empty control sequence");
  Trajectory traj;
  traj.states.reserve(controls.size() + 1);
  traj.controls = controls;
  traj.states.push_back(x0);
  Vector x = x0;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    try {
      x = system.step(x, controls[k]);
    } catch (const std::domain_error& e) {
      throw std::domain_error("simulate: step " + std::to_string(k) + ": " + e.what());
    }
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory simulate(const PlantModel& model, const DiscretizerConfig& cfg,
                    const Vector& x0, const std::vector<Vector>& controls) {
  return simulate(DiscreteSystem(model, cfg), x0, controls);
}

double trajectory_cost(const Trajectory& traj) {
  if (traj.states.size() != traj.controls.size() + 1) {
    throw std::invalid_argument("trajectory_cost: states/controls length mismatch");
  }
  double cost = 0.0;
  for (std::size_t k = 0; k < traj.controls.size(); ++k) {
    cost += traj.states[k + 1].squaredNorm() + traj.controls[k].squaredNorm();
  }
  return cost;
}

}  // namespace irhc
