#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irhc/plant.hpp"

using namespace irhc;

namespace {

// Test oracle: adaptive Runge-Kutta-Fehlberg 4(5) integration of the
// continuous dynamics under zero-order-hold input, independent of the
// fixed-step schemes under test.
Vector rkf45_reference(const PlantModel& model, Vector x, const Vector& u,
                       double t_end, double tol = 1e-12) {
  double t = 0.0;
  double h = t_end;
  while (t < t_end) {
    h = std::min(h, t_end - t);
    const Vector k1 = model.dynamics(x, u);
    const Vector k2 = model.dynamics(x + h * (k1 / 4.0), u);
    const Vector k3 = model.dynamics(x + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2), u);
    const Vector k4 = model.dynamics(
        x + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3), u);
    const Vector k5 = model.dynamics(
        x + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 -
                 845.0 / 4104.0 * k4),
        u);
    const Vector k6 = model.dynamics(
        x + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 +
                 1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5),
        u);
    const Vector x4 = x + h * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 +
                               2197.0 / 4104.0 * k4 - k5 / 5.0);
    const Vector x5 = x + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 +
                               28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 +
                               2.0 / 55.0 * k6);
    const double err = (x5 - x4).norm();
    if (err <= tol || h < 1e-12) {
      t += h;
      x = x5;
    }
    const double scale = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
    h *= std::clamp(scale, 0.1, 2.0);
  }
  return x;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

}  // namespace

TEST_CASE("oscillator continuous dynamics") {
  const PlantModel osc = make_oscillator();

  CHECK(eval_continuous(osc, vec({0, 0}), vec({0})).norm() == 0.0);

  const Vector d0 = eval_continuous(osc, vec({2, -1}), vec({0}));
  CHECK(d0[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(d0[1] - (-10.18286)) < 5e-6);

  const Vector d1 = eval_continuous(osc, vec({2, -1}), vec({1}));
  CHECK(std::abs(d1[1] - (-7.18286)) < 5e-6);

  // Input enters affinely through the 3u term only.
  for (double u : {-2.0, 0.5, 3.0}) {
    const Vector diff =
        eval_continuous(osc, vec({0.7, -1.3}), vec({u})) -
        eval_continuous(osc, vec({0.7, -1.3}), vec({0}));
    CHECK(diff[0] == 0.0);
    CHECK(diff[1] == doctest::Approx(3.0 * u).epsilon(1e-14));
  }

  CHECK_THROWS_AS(eval_continuous(osc, vec({1}), vec({0})), std::invalid_argument);
  CHECK_THROWS_AS(eval_continuous(osc, vec({1, 2}), vec({0, 0})), std::invalid_argument);
}

TEST_CASE("discretize_step against the adaptive reference") {
  const PlantModel osc = make_oscillator();
  const DiscretizerConfig cfg{0.05, IntegrationMethod::rk4};

  CHECK(discretize_step(osc, vec({0, 0}), vec({0}), cfg).norm() == 0.0);

  // At [2,-1] the derivative magnitudes are ~10, so the one-step RK4
  // truncation error at dt=0.05 sits in the low 1e-6 range.
  const Vector got = discretize_step(osc, vec({2, -1}), vec({0}), cfg);
  const Vector ref = rkf45_reference(osc, vec({2, -1}), vec({0}), 0.05);
  CHECK((got - ref).norm() < 1e-5);

  const Vector got_u = discretize_step(osc, vec({2, -1}), vec({0.7}), cfg);
  const Vector ref_u = rkf45_reference(osc, vec({2, -1}), vec({0.7}), 0.05);
  CHECK((got_u - ref_u).norm() < 1e-5);

  // A milder state keeps the one-step error under 1e-6.
  const Vector got_m = discretize_step(osc, vec({0.3, 0.2}), vec({-0.1}), cfg);
  const Vector ref_m = rkf45_reference(osc, vec({0.3, 0.2}), vec({-0.1}), 0.05);
  CHECK((got_m - ref_m).norm() < 1e-6);
}

TEST_CASE("scalar decay one-step accuracy") {
  const PlantModel dec = make_scalar_decay(1.0);
  const Vector x1 =
      discretize_step(dec, vec({1}), vec({0}), {0.05, IntegrationMethod::rk4});
  // Classical RK4 truncation for ẋ=−x at h=0.05 is ≈2.6e−9, so the
  // closed-form match is asserted at 1e−8.
  CHECK(std::abs(x1[0] - std::exp(-0.05)) < 1e-8);
  // And it equals the RK4 stability polynomial exactly.
  const double h = 0.05;
  const double r = 1.0 - h + h * h / 2.0 - h * h * h / 6.0 + h * h * h * h / 24.0;
  CHECK(x1[0] == doctest::Approx(r).epsilon(1e-15));
}

TEST_CASE("rk4 order: halving dt cuts the local error ~32x") {
  const PlantModel dec = make_scalar_decay(1.0);
  auto one_step_err = [&](double dt) {
    const Vector x =
        discretize_step(dec, vec({1}), vec({0}), {dt, IntegrationMethod::rk4});
    return std::abs(x[0] - std::exp(-dt));
  };
  // one step: local truncation error scales as dt^5
  const double ratio = one_step_err(0.1) / one_step_err(0.05);
  CHECK(ratio >= 24.0);
  CHECK(ratio <= 40.0);

  // fixed interval: global error scales as dt^4
  auto global_err = [&](double dt, int steps) {
    Vector x = vec({1});
    for (int k = 0; k < steps; ++k) {
      x = discretize_step(dec, x, vec({0}), {dt, IntegrationMethod::rk4});
    }
    return std::abs(x[0] - std::exp(-dt * steps));
  };
  const double gratio = global_err(0.1, 10) / global_err(0.05, 20);
  CHECK(gratio >= 12.0);
  CHECK(gratio <= 20.0);
}

TEST_CASE("euler option and error paths") {
  const PlantModel dec = make_scalar_decay(1.0);
  const Vector x1 =
      discretize_step(dec, vec({1}), vec({0}), {0.1, IntegrationMethod::euler});
  CHECK(x1[0] == doctest::Approx(0.9).epsilon(1e-15));

  CHECK_THROWS_AS(
      discretize_step(dec, vec({1}), vec({0}), {-0.1, IntegrationMethod::rk4}),
      std::invalid_argument);
  Vector bad(1);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(discretize_step(dec, bad, vec({0}), {0.1, IntegrationMethod::rk4}),
                  std::domain_error);
}

TEST_CASE("simulate chaining and cost splitting") {
  const PlantModel osc = make_oscillator();
  const DiscretizerConfig cfg{0.05, IntegrationMethod::rk4};
  std::vector<Vector> u;
  for (int k = 0; k < 8; ++k) u.push_back(vec({0.3 * std::sin(k * 0.7)}));

  const Trajectory whole = simulate(osc, cfg, vec({2, -1}), u);
  CHECK(whole.states.size() == u.size() + 1);

  const std::vector<Vector> u1(u.begin(), u.begin() + 3);
  const std::vector<Vector> u2(u.begin() + 3, u.end());
  const Trajectory first = simulate(osc, cfg, vec({2, -1}), u1);
  const Trajectory second = simulate(osc, cfg, first.states.back(), u2);
  CHECK((second.states.back() - whole.states.back()).norm() < 1e-12);
  CHECK(trajectory_cost(first) + trajectory_cost(second) ==
        doctest::Approx(trajectory_cost(whole)).epsilon(1e-12));

  CHECK_THROWS_AS(simulate(osc, cfg, vec({2, -1}), {}), std::invalid_argument);
}

TEST_CASE("trajectory_cost charges x(1..K) and u(0..K-1)") {
  Trajectory t1;
  t1.states = {vec({1, 0}), vec({0, 0})};
  t1.controls = {vec({0})};
  CHECK(trajectory_cost(t1) == 0.0);

  Trajectory t2;
  t2.states = {vec({1}), vec({2}), vec({0})};
  t2.controls = {vec({1}), vec({1})};
  CHECK(trajectory_cost(t2) == doctest::Approx(6.0));

  Trajectory zeros;
  zeros.states = {vec({0, 0}), vec({0, 0}), vec({0, 0})};
  zeros.controls = {vec({0}), vec({0})};
  CHECK(trajectory_cost(zeros) == 0.0);

  Trajectory bad;
  bad.states = {vec({1})};
  bad.controls = {vec({1})};
  CHECK_THROWS_AS(trajectory_cost(bad), std::invalid_argument);
}

TEST_CASE("discrete step jacobians match finite differences") {
  const DiscreteSystem sys(make_oscillator(), {0.05, IntegrationMethod::rk4});
  const Vector x = vec({0.8, -0.4});
  const Vector u = vec({0.6});
  Vector xn;
  Matrix A, B;
  sys.step_with_jacobians(x, u, xn, A, B);
  CHECK((xn - sys.step(x, u)).norm() == 0.0);

  const double eps = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vector xp = x, xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    const Vector col = (sys.step(xp, u) - sys.step(xm, u)) / (2 * eps);
    CHECK((A.col(j) - col).norm() < 1e-8);
  }
  Vector up = u, um = u;
  up[0] += eps;
  um[0] -= eps;
  const Vector colB = (sys.step(x, up) - sys.step(x, um)) / (2 * eps);
  CHECK((B.col(0) - colB).norm() < 1e-8);
}

TEST_CASE("direct scalar linear map") {
  const DiscreteSystem sys = DiscreteSystem::scalar_linear(0.5, 2.0);
  CHECK(sys.step(vec({3}), vec({1}))[0] == doctest::Approx(3.5));
  Vector xn;
  Matrix A, B;
  sys.step_with_jacobians(vec({3}), vec({1}), xn, A, B);
  CHECK(A(0, 0) == 0.5);
  CHECK(B(0, 0) == 2.0);
}
