#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "irhc/baselines.hpp"

using namespace irhc;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

}  // namespace

TEST_CASE("static feedback u = -3 x2") {
  CHECK(static_feedback(vec({5, 0}))[0] == 0.0);
  CHECK(static_feedback(vec({2, -1}))[0] == 3.0);
  CHECK_THROWS_AS(static_feedback(vec({1})), std::invalid_argument);
}

TEST_CASE("traditional rhc equals the unconstrained horizon problem") {
  const DiscreteSystem sys(make_oscillator(), {0.05, IntegrationMethod::rk4});
  TraditionalRhc rhc(sys, 6);
  StepRow row;
  const Vector u = rhc.step(vec({1.5, -0.5}), row);

  HorizonProblem P;
  P.x_init = vec({1.5, -0.5});
  P.horizon = 6;
  P.system = &sys;
  const SolveResult r = solve(P);
  REQUIRE(r.feasible());
  CHECK(std::abs(u[0] - r.controls[0][0]) < 1e-8);
}

TEST_CASE("traditional rhc at the origin stays at the origin") {
  const DiscreteSystem sys(make_oscillator(), {0.05, IntegrationMethod::rk4});
  TraditionalRhc rhc(sys, 4);
  StepRow row;
  CHECK(rhc.step(vec({0, 0}), row).norm() == 0.0);
}

TEST_CASE("proportional budget schedule, N=3") {
  const DiscreteSystem sys = DiscreteSystem::scalar_linear(0.9, 1.0);
  const double C = 1.2;
  ProportionalItecRhc prop(sys, ItecSpec{C, 3});

  CHECK_FALSE(prop.budget_at(0).has_value());  // horizon [0,2] misses window [3,5]

  auto w1 = prop.budget_at(1);  // covers j=1 step of the window
  REQUIRE(w1.has_value());
  CHECK(w1->start_offset == 2);
  CHECK(w1->end_offset == 2);
  CHECK(w1->budget == doctest::Approx(C / 3.0));

  auto w2 = prop.budget_at(2);
  REQUIRE(w2.has_value());
  CHECK(w2->start_offset == 1);
  CHECK(w2->budget == doctest::Approx(2.0 * C / 3.0));

  auto w3 = prop.budget_at(3);  // head of the window, nothing spent yet
  REQUIRE(w3.has_value());
  CHECK(w3->start_offset == 0);
  CHECK(w3->end_offset == 2);
  CHECK(w3->budget == doctest::Approx(C));

  // Tail allocations grow by exactly C/N per step: they sum to C when
  // every allocation binds.
  double prev = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double b = prop.budget_at(k)->budget;
    CHECK(b - prev == doctest::Approx(C / 3.0));
    prev = b;
  }
  CHECK(prev == doctest::Approx(C));
}

TEST_CASE("proportional controller tracks spent energy") {
  const DiscreteSystem sys = DiscreteSystem::scalar_linear(1.05, 1.0);
  const double C = 0.4;
  const int N = 3;
  ProportionalItecRhc prop(sys, ItecSpec{C, N});
  const RunRecord rec = run_closed_loop(
      sys, [&prop](int, const Vector& x, StepRow& row) { return prop.step(x, row); },
      vec({1.5}), 14, 1e-9, 100.0);
  REQUIRE_FALSE(rec.aborted);
  for (double e : rec.itec_window_energies(N)) CHECK(e <= C + 1e-6);
  // head-overlap budget is C minus what was already spent
  REQUIRE(rec.steps > 4);
  const double spent3 = rec.rows[3].u.squaredNorm();
  CHECK(rec.rows[4].gamma == doctest::Approx(spent3).epsilon(1e-12));
}
