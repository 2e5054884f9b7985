#include "irhc/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace irhc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

InputSet InputSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("input set: bound size mismatch");
  for (int i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw std::invalid_argument("input set: lower > upper");
    if (lo[i] > 0.0 || hi[i] < 0.0) {
      throw std::invalid_argument("input set: box must contain the origin");
    }
  }
  InputSet s;
  s.kind = InputSetKind::box;
  s.lower = std::move(lo);
  s.upper = std::move(hi);
  return s;
}

Vector InputSet::project(const Vector& u) const {
  if (kind == InputSetKind::unbounded) return u;
  return u.cwiseMax(lower).cwiseMin(upper);
}

double InputSet::violation(const Vector& u) const {
  if (kind == InputSetKind::unbounded) return 0.0;
  double v = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    v = std::max(v, std::max(lower[i] - u[i], u[i] - upper[i]));
  }
  return std::max(v, 0.0);
}

void HorizonProblem::validate() const {
  if (!system) throw std::invalid_argument("horizon problem: no system");
  if (horizon < 1) throw std::invalid_argument("horizon problem: horizon must be >= 1");
  if (x_init.size() != system->state_dim()) {
    throw std::invalid_argument("horizon problem: x_init dimension mismatch");
  }
  if (input_set.kind == InputSetKind::box && input_set.lower.size() != system->input_dim()) {
    throw std::invalid_argument("horizon problem: input set dimension mismatch");
  }
  if (energy_window) {
    const auto& w = *energy_window;
    if (w.start_offset < 0 || w.start_offset > w.end_offset || w.end_offset >= horizon) {
      throw std::invalid_argument("horizon problem: bad energy window offsets");
    }
    if (w.budget < 0.0) throw std::invalid_argument("horizon problem: negative budget");
  }
  if (terminal_bound && *terminal_bound < 0.0) {
    throw std::invalid_argument("horizon problem: negative terminal bound");
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_suboptimal: return "feasible_suboptimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

namespace {

std::vector<Vector> unpack(const Vector& z, int h, int m) {
  std::vector<Vector> u(h);
  for (int j = 0; j < h; ++j) u[j] = z.segment(j * m, m);
  return u;
}

Vector pack(const std::vector<Vector>& u, int h, int m) {
  Vector z(h * m);
  for (int j = 0; j < h; ++j) z.segment(j * m, m) = u[j];
  return z;
}

// Single-shooting evaluation cache for one horizon problem.
struct Shooter {
  const HorizonProblem& P;
  int h, n, m;
  bool has_E, has_T;

  explicit Shooter(const HorizonProblem& p)
      : P(p),
        h(p.horizon),
        n(p.system->state_dim()),
        m(p.system->input_dim()),
        has_E(p.energy_window.has_value()),
        has_T(p.terminal_bound.has_value()) {}

  bool in_window(int j) const {
    return has_E && j >= P.energy_window->start_offset && j <= P.energy_window->end_offset;
  }

  // Rollout; returns false if the trajectory left the finite domain.
  bool rollout(const std::vector<Vector>& u, std::vector<Vector>& x) const {
    x.resize(h + 1);
    x[0] = P.x_init;
    for (int j = 0; j < h; ++j) {
      if (!x[j].allFinite() || !u[j].allFinite()) return false;
      x[j + 1] = P.system->step(x[j], u[j]);
    }
    return x[h].allFinite();
  }

  bool rollout_jac(const std::vector<Vector>& u, std::vector<Vector>& x,
                   std::vector<Matrix>& A, std::vector<Matrix>& B) const {
    x.resize(h + 1);
    A.resize(h);
    B.resize(h);
    x[0] = P.x_init;
    for (int j = 0; j < h; ++j) {
      if (!x[j].allFinite() || !u[j].allFinite()) return false;
      P.system->step_with_jacobians(x[j], u[j], x[j + 1], A[j], B[j]);
    }
    return x[h].allFinite();
  }

  double cost(const std::vector<Vector>& u, const std::vector<Vector>& x) const {
    double c = 0.0;
    for (int j = 0; j < h; ++j) c += x[j + 1].squaredNorm() + u[j].squaredNorm();
    return c;
  }

  double g_energy(const std::vector<Vector>& u) const {
    double e = 0.0;
    for (int j = P.energy_window->start_offset; j <= P.energy_window->end_offset; ++j) {
      e += u[j].squaredNorm();
    }
    return e - P.energy_window->budget;
  }

  double g_terminal(const std::vector<Vector>& x) const {
    return x[h].squaredNorm() - *P.terminal_bound;
  }

  // Gradient of w_J·J + w_E·g_E + w_T·g_T via one backward sweep.
  Vector weighted_grad(const std::vector<Vector>& u, const std::vector<Vector>& x,
                       const std::vector<Matrix>& A, const std::vector<Matrix>& B,
                       double w_J, double w_E, double w_T) const {
    Vector grad(h * m);
    Vector p = 2.0 * (w_J + w_T) * x[h];  // costate at the terminal state
    for (int j = h - 1; j >= 0; --j) {
      Vector gu = B[j].transpose() * p + 2.0 * w_J * u[j];
      if (w_E != 0.0 && in_window(j)) gu += 2.0 * w_E * u[j];
      grad.segment(j * m, m) = gu;
      if (j > 0) p = A[j].transpose() * p + 2.0 * w_J * x[j];
    }
    return grad;
  }
};

struct Objective {
  const Shooter& sh;
  // Augmented-Lagrangian state; restoration mode minimizes the sum of
  // squared violations instead of the cost.
  bool restoration = false;
  double lam_E = 0.0, lam_T = 0.0, mu = 10.0;

  mutable std::vector<Vector> u_buf, x_buf;
  mutable std::vector<Matrix> A_buf, B_buf;

  static double penalty(double g, double lam, double mu) {
    const double t = lam + mu * g;
    if (t > 0.0) return (t * t - lam * lam) / (2.0 * mu);
    return -lam * lam / (2.0 * mu);
  }

  double value(const Vector& z) const {
    u_buf = unpack(z, sh.h, sh.m);
    if (!sh.rollout(u_buf, x_buf)) return kInf;
    const double gE = sh.has_E ? sh.g_energy(u_buf) : 0.0;
    const double gT = sh.has_T ? sh.g_terminal(x_buf) : 0.0;
    if (restoration) {
      double r = 0.0;
      if (sh.has_E) r += std::pow(std::max(0.0, gE), 2);
      if (sh.has_T) r += std::pow(std::max(0.0, gT), 2);
      return r;
    }
    double f = sh.cost(u_buf, x_buf);
    if (sh.has_E) f += penalty(gE, lam_E, mu);
    if (sh.has_T) f += penalty(gT, lam_T, mu);
    return f;
  }

  double value_and_grad(const Vector& z, Vector& grad) const {
    u_buf = unpack(z, sh.h, sh.m);
    if (!sh.rollout_jac(u_buf, x_buf, A_buf, B_buf)) {
      grad = Vector::Zero(z.size());
      return kInf;
    }
    const double gE = sh.has_E ? sh.g_energy(u_buf) : 0.0;
    const double gT = sh.has_T ? sh.g_terminal(x_buf) : 0.0;
    if (restoration) {
      const double rE = sh.has_E ? std::max(0.0, gE) : 0.0;
      const double rT = sh.has_T ? std::max(0.0, gT) : 0.0;
      grad = sh.weighted_grad(u_buf, x_buf, A_buf, B_buf, 0.0, 2.0 * rE, 2.0 * rT);
      return rE * rE + rT * rT;
    }
    const double wE = sh.has_E ? std::max(0.0, lam_E + mu * gE) : 0.0;
    const double wT = sh.has_T ? std::max(0.0, lam_T + mu * gT) : 0.0;
    grad = sh.weighted_grad(u_buf, x_buf, A_buf, B_buf, 1.0, wE, wT);
    double f = sh.cost(u_buf, x_buf);
    if (sh.has_E) f += penalty(gE, lam_E, mu);
    if (sh.has_T) f += penalty(gT, lam_T, mu);
    return f;
  }
};

Vector project_all(const InputSet& set, const Vector& z, int h, int m) {
  if (set.kind == InputSetKind::unbounded) return z;
  Vector out(z.size());
  for (int j = 0; j < h; ++j) out.segment(j * m, m) = set.project(z.segment(j * m, m));
  return out;
}

struct SpgResult {
  Vector z;
  double f = kInf;
  bool converged = false;
  int iterations = 0;
};

// Spectral projected gradient with Barzilai-Borwein steps and a
// monotone Armijo backtracking line search.
SpgResult spg_minimize(const Objective& obj, const InputSet& set, int h, int m,
                       Vector z0, int max_iter, double grad_tol) {
  SpgResult res;
  Vector z = project_all(set, std::move(z0), h, m);
  Vector g(z.size());
  double f = obj.value_and_grad(z, g);
  if (!std::isfinite(f)) {
    // Non-finite start; fall back to the origin, which always rolls out.
    z.setZero();
    f = obj.value_and_grad(z, g);
  }
  double alpha = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    const Vector pg = z - project_all(set, z - g, h, m);
    if (pg.lpNorm<Eigen::Infinity>() <= grad_tol) {
      res.converged = true;
      break;
    }
    double a = std::clamp(alpha, 1e-12, 1e12);
    bool accepted = false;
    Vector z_new, d;
    double f_new = kInf;
    for (int ls = 0; ls < 60; ++ls) {
      z_new = project_all(set, z - a * g, h, m);
      d = z_new - z;
      if (d.lpNorm<Eigen::Infinity>() < 1e-16) break;
      f_new = obj.value(z_new);
      const double slope = std::min(0.0, g.dot(d));
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * slope) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;  // line search stalled at numerical precision

    Vector g_new(z.size());
    obj.value_and_grad(z_new, g_new);
    const Vector s = z_new - z;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    alpha = sy > 1e-16 ? s.squaredNorm() / sy : 2.0 * a;
    z = std::move(z_new);
    f = f_new;
    g = std::move(g_new);
  }
  res.z = std::move(z);
  res.f = f;
  return res;
}

struct Candidate {
  Vector z;
  double cost = kInf;
  double viol = kInf;
  bool converged = false;
  int iterations = 0;
};

void measure(const Shooter& sh, const Vector& z, double& cost, double& viol) {
  auto u = unpack(z, sh.h, sh.m);
  std::vector<Vector> x;
  if (!sh.rollout(u, x)) {
    cost = kInf;
    viol = kInf;
    return;
  }
  cost = sh.cost(u, x);
  viol = 0.0;
  if (sh.has_E) viol = std::max(viol, sh.g_energy(u));
  if (sh.has_T) viol = std::max(viol, sh.g_terminal(x));
}

// One augmented-Lagrangian descent from a given start, with at most one
// feasibility-restoration attempt.
Candidate al_descent(const Shooter& sh, const InputSet& set, const SolverConfig& cfg,
                     Vector start, bool allow_restoration) {
  Objective obj{sh};
  Candidate best;    // best feasible iterate seen
  Candidate last;    // last outer iterate

  Vector z = project_all(set, std::move(start), sh.h, sh.m);
  int total_iters = 0;

  auto consider = [&](const Vector& cand, bool conv) {
    double cost, viol;
    measure(sh, cand, cost, viol);
    last = {cand, cost, viol, conv, total_iters};
    if (viol <= cfg.feas_tol && cost < best.cost) best = last;
  };
  consider(z, false);

  double viol_prev = kInf;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    SpgResult inner = spg_minimize(obj, set, sh.h, sh.m, z, cfg.max_inner, cfg.grad_tol);
    total_iters += inner.iterations;
    z = inner.z;
    consider(z, inner.converged);
    if (last.viol <= cfg.feas_tol && inner.converged) break;

    const double gE = sh.has_E ? sh.g_energy(unpack(z, sh.h, sh.m)) : 0.0;
    std::vector<Vector> x;
    sh.rollout(unpack(z, sh.h, sh.m), x);
    const double gT = sh.has_T ? sh.g_terminal(x) : 0.0;
    obj.lam_E = std::max(0.0, obj.lam_E + obj.mu * gE);
    obj.lam_T = std::max(0.0, obj.lam_T + obj.mu * gT);
    if (last.viol > 0.25 * viol_prev) obj.mu = std::min(obj.mu * 10.0, 1e12);
    viol_prev = last.viol;
  }

  if (best.viol > cfg.feas_tol && allow_restoration) {
    Objective resto{sh};
    resto.restoration = true;
    SpgResult r = spg_minimize(resto, set, sh.h, sh.m, z, cfg.max_inner, cfg.grad_tol);
    total_iters += r.iterations;
    double cost, viol;
    measure(sh, r.z, cost, viol);
    if (viol <= cfg.feas_tol) {
      // Re-optimize cost from the restored feasible point.
      Candidate again = al_descent(sh, set, cfg, r.z, false);
      again.iterations += total_iters;
      if (again.viol <= cfg.feas_tol) return again;
      best = {r.z, cost, viol, false, total_iters};
    } else {
      last = {r.z, cost, viol, false, total_iters};
    }
  }

  Candidate out = best.viol <= cfg.feas_tol ? best : last;
  out.iterations = total_iters;
  return out;
}

}  // namespace

std::pair<double, std::vector<ConstraintResidual>> evaluate(
    const HorizonProblem& problem, const std::vector<Vector>& controls) {
  problem.validate();
  if (static_cast<int>(controls.size()) != problem.horizon) {
    throw std::invalid_argument("evaluate: control sequence length != horizon");
  }
  Shooter sh(problem);
  std::vector<Vector> x;
  if (!sh.rollout(controls, x)) {
    throw std::domain_error("evaluate: non-finite rollout");
  }
  std::vector<ConstraintResidual> residuals;
  if (sh.has_E) residuals.push_back({"itec_window", std::max(0.0, sh.g_energy(controls))});
  if (sh.has_T) residuals.push_back({"terminal", std::max(0.0, sh.g_terminal(x))});
  if (problem.input_set.kind == InputSetKind::box) {
    double v = 0.0;
    for (const auto& u : controls) v = std::max(v, problem.input_set.violation(u));
    residuals.push_back({"input_box", v});
  }
  return {sh.cost(controls, x), std::move(residuals)};
}

Vector gradient(const HorizonProblem& problem, const std::vector<Vector>& controls) {
  problem.validate();
  if (static_cast<int>(controls.size()) != problem.horizon) {
    throw std::invalid_argument("gradient: control sequence length != horizon");
  }
  Shooter sh(problem);
  std::vector<Vector> x;
  std::vector<Matrix> A, B;
  if (!sh.rollout_jac(controls, x, A, B)) {
    throw std::domain_error("gradient: non-finite rollout");
  }
  return sh.weighted_grad(controls, x, A, B, 1.0, 0.0, 0.0);
}

SolveResult solve(const HorizonProblem& problem, const SolverConfig& config,
                  const std::vector<Vector>& warm_start) {
  problem.validate();
  const int h = problem.horizon;
  const int m = problem.system->input_dim();
  Shooter sh(problem);

  std::vector<Vector> starts;
  if (!warm_start.empty()) {
    if (static_cast<int>(warm_start.size()) != h) {
      throw std::invalid_argument("solve: warm start length != horizon");
    }
    starts.push_back(pack(warm_start, h, m));
  } else {
    starts.push_back(Vector::Zero(h * m));
  }
  if (config.restarts > 0) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double scale = std::max(1.0, problem.x_init.norm());
    for (int r = 0; r < config.restarts; ++r) {
      Vector z(h * m);
      for (int i = 0; i < z.size(); ++i) z[i] = scale * dist(rng);
      starts.push_back(std::move(z));
    }
  }

  Candidate best;
  for (auto& s : starts) {
    Candidate c = al_descent(sh, problem.input_set, config, std::move(s), true);
    const bool c_feas = c.viol <= config.feas_tol;
    const bool b_feas = best.viol <= config.feas_tol;
    if ((c_feas && !b_feas) || (c_feas == b_feas && (c_feas ? c.cost < best.cost
                                                           : c.viol < best.viol))) {
      c.iterations += best.iterations;
      best = std::move(c);
    } else {
      best.iterations += c.iterations;
    }
  }

  SolveResult res;
  res.controls = unpack(best.z, h, m);
  double cost, viol;
  measure(sh, best.z, cost, viol);
  res.cost = cost;
  res.max_constraint_violation = std::max(0.0, viol);
  res.iterations = best.iterations;
  if (viol <= config.feas_tol) {
    res.status = best.converged ? SolveStatus::optimal : SolveStatus::feasible_suboptimal;
  } else {
    res.status = std::isfinite(viol) ? SolveStatus::infeasible : SolveStatus::max_iter;
  }
  return res;
}

}  // namespace irhc
