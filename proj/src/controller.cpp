#include "irhc/controller.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace irhc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<Vector> RunRecord::applied_controls() const {
  std::vector<Vector> u;
  u.reserve(rows.size());
  for (const auto& r : rows) u.push_back(r.u);
  return u;
}

std::vector<double> RunRecord::itec_window_energies(int N) const {
  std::vector<double> energies;
  for (int p = 1;; ++p) {
    const int start = (2 * p - 1) * N;
    const int end = 2 * p * N - 1;  // inclusive
    if (end >= static_cast<int>(rows.size())) break;
    double e = 0.0;
    for (int j = start; j <= end; ++j) e += rows[j].u.squaredNorm();
    energies.push_back(e);
  }
  return energies;
}

std::string RunRecord::to_csv() const {
  std::ostringstream out;
  const int n = rows.empty() ? 0 : static_cast<int>(rows.front().x.size());
  const int m = rows.empty() ? 0 : static_cast<int>(rows.front().u.size());
  out << "k";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int i = 0; i < m; ++i) out << ",u" << i;
  out << ",h,gamma,i,terminal_bound,solver_status,stage_cost\n";
  for (const auto& r : rows) {
    out << r.k;
    for (int i = 0; i < n; ++i) out << ',' << fmt_double(r.x[i]);
    for (int i = 0; i < m; ++i) out << ',' << fmt_double(r.u[i]);
    out << ',' << r.h << ',' << fmt_double(r.gamma) << ',' << r.i << ','
        << fmt_double(r.terminal_bound) << ',' << r.solver_status << ','
        << fmt_double(r.stage_cost) << '\n';
  }
  return out.str();
}

RunRecord RunRecord::from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("run record: empty csv");

  // Header tells us the state/input dimensions.
  int n = 0, m = 0;
  {
    std::istringstream hdr(line);
    std::string col;
    while (std::getline(hdr, col, ',')) {
      if (col.size() >= 2 && col[0] == 'x' && std::isdigit(col[1])) ++n;
      if (col.size() >= 2 && col[0] == 'u' && std::isdigit(col[1])) ++m;
    }
  }
  if (n == 0 || m == 0) throw std::invalid_argument("run record: bad csv header");

  RunRecord rec;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ls, tok, ',')) toks.push_back(tok);
    if (static_cast<int>(toks.size()) != 1 + n + m + 6) {
      throw std::invalid_argument("run record: bad csv row");
    }
    StepRow r;
    std::size_t c = 0;
    r.k = std::stoi(toks[c++]);
    r.x.resize(n);
    for (int i = 0; i < n; ++i) r.x[i] = std::stod(toks[c++]);
    r.u.resize(m);
    for (int i = 0; i < m; ++i) r.u[i] = std::stod(toks[c++]);
    r.h = std::stoi(toks[c++]);
    r.gamma = std::stod(toks[c++]);
    r.i = std::stoi(toks[c++]);
    r.terminal_bound = std::stod(toks[c++]);
    r.solver_status = toks[c++];
    r.stage_cost = std::stod(toks[c++]);
    rec.rows.push_back(std::move(r));
  }
  rec.steps = static_cast<int>(rec.rows.size());
  for (const auto& r : rec.rows) rec.total_cost += r.stage_cost;
  return rec;
}

IrhcController::IrhcController(const DiscreteSystem& system, ControllerConfig cfg)
    : system_(&system), cfg_(std::move(cfg)) {
  if (cfg_.beta < 0.0 || cfg_.beta >= 1.0) {
    throw std::invalid_argument("controller: beta must lie in [0, 1)");
  }
  if (cfg_.itec.N < 1) throw std::invalid_argument("controller: N must be >= 1");
  if (cfg_.itec.C < 0.0) throw std::invalid_argument("controller: C must be >= 0");
}

ControllerState IrhcController::init(const Vector& x0) {
  const int N = cfg_.itec.N;
  ControllerState s;
  s.k = 0;
  s.h = 2 * N;
  s.gamma = 0.0;
  s.i = 0;
  s.f = 0;
  s.p = N;
  s.x0_norm_sq = x0.squaredNorm();
  s.beta = cfg_.beta;
  s.itec = cfg_.itec;
  s.mode = cfg_.mode;
  warm_.assign(s.h, Vector::Zero(system_->input_dim()));
  return s;
}

HorizonProblem IrhcController::build_problem(const ControllerState& state,
                                             const Vector& x_k) const {
  HorizonProblem P;
  P.x_init = x_k;
  P.horizon = state.h;
  P.system = system_;
  P.input_set = cfg_.input_set;
  if (state.mode == ControllerMode::itec) {
    EnergyWindow w;
    w.start_offset = std::max(state.p, state.k) - state.k;
    w.end_offset = state.p + state.itec.N - 1 - state.k;
    w.budget = std::max(0.0, state.itec.C - state.gamma);
    P.energy_window = w;
  }
  P.terminal_bound = std::pow(state.beta, state.i + 1) * state.x0_norm_sq;
  return P;
}

Vector IrhcController::step(ControllerState& state, const Vector& x_k, StepRow& row) {
  const int N = state.itec.N;
  const HorizonProblem problem = build_problem(state, x_k);
  if (static_cast<int>(warm_.size()) != state.h) {
    warm_.assign(state.h, Vector::Zero(system_->input_dim()));
  }
  const SolveResult res = solve(problem, cfg_.solver, warm_);

  row.k = state.k;
  row.x = x_k;
  row.h = state.h;
  row.gamma = state.gamma;
  row.i = state.i;
  row.terminal_bound = *problem.terminal_bound;
  row.solver_status = to_string(res.status);

  if (!res.feasible()) {
    throw ControllerError(state.k, x_k,
                          "infeasible horizon solve at step " + std::to_string(state.k) +
                              " (status " + to_string(res.status) + ")");
  }
  const Vector u1 = res.controls.front();
  row.u = u1;

  // γ accumulates exactly while the applied control lies in the active
  // ITEC window (the f flag is kept for trace fidelity only).
  if (state.mode == ControllerMode::itec && state.k >= state.p &&
      state.k < state.p + N) {
    state.gamma += u1.squaredNorm();
  }

  // Warm start for the next solve: shifted previous solution; a push
  // appends N zero controls (admissible since 0 ∈ U).
  warm_.assign(res.controls.begin() + 1, res.controls.end());

  state.h -= 1;
  if (state.h == N) {
    state.h = 2 * N;
    state.gamma = 0.0;
    warm_.insert(warm_.end(), N, Vector::Zero(system_->input_dim()));
    if (state.mode == ControllerMode::non_itec) {
      state.i += 1;  // contraction at every push
    } else if (state.k == state.p - 1) {
      state.i += 1;
      state.f = 1;
    } else if (state.k == state.p + N - 1) {
      state.p += 2 * N;
      state.f = 0;
    }
  }
  state.k += 1;
  return u1;
}

RunRecord IrhcController::run(const Vector& x0, int max_steps) {
  ControllerState state = init(x0);
  return run_closed_loop(
      *system_,
      [this, &state](int, const Vector& x, StepRow& row) { return step(state, x, row); },
      x0, max_steps, cfg_.convergence_eps, cfg_.divergence_factor);
}

RunRecord run_closed_loop(const DiscreteSystem& system, const StepPolicy& policy,
                          const Vector& x0, int max_steps, double convergence_eps,
                          double divergence_factor) {
  if (max_steps < 1) throw std::invalid_argument("run: max_steps must be >= 1");
  RunRecord rec;
  Vector x = x0;
  const double x0_norm = x0.norm();
  for (int k = 0; k < max_steps; ++k) {
    if (x.norm() < convergence_eps) {
      rec.converged = true;
      break;
    }
    if (!x.allFinite() || x.norm() > divergence_factor * x0_norm) {
      rec.diverged = true;
      break;
    }
    StepRow row;
    Vector u;
    try {
      u = policy(k, x, row);
    } catch (const ControllerError& e) {
      rec.aborted = true;
      rec.abort_step = e.step();
      rec.abort_reason = e.what();
      break;
    }
    const Vector x_next = system.step(x, u);
    row.stage_cost = x_next.squaredNorm() + u.squaredNorm();
    rec.rows.push_back(std::move(row));
    x = x_next;
  }
  if (!x.allFinite() || (x.allFinite() && x.norm() > divergence_factor * x0_norm)) {
    rec.diverged = true;
  }
  rec.x_final = x;
  rec.steps = static_cast<int>(rec.rows.size());
  for (const auto& r : rec.rows) rec.total_cost += r.stage_cost;
  return rec;
}

}  // namespace irhc
