#include "irhc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace irhc {

namespace {

CertifyResult membership(const DiscreteSystem& system, const Vector& x, int N,
                         double sigma, const InputSet& input_set,
                         const SolverConfig& solver, double terminal_bound,
                         std::optional<double> window_budget) {
  CertifyResult out;
  if (x.squaredNorm() == 0.0) {
    out.feasible = true;
    out.witness.assign(N, Vector::Zero(system.input_dim()));
    out.cost = 0.0;
    return out;
  }
  HorizonProblem P;
  P.x_init = x;
  P.horizon = N;
  P.system = &system;
  P.input_set = input_set;
  P.terminal_bound = terminal_bound;
  if (window_budget) P.energy_window = EnergyWindow{0, N - 1, *window_budget};

  const SolveResult res = solve(P, solver);
  out.witness = res.controls;
  out.cost = res.cost;
  out.feasible = res.feasible() && res.cost <= sigma * x.squaredNorm() + 1e-9;
  return out;
}

}  // namespace

CertifyResult certify_contractive(const DiscreteSystem& system, const Vector& x,
                                  double beta, int N, double sigma,
                                  const InputSet& input_set, const SolverConfig& solver) {
  if (sigma <= 0.0) throw std::invalid_argument("certify: sigma must be positive");
  if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("certify: beta in [0,1)");
  return membership(system, x, N, sigma, input_set, solver, beta * x.squaredNorm(),
                    std::nullopt);
}

CertifyResult certify_itec(const DiscreteSystem& system, const Vector& x, int N,
                           double C, double sigma, const InputSet& input_set,
                           const SolverConfig& solver) {
  if (sigma <= 0.0) throw std::invalid_argument("certify: sigma must be positive");
  if (C < 0.0) throw std::invalid_argument("certify: C must be >= 0");
  return membership(system, x, N, sigma, input_set, solver, x.squaredNorm(), C);
}

double estimate_sigma(const DiscreteSystem& system, const std::vector<Vector>& samples,
                      double beta, int N, double C, const InputSet& input_set,
                      const SolverConfig& solver, double sigma_cap) {
  if (samples.empty()) throw std::invalid_argument("estimate_sigma: no samples");

  // Feasibility in sigma is monotone: for each sample, the minimal
  // certifiable sigma is (minimum rollout cost under the remaining
  // constraints) / ‖x‖², so one solve per sample and membership type
  // pins the whole predicate.
  double needed = 0.0;
  for (const auto& x : samples) {
    const double xn = x.squaredNorm();
    if (xn == 0.0) throw std::invalid_argument("estimate_sigma: zero sample state");
    const auto contr =
        membership(system, x, N, sigma_cap, input_set, solver, beta * xn, std::nullopt);
    const auto itec = membership(system, x, N, sigma_cap, input_set, solver, xn, C);
    if (!contr.feasible || !itec.feasible) {
      throw std::runtime_error("estimate_sigma: certification failed (no sigma up to cap)");
    }
    needed = std::max(needed, std::max(contr.cost, itec.cost) / xn);
  }
  if (needed > sigma_cap) {
    throw std::runtime_error("estimate_sigma: required sigma exceeds cap");
  }

  // Bisection grid with 1% relative tolerance; return the smallest
  // passing grid value.
  double lo = 0.0, hi = sigma_cap;
  while (hi - lo > 0.01 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid >= needed) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<Vector> sample_ball(int state_dim, double ball_radius, int directions,
                                int radii, std::uint64_t seed) {
  if (ball_radius <= 0.0 || directions < 1 || radii < 1) {
    throw std::invalid_argument("sample_ball: bad parameters");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<Vector> samples;
  samples.reserve(static_cast<std::size_t>(directions) * radii);
  for (int d = 0; d < directions; ++d) {
    Vector dir(state_dim);
    do {
      for (int i = 0; i < state_dim; ++i) dir[i] = dist(rng);
    } while (dir.norm() < 1e-12);
    dir.normalize();
    for (int t = 1; t <= radii; ++t) {
      samples.push_back(dir * (ball_radius * t / radii));
    }
  }
  return samples;
}

double gamma_tail_sum(double beta, int start) {
  if (start < 1) throw std::invalid_argument("gamma_tail_sum: start must be >= 1");
  if (beta == 0.0) return 0.0;
  if (start % 2 == 0) {
    const int i = start / 2;
    return std::pow(beta, i) + 2.0 * std::pow(beta, i + 1) / (1.0 - beta);
  }
  const int i = (start + 1) / 2;
  return 2.0 * std::pow(beta, i) / (1.0 - beta);
}

GammaSequence gamma_sequence(const RunRecord& record, const DiscreteSystem& system,
                             double sigma, double beta, int N, int tail_terms) {
  if (record.rows.empty()) throw std::invalid_argument("gamma_sequence: empty run");
  if (N < 1 || tail_terms < 0) throw std::invalid_argument("gamma_sequence: bad parameters");

  GammaSequence gs;
  gs.sigma_used = sigma;
  const Vector x0 = record.rows.front().x;
  const double x0n = x0.squaredNorm();
  gs.bound = (1.0 + beta) / (1.0 - beta) * sigma * x0n;

  const int steps = static_cast<int>(record.rows.size());
  const int Q = steps / N - 1;
  if (Q < 1) return gs;

  // v_q agrees with the applied controls through step (q+1)N−1 and is
  // zero after, so one rollout of the longest prefix serves every q.
  std::vector<Vector> controls = record.applied_controls();
  controls.resize((Q + 1) * N);
  const Trajectory traj = simulate(system, x0, controls);

  // prefix[j] = Σ_{l=1..j} ‖x(l)‖² + ‖v(l−1)‖²
  std::vector<double> prefix(traj.controls.size() + 1, 0.0);
  for (std::size_t l = 0; l < traj.controls.size(); ++l) {
    prefix[l + 1] =
        prefix[l] + traj.states[l + 1].squaredNorm() + traj.controls[l].squaredNorm();
  }

  for (int q = 1; q <= Q; ++q) {
    // Direct route: truncated rollout cost plus the geometric tail, the
    // first tail_terms entries summed explicitly.
    double tail = 0.0;
    for (int j = q + 1; j < q + 1 + tail_terms; ++j) {
      tail += std::pow(beta, (j + 1) / 2);
    }
    tail += gamma_tail_sum(beta, q + 1 + tail_terms);
    gs.values.push_back(prefix[(q + 1) * N] + tail * sigma * x0n);

    GammaSplit sp;
    sp.g1 = prefix[(q - 1) * N];
    sp.g2 = prefix[q * N] - prefix[(q - 1) * N];
    sp.g3 = prefix[(q + 1) * N] - prefix[q * N];
    sp.g4 = std::pow(beta, (q + 2) / 2) * sigma * x0n;  // ⌈(q+1)/2⌉
    sp.g5 = gamma_tail_sum(beta, q + 2) * sigma * x0n;
    gs.splits.push_back(sp);
  }
  return gs;
}

namespace {

BoundCheck min_margin_check(const std::string& name, const std::vector<double>& slacks) {
  BoundCheck c;
  c.name = name;
  if (slacks.empty()) {
    c.pass = true;
    c.margin = 0.0;
    return c;
  }
  c.margin = *std::min_element(slacks.begin(), slacks.end());
  c.pass = c.margin >= 0.0;
  return c;
}

}  // namespace

BoundsReport check_bounds(const RunRecord& record, const DiscreteSystem& system,
                          const Certificate& certificate) {
  const double beta = certificate.beta;
  const double sigma = certificate.sigma;
  const int N = certificate.N;

  BoundsReport rep;
  rep.gammas = gamma_sequence(record, system, sigma, beta, N);
  rep.truncated_cost = record.total_cost;
  const auto& G = rep.gammas.values;
  const auto& S = rep.gammas.splits;
  const int Q = static_cast<int>(G.size());

  const double rel = 1e-9;
  std::vector<double> s_decomp, s_tele, s_tail, s_mono, s_block, s_bound;
  for (int q = 0; q < Q; ++q) {
    const double split_sum = S[q].g1 + S[q].g2 + S[q].g3 + S[q].g4 + S[q].g5;
    s_decomp.push_back(rel * std::max(1.0, std::abs(G[q])) - std::abs(G[q] - split_sum));
    s_bound.push_back(rep.gammas.bound - G[q]);
  }
  for (int q = 0; q + 1 < Q; ++q) {
    const double scale = std::max(1.0, std::abs(G[q]));
    s_tele.push_back(rel * scale - std::abs(S[q + 1].g1 - (S[q].g1 + S[q].g2)));
    s_tail.push_back(rel * scale - std::abs(S[q + 1].g4 + S[q + 1].g5 - S[q].g5));
    s_mono.push_back(G[q] + 1e-9 - G[q + 1]);
    s_block.push_back(S[q].g3 + S[q].g4 + 1e-9 - (S[q + 1].g2 + S[q + 1].g3));
  }
  rep.checks.push_back(min_margin_check("gamma_decomposition", s_decomp));
  rep.checks.push_back(min_margin_check("gamma1_telescoping", s_tele));
  rep.checks.push_back(min_margin_check("tail_identity", s_tail));
  rep.checks.push_back(min_margin_check("gamma_monotone", s_mono));
  rep.checks.push_back(min_margin_check("block_inequality", s_block));
  rep.checks.push_back(min_margin_check("gamma_bounded", s_bound));

  BoundCheck cost;
  cost.name = "cost_bound";
  cost.margin = rep.gammas.bound - rep.truncated_cost;
  cost.pass = cost.margin >= 0.0;
  rep.checks.push_back(cost);

  // Closed-loop contraction envelope ‖x(mN)‖² ≤ β^{⌈m/2⌉}‖x(0)‖², m ≥ 2.
  std::vector<double> s_env;
  const double x0n = record.rows.front().x.squaredNorm();
  const int steps = static_cast<int>(record.rows.size());
  for (int m = 2; m * N <= steps; ++m) {
    Vector xm;
    if (m * N < steps) {
      xm = record.rows[m * N].x;
    } else if (record.x_final.size() > 0) {
      xm = record.x_final;
    } else {
      break;
    }
    s_env.push_back(std::pow(beta, (m + 1) / 2) * x0n + 1e-6 - xm.squaredNorm());
  }
  rep.checks.push_back(min_margin_check("contraction_envelope", s_env));

  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const BoundCheck& c) { return c.pass; });
  return rep;
}

}  // namespace irhc
