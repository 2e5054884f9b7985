#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irhc/controller.hpp"

namespace irhc {

/// Empirical stabilizability certificate: on every tested sample, N-step
/// control sequences exist that contract the state by β (non-ITEC block)
/// or keep it from growing under budget C (ITEC block), both at cost at
/// most σ‖x‖². A falsifiable sample-based claim, not a proof.
struct Certificate {
  double beta = 0.0;
  double sigma = 0.0;
  int N = 1;
  double C = 0.0;
  double ball_radius = 0.0;
  std::vector<Vector> sample_states;
  bool all_feasible = false;
};

struct CertifyResult {
  bool feasible = false;
  std::vector<Vector> witness;
  double cost = 0.0;  // rollout cost of the witness
};

/// Membership test for U_N(x, σ, β): rollout cost ≤ σ‖x‖², inputs in U,
/// ‖x(+N)‖² ≤ β‖x‖².
CertifyResult certify_contractive(const DiscreteSystem& system, const Vector& x,
                                  double beta, int N, double sigma,
                                  const InputSet& input_set, const SolverConfig& solver = {});

/// Membership test for U_N^C(x, σ): cost bound, inputs in U, non-growth
/// ‖x(+N)‖² ≤ ‖x‖², window energy ≤ C.
CertifyResult certify_itec(const DiscreteSystem& system, const Vector& x, int N,
                           double C, double sigma, const InputSet& input_set,
                           const SolverConfig& solver = {});

/// Smallest σ on a bisection grid (1% relative) for which both
/// certifications pass on every sample. Throws when no σ up to the cap
/// certifies.
double estimate_sigma(const DiscreteSystem& system, const std::vector<Vector>& samples,
                      double beta, int N, double C, const InputSet& input_set,
                      const SolverConfig& solver = {}, double sigma_cap = 1e6);

/// Deterministic sample set: `directions` seeded random unit directions at
/// `radii` evenly spaced radii up to ball_radius.
std::vector<Vector> sample_ball(int state_dim, double ball_radius, int directions,
                                int radii, std::uint64_t seed);

/// Γ_q values of a run, split into the five terms of the monotonicity
/// argument plus the closed-form geometric tail.
struct GammaSplit {
  double g1 = 0.0;  // cost through (q−1)N
  double g2 = 0.0;  // cost over ((q−1)N, qN]
  double g3 = 0.0;  // cost over (qN, (q+1)N]
  double g4 = 0.0;  // β^{⌈(q+1)/2⌉}σ‖x(0)‖²
  double g5 = 0.0;  // tail from j = q+2
};

struct GammaSequence {
  std::vector<double> values;       // Γ_q, q = 1..Q
  std::vector<GammaSplit> splits;   // same indexing
  double sigma_used = 0.0;
  double bound = 0.0;  // (1+β)/(1−β)·σ‖x(0)‖²
};

/// Closed-form Σ_{j=start}^{∞} β^{⌈j/2⌉} (geometric series split by parity).
double gamma_tail_sum(double beta, int start);

/// Builds each v_q (applied controls through step (q+1)N, zeros after),
/// rolls it out independently, and evaluates Γ_q. The first tail_terms
/// tail entries are summed explicitly, the remainder in closed form.
GammaSequence gamma_sequence(const RunRecord& record, const DiscreteSystem& system,
                             double sigma, double beta, int N, int tail_terms = 0);

struct BoundCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // slack; negative when the check fails
};

struct BoundsReport {
  std::vector<BoundCheck> checks;
  GammaSequence gammas;
  double truncated_cost = 0.0;
  bool all_pass = false;
};

/// Lemma/theorem diagnostics on a produced run: Γ decomposition identity,
/// telescoping and tail identities, Γ monotonicity, the infinite-horizon
/// cost bound, and the closed-loop contraction envelope.
BoundsReport check_bounds(const RunRecord& record, const DiscreteSystem& system,
                          const Certificate& certificate);

}  // namespace irhc
