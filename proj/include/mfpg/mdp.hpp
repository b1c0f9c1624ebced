#pragma once

#include "mfpg/types.hpp"

#include <string>
#include <vector>

namespace mfpg {

// Initial / occupancy distributions over states.
using StateDistribution = Vector;

/// Finite entropy-regularized Markov decision model.
///
/// States and actions are the index sets 0..n-1. The transition tensor is
/// stored densely as a (n_states * n_actions) x n_states matrix whose row
/// `s * n_actions + a` is P(. | s, a). The reference measure `mu` need not be
/// normalized; only strict positivity is required.
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  Matrix transition;  // (nS*nA) x nS
  Matrix reward;      // nS x nA
  Vector mu;          // nA
  StateDistribution rho;

  int row(int s, int a) const { return s * n_actions + a; }
  double p(int s, int a, int next) const { return transition(row(s, a), next); }
  double mu_total() const { return mu.sum(); }
  double reward_sup() const { return reward.cwiseAbs().maxCoeff(); }
};

/// Row-stochastic kernel pi(a|s), stored as an nS x nA matrix.
struct TabularPolicy {
  Matrix probs;

  int n_states() const { return static_cast<int>(probs.rows()); }
  int n_actions() const { return static_cast<int>(probs.cols()); }
  double operator()(int s, int a) const { return probs(s, a); }
  bool strictly_positive() const { return (probs.array() > 0.0).all(); }
};

struct Violation {
  std::string invariant;
  std::string location;

  std::string message() const { return invariant + " at " + location; }
};

std::vector<Violation> validate(const FiniteMdp& mdp);
std::vector<Violation> validate(const TabularPolicy& pi, const FiniteMdp& mdp);
bool is_distribution(const StateDistribution& d, double tol = 1e-12);

// Throws ValidationError listing every violation.
void require_valid(const FiniteMdp& mdp);
void require_valid(const TabularPolicy& pi, const FiniteMdp& mdp);

TabularPolicy uniform_policy(const FiniteMdp& mdp);
TabularPolicy reference_policy(const FiniteMdp& mdp);  // pi(.|s) = mu / mu(A)

/// State-to-state kernel P_pi[s][s'] = sum_a P[s][a][s'] pi(a|s).
Matrix policy_transition(const FiniteMdp& mdp, const TabularPolicy& pi);

/// Discounted occupancy d = (1-gamma) sum_n gamma^n start P_pi^n, via the
/// linear system d^T (I - gamma P_pi) = (1-gamma) start^T.
StateDistribution occupancy(const FiniteMdp& mdp, const TabularPolicy& pi,
                            const StateDistribution& start);

/// Row s holds d^pi(. | s).
Matrix occupancy_kernel(const FiniteMdp& mdp, const TabularPolicy& pi);

/// ln(pi(a|s) / mu(a)); rejects zero entries.
Matrix log_density(const TabularPolicy& pi, const FiniteMdp& mdp);

}  // namespace mfpg
