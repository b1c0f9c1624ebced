#pragma once

#include "mfpg/mdp.hpp"

#include <utility>

namespace mfpg {

struct ValueFunctions {
  Vector v;  // V[s]
  Matrix q;  // Q[s][a] = r + gamma P V
  double tau = 0.0;
};

/// Exact regularized policy evaluation by a linear solve:
/// V = sum_a pi [r - tau ln(pi/mu) + gamma P V].
ValueFunctions policy_evaluate(const FiniteMdp& mdp, const TabularPolicy& pi, double tau);

/// Q = r + gamma * P V for a given V.
Matrix state_action_values(const FiniteMdp& mdp, const Vector& v);

struct SoftDpOptions {
  double tol = 1e-12;
  long max_iter = 1000000;
};

struct SoftDpResult {
  ValueFunctions values;
  TabularPolicy policy;
  long iterations = 0;
  double last_change = 0.0;
};

/// Soft (tau > 0) or hard (tau = 0) value iteration. Throws NumericalError
/// carrying the last sup-norm change when max_iter runs out.
SoftDpResult soft_value_iteration(const FiniteMdp& mdp, double tau, const SoftDpOptions& opts = {});

/// One application of the optimal regularized Bellman operator.
Vector soft_bellman(const FiniteMdp& mdp, const Vector& v, double tau);

/// sup_s |T V - V|.
double bellman_residual(const FiniteMdp& mdp, const Vector& v, double tau);

/// max_s |V_tau - V_0 + tau/(1-gamma) sum_s' d(s'|s) KL(pi(.|s')|mu)|.
double kl_decomposition_check(const FiniteMdp& mdp, const TabularPolicy& pi, double tau);

/// KL(pi(.|s) | mu) per state with unnormalized mu.
Vector policy_kl(const TabularPolicy& pi, const FiniteMdp& mdp);

}  // namespace mfpg
