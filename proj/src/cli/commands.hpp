#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace mfpg::cli {

struct SolveExactArgs {
  std::string mdp;
  double tau = 0.0;
  double tol = 1e-12;
  long max_iter = 1000000;
  std::string out;
};

struct ConfigArgs {
  std::string config;
  std::string out;
};

struct ConstantsArgs {
  double gamma = 0.0;
  double r_inf = 0.0;
  double tau = 0.0;
  double mu_total = 1.0;
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double kappa = 0.0;
  double sigma = 0.0;
  double psi_inf = 1.0;
  std::string mode = "generic";
  std::string out;
};

// Each returns an exit code; ValidationError and other exceptions propagate.
int run_solve_exact(const SolveExactArgs& args, std::ostream& out);
int run_train(const ConfigArgs& args, std::ostream& out);
int run_bandit(const ConfigArgs& args, std::ostream& out);
int run_check_derivatives(const ConfigArgs& args, std::ostream& out);
int run_probe_lipschitz(const ConfigArgs& args, std::ostream& out);
int run_constants(const ConstantsArgs& args, std::ostream& out);
int run_sensitivity(const ConfigArgs& args, std::ostream& out);

}  // namespace mfpg::cli
