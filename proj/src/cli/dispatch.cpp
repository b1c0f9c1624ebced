#include "mfpg/cli.hpp"

#include "CLI11.hpp"
#include "commands.hpp"
#include "mfpg/types.hpp"

#include <array>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace mfpg::cli {

namespace {

constexpr std::array<const char*, 7> kSubcommands = {"solve-exact",      "train",     "bandit",     "check-derivatives",
                                                     "probe-lipschitz", "constants", "sensitivity"};

bool is_subcommand(const std::string& name) {
  for (const char* s : kSubcommands) {
    if (name == s) return true;
  }
  return false;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-regularized MDPs and mean-field softmax policy-gradient particle flows", "mfpg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::function<int()> action;

  SolveExactArgs solve;
  auto* c_solve = app.add_subcommand("solve-exact", "Soft value iteration; writes V*, Q* and the optimal policy as JSON");
  c_solve->add_option("--mdp", solve.mdp, "MDP JSON file")->required();
  c_solve->add_option("--tau", solve.tau, "Entropy temperature (>= 0)")->required();
  c_solve->add_option("--tol", solve.tol, "Sup-norm stopping tolerance")->capture_default_str();
  c_solve->add_option("--max-iter", solve.max_iter, "Iteration cap")->capture_default_str();
  c_solve->add_option("--out", solve.out, "Output file (default: stdout)");
  c_solve->callback([&] { action = [&] { return run_solve_exact(solve, out); }; });

  ConfigArgs train;
  auto* c_train = app.add_subcommand("train", "Run the particle flow; writes trajectory.csv and final_cloud.json");
  c_train->add_option("--config", train.config, "Experiment config JSON")->required();
  c_train->add_option("--out", train.out, "Output directory (default: output_dir from the config)");
  c_train->callback([&] { action = [&] { return run_train(train, out); }; });

  ConfigArgs bandit;
  auto* c_bandit = app.add_subcommand("bandit", "Gaussian bandit flow against its closed form");
  c_bandit->add_option("--spec", bandit.config, "Bandit spec JSON")->required();
  c_bandit->add_option("--out", bandit.out, "Output directory")->required();
  c_bandit->callback([&] { action = [&] { return run_bandit(bandit, out); }; });

  ConfigArgs deriv;
  auto* c_deriv = app.add_subcommand("check-derivatives", "Flow gradient and policy derivative against finite differences");
  c_deriv->add_option("--config", deriv.config, "Experiment config JSON")->required();
  c_deriv->add_option("--out", deriv.out, "Output file (default: stdout)");
  c_deriv->callback([&] { action = [&] { return run_check_derivatives(deriv, out); }; });

  ConfigArgs lip;
  auto* c_lip = app.add_subcommand("probe-lipschitz", "Empirical Lipschitz ratio of the drift against L");
  c_lip->add_option("--config", lip.config, "Experiment config JSON")->required();
  c_lip->add_option("--out", lip.out, "Output file (default: stdout)");
  c_lip->callback([&] { action = [&] { return run_probe_lipschitz(lip, out); }; });

  ConstantsArgs cst;
  auto* c_cst = app.add_subcommand("constants", "Evaluate the bound constants C1, C2, L, D and beta");
  c_cst->add_option("--gamma", cst.gamma, "Discount factor in [0,1)")->required();
  c_cst->add_option("--r-inf", cst.r_inf, "Reward sup norm")->required();
  c_cst->add_option("--tau", cst.tau, "Entropy temperature")->required();
  c_cst->add_option("--mu-total", cst.mu_total, "Reference measure mass mu(A)")->capture_default_str();
  c_cst->add_option("--a0", cst.a0, "Feature norm |f|_A0");
  c_cst->add_option("--a1", cst.a1, "Feature norm |f|_A1");
  c_cst->add_option("--a2", cst.a2, "Feature norm |f|_A2");
  c_cst->add_option("--kappa", cst.kappa, "Prior dissipativity constant");
  c_cst->add_option("--sigma", cst.sigma, "Noise level");
  c_cst->add_option("--psi-inf", cst.psi_inf, "|psi|_inf (example42 mode)")->capture_default_str();
  c_cst->add_option("--mode", cst.mode, "generic or example42")
      ->check(CLI::IsMember({"generic", "example42"}))
      ->capture_default_str();
  c_cst->add_option("--out", cst.out, "Output file (default: stdout)");
  c_cst->callback([&] { action = [&] { return run_constants(cst, out); }; });

  ConfigArgs sens;
  auto* c_sens = app.add_subcommand("sensitivity", "Coupled flows: |V - V'| against C1 W2");
  c_sens->add_option("--config", sens.config, "Experiment config JSON")->required();
  c_sens->add_option("--out", sens.out, "Output file (default: stdout)");
  c_sens->callback([&] { action = [&] { return run_sensitivity(sens, out); }; });

  if (argc >= 2) {
    const std::string first = argv[1];
    if (!first.empty() && first[0] != '-' && !is_subcommand(first)) {
      err << "error: unknown subcommand '" << first << "'\n";
      err << "available: solve-exact, train, bandit, check-derivatives, probe-lipschitz, constants, sensitivity\n";
      return validation_failure;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return validation_failure;
  }

  try {
    return action();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return runtime_failure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return runtime_failure;
  }
}

}  // namespace mfpg::cli
