#pragma once

#include "mfpg/bandit.hpp"
#include "mfpg/cloud.hpp"
#include "mfpg/estimators.hpp"
#include "mfpg/features.hpp"
#include "mfpg/flow.hpp"
#include "mfpg/io.hpp"
#include "mfpg/mdp.hpp"
#include "mfpg/wasserstein.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mfpg {

struct FeatureSpec {
  std::string kind = "one_hidden";
  int hidden_dim = 2;
  double scale_cap = 1.0;
  std::uint64_t seed = 0;
};

std::unique_ptr<FeatureMap> make_feature(const FeatureSpec& spec, int n_states, int n_actions);

struct CrosscheckSpec {
  BanditSpec bandit;
  int grid = 64;
};

struct DerivativeSpec {
  int cases = 10;
  std::uint64_t seed = 0;
  int m = 4;
  double spread = 1.0;
};

struct SensitivitySpec {
  double sigma_prime = 0.0;
  double tau_prime = 0.0;
  double hat_tau = 0.0;
  std::optional<double> young_ell;
  bool independent_init = false;  // draw nu'_0 with a different seed
};

/// Shared config document for train, check-derivatives, probe-lipschitz and
/// sensitivity. Unknown keys are rejected at every level.
struct ExperimentConfig {
  std::filesystem::path base_dir;
  std::optional<std::filesystem::path> mdp_path;
  std::optional<CrosscheckSpec> crosscheck;
  std::optional<FeatureSpec> feature;
  FlowConfig flow;
  std::optional<std::filesystem::path> init_path;  // init.kind = "file"
  std::vector<std::string> diagnostics;
  std::optional<std::filesystem::path> reference_cloud;
  KlMethod kl_method = KlMethod::gaussian_proxy;
  WassersteinMethod w2_method = WassersteinMethod::automatic;
  LipschitzOptions probe;
  DerivativeSpec derivatives;
  std::optional<SensitivitySpec> sensitivity;
  std::optional<std::filesystem::path> output_dir;
};

ExperimentConfig parse_experiment_config(const Json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct Model {
  FiniteMdp mdp;
  std::unique_ptr<FeatureMap> feature;
};

Model load_model(const ExperimentConfig& config);

/// Initial cloud: config file, or m draws from the prior keyed by the seed.
ParticleCloud initial_cloud(const ExperimentConfig& config, int dim);

struct BanditRunSpec {
  BanditSpec spec;
  int m = 1000;
  double eta = 1e-3;
  long steps = 1000;
  std::uint64_t seed = 0;
  long record_every = 10;
  double fit_t_lo = 0.0;
  std::optional<double> fit_t_hi;
  int reference_sample = 0;  // >0: second-opinion W2 against a seeded nu* sample
};

BanditRunSpec parse_bandit_spec(const Json& doc);
BanditRunSpec load_bandit_spec(const std::filesystem::path& path);

Json cloud_to_json(const ParticleCloud& cloud);
ParticleCloud cloud_from_json(const Json& doc);
ParticleCloud load_cloud(const std::filesystem::path& path);

}  // namespace mfpg
