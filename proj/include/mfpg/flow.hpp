#pragma once

#include "mfpg/cloud.hpp"
#include "mfpg/features.hpp"
#include "mfpg/gradient.hpp"
#include "mfpg/mdp.hpp"
#include "mfpg/prior.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfpg {

struct FlowConfig {
  double tau = 0.0;
  double sigma = 0.0;
  double eta = 1e-3;
  int m = 1;
  long steps = 0;
  std::uint64_t seed = 0;
  long record_every = 1;
  std::vector<double> prior_mean{0.0};  // length 1 (broadcast) or d
  double prior_scale = 1.0;

  GaussianPrior prior(int dim) const;
};

void require_valid(const FlowConfig& config);

/// theta_i + eta (G_i - sigma^2/2 grad U(theta_i)) + sqrt(eta) sigma zeta_i, with
/// zeta keyed by (seed, step_index, i, k). Rejects non-uniform weights.
ParticleCloud step(const ParticleCloud& cloud, const RowMatrix& g, const FlowConfig& config, long step_index,
                   const GaussianPrior& prior);

/// m i.i.d. draws from N(mean, scale^2 I).
ParticleCloud sample_prior(const GaussianPrior& prior, int m, std::uint64_t seed);

struct ProbeContext {
  long step;
  double time;
  const ParticleCloud& cloud;
  const MeanFieldState& state;
  const RowMatrix& gradient;
};

struct Probe {
  std::string name;
  std::function<double(const ProbeContext&)> evaluate;
};

struct TrajectoryRecord {
  long step = 0;
  double time = 0.0;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::optional<ParticleCloud> snapshot;

  double get(const std::string& name) const;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  ParticleCloud final_cloud;
};

struct RunOptions {
  bool keep_snapshots = false;
};

/// Iterates flow_gradient + step. Records at step 0, every record_every steps,
/// and at the final step.
Trajectory run_flow(const FiniteMdp& mdp, const FeatureMap& features, const FlowConfig& config,
                    const ParticleCloud& init, const std::vector<Probe>& probes, const RunOptions& options = {});

}  // namespace mfpg
