#include "mfpg/config.hpp"

#include <set>

namespace mfpg {

namespace {

// Strict object reader: every key must be consumed before finish().
class Section {
 public:
  Section(const Json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  const Json& raw(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) throw ValidationError(where_ + ": missing key '" + key + "'");
    return *it;
  }

  double number(const char* key) {
    const Json& v = raw(key);
    if (!v.is_number()) throw ValidationError(path(key) + " must be a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) { return has(key) ? number(key) : fallback; }

  long integer(const char* key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(path(key) + " must be an integer");
    return v.get<long>();
  }
  long integer(const char* key, long fallback) { return has(key) ? integer(key) : fallback; }

  std::uint64_t seed(const char* key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long>() < 0)) {
      throw ValidationError(path(key) + " must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key) {
    const Json& v = raw(key);
    if (!v.is_string()) throw ValidationError(path(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  std::vector<double> numbers(const char* key) {
    const Json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw ValidationError(path(key) + " must be a number or a nonempty array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError(path(key) + " must contain only numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) throw ValidationError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const Json& node_;
  std::string where_;
  std::set<std::string> seen_;
};

Vector to_vector(const std::vector<double>& xs) {
  return Eigen::Map<const Vector>(xs.data(), static_cast<long>(xs.size()));
}

BanditSpec read_bandit(Section& sec) {
  BanditSpec spec;
  spec.ell = to_vector(sec.numbers("ell"));
  spec.lambda = sec.number("lambda");
  spec.tau = sec.number("tau");
  spec.sigma_u = sec.number("sigma_u", 1.0);
  spec.sigma = sec.number("sigma", 0.0);
  if (sec.has("m_u")) {
    const std::vector<double> mu = sec.numbers("m_u");
    spec.m_u = mu.size() == 1 ? Vector::Constant(spec.ell.size(), mu[0]) : to_vector(mu);
  } else {
    spec.m_u = Vector::Zero(spec.ell.size());
  }
  require_valid(spec);
  return spec;
}

int to_int(long v, const std::string& what) {
  if (v < 1 || v > 100000000) throw ValidationError(what + " out of range");
  return static_cast<int>(v);
}

}  // namespace

std::unique_ptr<FeatureMap> make_feature(const FeatureSpec& spec, int n_states, int n_actions) {
  if (spec.kind == "one_hidden") {
    return std::make_unique<OneHiddenLayerFeature>(n_states, n_actions, spec.hidden_dim, spec.scale_cap);
  }
  if (spec.kind == "random_tanh") {
    return std::make_unique<RandomTanhFeature>(n_states, n_actions, spec.hidden_dim, spec.scale_cap, spec.seed);
  }
  throw ValidationError("unknown feature kind '" + spec.kind + "' (expected one_hidden or random_tanh)");
}

ExperimentConfig parse_experiment_config(const Json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  Section top(doc, "config");

  const Json& model = top.raw("mdp");
  if (model.is_string()) {
    cfg.mdp_path = base_dir / model.get<std::string>();
  } else {
    Section inline_model(model, "config.mdp");
    Section cross(inline_model.raw("bandit_crosscheck"), "config.mdp.bandit_crosscheck");
    CrosscheckSpec cs;
    cs.grid = to_int(cross.integer("grid", 64), "config.mdp.bandit_crosscheck.grid");
    cs.bandit = read_bandit(cross);
    cross.finish();
    inline_model.finish();
    cfg.crosscheck = cs;
  }

  if (top.has("feature")) {
    Section f(top.raw("feature"), "config.feature");
    FeatureSpec fs;
    fs.kind = f.text("kind");
    fs.hidden_dim = to_int(f.integer("hidden_dim", 2), "config.feature.hidden_dim");
    fs.scale_cap = f.number("scale_cap", 1.0);
    fs.seed = f.seed("seed", 0);
    f.finish();
    cfg.feature = fs;
  } else if (!cfg.crosscheck) {
    throw ValidationError("config: missing key 'feature'");
  }
  if (cfg.feature && cfg.crosscheck) {
    throw ValidationError("config: 'feature' is fixed by mdp.bandit_crosscheck and must be omitted");
  }

  {
    Section fl(top.raw("flow"), "config.flow");
    cfg.flow.tau = fl.number("tau");
    cfg.flow.sigma = fl.number("sigma");
    cfg.flow.eta = fl.number("eta");
    cfg.flow.m = to_int(fl.integer("m"), "config.flow.m");
    cfg.flow.steps = fl.integer("steps");
    cfg.flow.seed = fl.seed("seed", 0);
    cfg.flow.record_every = fl.integer("record_every", 1);
    fl.finish();
  }
  if (top.has("prior")) {
    Section pr(top.raw("prior"), "config.prior");
    cfg.flow.prior_mean = pr.has("mean") ? pr.numbers("mean") : std::vector<double>{0.0};
    cfg.flow.prior_scale = pr.number("scale", 1.0);
    pr.finish();
  }
  require_valid(cfg.flow);

  if (top.has("init")) {
    Section in(top.raw("init"), "config.init");
    const std::string kind = in.text("kind", "prior");
    if (kind == "file") {
      cfg.init_path = base_dir / in.text("path");
    } else if (kind != "prior") {
      throw ValidationError("config.init.kind must be 'prior' or 'file'");
    }
    in.finish();
  }

  if (top.has("diagnostics")) {
    const Json& list = top.raw("diagnostics");
    if (!list.is_array()) throw ValidationError("config.diagnostics must be an array of names");
    for (const auto& item : list) {
      if (!item.is_string()) throw ValidationError("config.diagnostics must be an array of names");
      const std::string name = item.get<std::string>();
      if (name != "stationarity_residual") {
        throw ValidationError("config.diagnostics: unknown diagnostic '" + name + "'");
      }
      cfg.diagnostics.push_back(name);
    }
  }
  if (top.has("reference_cloud")) cfg.reference_cloud = base_dir / top.text("reference_cloud");
  if (top.has("kl_method")) cfg.kl_method = parse_kl_method(top.text("kl_method"));
  if (top.has("w2_method")) cfg.w2_method = parse_wasserstein_method(top.text("w2_method"));

  if (top.has("probe")) {
    Section pb(top.raw("probe"), "config.probe");
    cfg.probe.n_pairs = to_int(pb.integer("pairs", 100), "config.probe.pairs");
    cfg.probe.seed = pb.seed("seed", 0);
    cfg.probe.m = to_int(pb.integer("m", 4), "config.probe.m");
    cfg.probe.spread = pb.number("spread", 1.0);
    pb.finish();
  }
  if (top.has("derivatives")) {
    Section dv(top.raw("derivatives"), "config.derivatives");
    cfg.derivatives.cases = to_int(dv.integer("cases", 10), "config.derivatives.cases");
    cfg.derivatives.seed = dv.seed("seed", 0);
    cfg.derivatives.m = to_int(dv.integer("m", 4), "config.derivatives.m");
    cfg.derivatives.spread = dv.number("spread", 1.0);
    dv.finish();
  }
  if (top.has("sensitivity")) {
    Section se(top.raw("sensitivity"), "config.sensitivity");
    SensitivitySpec ss;
    ss.sigma_prime = se.number("sigma_prime", cfg.flow.sigma);
    ss.tau_prime = se.number("tau_prime", cfg.flow.tau);
    ss.hat_tau = se.number("hat_tau", cfg.flow.tau);
    if (se.has("young_ell")) ss.young_ell = se.number("young_ell");
    const std::string init = se.text("init_prime", "same");
    if (init != "same" && init != "independent") {
      throw ValidationError("config.sensitivity.init_prime must be 'same' or 'independent'");
    }
    ss.independent_init = init == "independent";
    se.finish();
    if (!(ss.sigma_prime >= 0.0) || !(ss.tau_prime >= 0.0) || !(ss.hat_tau >= 0.0)) {
      throw ValidationError("config.sensitivity: sigma_prime, tau_prime and hat_tau must be >= 0");
    }
    cfg.sensitivity = ss;
  }
  if (top.has("output_dir")) cfg.output_dir = base_dir / top.text("output_dir");
  top.finish();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return parse_experiment_config(doc, path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Model load_model(const ExperimentConfig& config) {
  Model out;
  if (config.crosscheck) {
    CrosscheckModel cm = crosscheck_model(config.crosscheck->bandit, config.crosscheck->grid);
    out.mdp = std::move(cm.mdp);
    out.feature = std::make_unique<ClippedQuadraticFeature>(std::move(cm.feature));
    return out;
  }
  out.mdp = load_mdp(*config.mdp_path);
  out.feature = make_feature(*config.feature, out.mdp.n_states, out.mdp.n_actions);
  return out;
}

ParticleCloud initial_cloud(const ExperimentConfig& config, int dim) {
  if (config.init_path) {
    ParticleCloud c = load_cloud(*config.init_path);
    if (c.dim() != dim) throw ValidationError("initial cloud dimension does not match the feature map");
    if (c.size() != config.flow.m) throw ValidationError("initial cloud size does not match flow.m");
    return c;
  }
  return sample_prior(config.flow.prior(dim), config.flow.m, config.flow.seed);
}

BanditRunSpec parse_bandit_spec(const Json& doc) {
  Section top(doc, "bandit");
  BanditRunSpec out;
  out.spec = read_bandit(top);
  out.m = to_int(top.integer("m", 1000), "bandit.m");
  out.eta = top.number("eta", 1e-3);
  out.steps = top.integer("steps", 1000);
  out.seed = top.seed("seed", 0);
  out.record_every = top.integer("record_every", 10);
  if (top.has("fit_window")) {
    const Json& w = top.raw("fit_window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw ValidationError("bandit.fit_window must be [t_lo, t_hi]");
    }
    out.fit_t_lo = w[0].get<double>();
    out.fit_t_hi = w[1].get<double>();
  }
  out.reference_sample = static_cast<int>(top.integer("reference_sample", 0));
  top.finish();
  if (!(out.eta > 0.0)) throw ValidationError("bandit.eta must be > 0");
  if (out.steps < 0) throw ValidationError("bandit.steps must be >= 0");
  if (out.record_every < 1) throw ValidationError("bandit.record_every must be >= 1");
  if (out.reference_sample < 0) throw ValidationError("bandit.reference_sample must be >= 0");
  return out;
}

BanditRunSpec load_bandit_spec(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return parse_bandit_spec(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Json cloud_to_json(const ParticleCloud& cloud) {
  Json particles = Json::array();
  for (int i = 0; i < cloud.size(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < cloud.dim(); ++k) row.push_back(cloud.particles(i, k));
    particles.push_back(row);
  }
  return Json{{"m", cloud.size()}, {"d", cloud.dim()}, {"weights", to_json(cloud.weights)}, {"particles", particles}};
}

ParticleCloud cloud_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("cloud: expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    static const std::set<std::string> known = {"m", "d", "weights", "particles", "step", "time"};
    if (!known.count(key)) throw ValidationError("cloud: unknown key '" + key + "'");
  }
  if (!doc.contains("particles") || !doc["particles"].is_array() || doc["particles"].empty()) {
    throw ValidationError("cloud: 'particles' must be a nonempty array");
  }
  const Json& ps = doc["particles"];
  const long m = static_cast<long>(ps.size());
  if (!ps[0].is_array() || ps[0].empty()) throw ValidationError("cloud: particles must be arrays");
  const long d = static_cast<long>(ps[0].size());
  RowMatrix theta(m, d);
  for (long i = 0; i < m; ++i) {
    if (!ps[i].is_array() || static_cast<long>(ps[i].size()) != d) throw ValidationError("cloud: ragged particles");
    for (long k = 0; k < d; ++k) {
      if (!ps[i][k].is_number()) throw ValidationError("cloud: particle entries must be numbers");
      theta(i, k) = ps[i][k].get<double>();
    }
  }
  ParticleCloud c = ParticleCloud::uniform(std::move(theta));
  if (doc.contains("weights")) {
    const Json& w = doc["weights"];
    if (!w.is_array() || static_cast<long>(w.size()) != m) throw ValidationError("cloud: weights length mismatch");
    for (long i = 0; i < m; ++i) {
      if (!w[i].is_number()) throw ValidationError("cloud: weights must be numbers");
      c.weights(i) = w[i].get<double>();
    }
  }
  require_valid(c);
  return c;
}

ParticleCloud load_cloud(const std::filesystem::path& path) {
  try {
    return cloud_from_json(read_json_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace mfpg
