#include "doctest.h"
#include "mfpg/config.hpp"

#include <string>

using namespace mfpg;

namespace {

Json base_config() {
  return Json::parse(R"({
    "mdp": "three_state.json",
    "feature": {"kind": "one_hidden", "hidden_dim": 2},
    "flow": {"tau": 0.1, "sigma": 0.5, "eta": 0.01, "m": 16, "steps": 10, "seed": 4}
  })");
}

std::string validation_message(const Json& doc) {
  try {
    parse_experiment_config(doc, MFPG_DATA_DIR);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("experiment config: defaults and relative paths") {
  const ExperimentConfig cfg = parse_experiment_config(base_config(), MFPG_DATA_DIR);
  CHECK(cfg.mdp_path == std::filesystem::path(MFPG_DATA_DIR) / "three_state.json");
  CHECK(cfg.flow.m == 16);
  CHECK(cfg.flow.record_every == 1);
  CHECK(cfg.kl_method == KlMethod::gaussian_proxy);
  CHECK(cfg.w2_method == WassersteinMethod::automatic);
  CHECK_FALSE(cfg.sensitivity.has_value());
  const Model model = load_model(cfg);
  CHECK(model.mdp.n_states == 3);
  CHECK(model.feature->param_dim() == initial_cloud(cfg, model.feature->param_dim()).dim());
}

TEST_CASE("experiment config: fixture files load") {
  for (const char* name : {"train.json", "derivatives.json", "sensitivity.json"}) {
    const ExperimentConfig cfg = load_experiment_config(std::filesystem::path(MFPG_DATA_DIR) / name);
    CHECK_NOTHROW(load_model(cfg));
  }
  const ExperimentConfig sens = load_experiment_config(std::filesystem::path(MFPG_DATA_DIR) / "sensitivity.json");
  REQUIRE(sens.crosscheck.has_value());
  CHECK(sens.crosscheck->grid == 64);
  REQUIRE(sens.sensitivity.has_value());
  CHECK(sens.sensitivity->sigma_prime == 1.1);
  CHECK(sens.sensitivity->tau_prime == 1.0);
  const BanditRunSpec b = load_bandit_spec(std::filesystem::path(MFPG_DATA_DIR) / "bandit.json");
  CHECK(b.m == 10000);
  CHECK(b.fit_t_hi == 1.5);
}

TEST_CASE("experiment config: unknown keys are rejected at every level") {
  Json doc = base_config();
  doc["flwo"] = 1;
  CHECK(validation_message(doc).find("unknown key 'flwo'") != std::string::npos);
  doc = base_config();
  doc["flow"]["temperature"] = 1;
  CHECK(validation_message(doc).find("config.flow: unknown key 'temperature'") != std::string::npos);
  doc = base_config();
  doc["feature"]["depth"] = 3;
  CHECK(validation_message(doc).find("config.feature") != std::string::npos);
}

TEST_CASE("experiment config: type and range errors name the key") {
  Json doc = base_config();
  doc["flow"]["tau"] = "hot";
  CHECK(validation_message(doc).find("config.flow.tau must be a number") != std::string::npos);
  doc = base_config();
  doc["flow"]["m"] = 0;
  CHECK(validation_message(doc).find("config.flow.m") != std::string::npos);
  doc = base_config();
  doc["flow"]["seed"] = -1;
  CHECK(validation_message(doc).find("config.flow.seed") != std::string::npos);
  doc = base_config();
  doc["flow"].erase("eta");
  CHECK(validation_message(doc).find("missing key 'eta'") != std::string::npos);
  doc = base_config();
  doc["feature"]["kind"] = "spline";
  CHECK(validation_message(doc).empty());
  CHECK_THROWS_WITH_AS(load_model(parse_experiment_config(doc, MFPG_DATA_DIR)), doctest::Contains("spline"),
                       ValidationError);
  doc = base_config();
  doc["diagnostics"] = Json::array({"entropy"});
  CHECK(validation_message(doc).find("unknown diagnostic 'entropy'") != std::string::npos);
  doc = base_config();
  doc["w2_method"] = "sinkhorn";
  CHECK_FALSE(validation_message(doc).empty());
  doc = base_config();
  doc.erase("feature");
  CHECK(validation_message(doc).find("missing key 'feature'") != std::string::npos);
}

TEST_CASE("experiment config: a missing file or mdp names the path") {
  CHECK_THROWS_WITH_AS(load_experiment_config("no/such/config.json"), doctest::Contains("no/such/config.json"),
                       ValidationError);
  Json doc = base_config();
  doc["mdp"] = "absent.json";
  const ExperimentConfig cfg = parse_experiment_config(doc, MFPG_DATA_DIR);
  CHECK_THROWS_WITH_AS(load_model(cfg), doctest::Contains("absent.json"), ValidationError);
}

TEST_CASE("experiment config: inline crosscheck model forbids a feature") {
  Json doc = Json::parse(R"({
    "mdp": {"bandit_crosscheck": {"ell": 1.0, "lambda": 0.5, "tau": 1.0}},
    "flow": {"tau": 1.0, "sigma": 0.0, "eta": 0.01, "m": 4, "steps": 1}
  })");
  const ExperimentConfig cfg = parse_experiment_config(doc, MFPG_DATA_DIR);
  CHECK(load_model(cfg).mdp.n_actions == 64);
  doc["feature"] = base_config()["feature"];
  CHECK(validation_message(doc).find("must be omitted") != std::string::npos);
  doc.erase("feature");
  doc["mdp"]["bandit_crosscheck"]["grid"] = 8;
  CHECK_THROWS_AS(load_model(parse_experiment_config(doc, MFPG_DATA_DIR)), ValidationError);
}

TEST_CASE("bandit spec: defaults, broadcasting and errors") {
  const BanditRunSpec s = parse_bandit_spec(Json::parse(R"({"ell": [1, 2], "lambda": 1, "tau": 1, "m_u": 0.5})"));
  CHECK(s.spec.dim() == 2);
  CHECK(s.spec.m_u(1) == 0.5);
  CHECK(s.spec.sigma == 0.0);
  CHECK(s.m == 1000);
  CHECK_FALSE(s.fit_t_hi.has_value());
  CHECK_THROWS_WITH_AS(parse_bandit_spec(Json::parse(R"({"ell": 1, "lambda": 0, "tau": 1})")),
                       doctest::Contains("lambda"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_bandit_spec(Json::parse(R"({"ell": 1, "lambda": 1, "tau": 1, "fit_window": [0]})")),
                       doctest::Contains("fit_window"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_bandit_spec(Json::parse(R"({"ell": 1, "lambda": 1, "tau": 1, "extra": 0})")),
                       doctest::Contains("unknown key 'extra'"), ValidationError);
  CHECK_THROWS_AS(parse_bandit_spec(Json::parse(R"({"ell": [1, 2], "lambda": 1, "tau": 1, "m_u": [0, 0, 0]})")),
                  ValidationError);
}

TEST_CASE("cloud JSON round trip and validation") {
  RowMatrix x(3, 2);
  x << 0.1, -2.0, 1.0 / 3.0, 4.5, -0.25, 1e-300;
  ParticleCloud c = ParticleCloud::uniform(x);
  c.weights << 0.2, 0.3, 0.5;
  const ParticleCloud back = cloud_from_json(Json::parse(cloud_to_json(c).dump()));
  CHECK(back.particles == c.particles);
  CHECK(back.weights == c.weights);
  CHECK_THROWS_AS(cloud_from_json(Json::parse(R"({"particles": [[1, 2], [3]]})")), ValidationError);
  CHECK_THROWS_AS(cloud_from_json(Json::parse(R"({"particles": [[1]], "weights": [0.5]})")), ValidationError);
  CHECK_THROWS_AS(cloud_from_json(Json::parse(R"({"particles": [[1]], "colour": 2})")), ValidationError);
}
