#include "mfpg/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace mfpg {

namespace {

const Json& field(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(std::string("mdp: missing field '") + key + "'");
  return *it;
}

double number(const Json& node, const std::string& where) {
  if (!node.is_number()) throw ValidationError("mdp: expected a number at " + where);
  return node.get<double>();
}

int positive_int(const Json& node, const std::string& where) {
  if (!node.is_number_integer() || node.get<long>() <= 0) {
    throw ValidationError("mdp: expected a positive integer at " + where);
  }
  return node.get<int>();
}

const Json& array_of(const Json& node, std::size_t n, const std::string& where) {
  if (!node.is_array() || node.size() != n) {
    throw ValidationError("mdp: expected an array of length " + std::to_string(n) + " at " + where);
  }
  return node;
}

}  // namespace

FiniteMdp mdp_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("mdp: document must be a JSON object");
  static const std::set<std::string> known = {"n_states", "n_actions", "gamma", "transition",
                                              "reward", "mu_weights", "rho"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ValidationError("mdp: unknown field '" + key + "'");
  }

  FiniteMdp mdp;
  mdp.n_states = positive_int(field(doc, "n_states"), "n_states");
  mdp.n_actions = positive_int(field(doc, "n_actions"), "n_actions");
  mdp.gamma = number(field(doc, "gamma"), "gamma");
  const int ns = mdp.n_states;
  const int na = mdp.n_actions;

  const Json& p = array_of(field(doc, "transition"), ns, "transition");
  mdp.transition.resize(static_cast<long>(ns) * na, ns);
  for (int s = 0; s < ns; ++s) {
    const std::string ws = "transition[" + std::to_string(s) + "]";
    const Json& ps = array_of(p[s], na, ws);
    for (int a = 0; a < na; ++a) {
      const std::string wa = ws + "[" + std::to_string(a) + "]";
      const Json& psa = array_of(ps[a], ns, wa);
      for (int t = 0; t < ns; ++t) mdp.transition(mdp.row(s, a), t) = number(psa[t], wa);
    }
  }

  const Json& r = array_of(field(doc, "reward"), ns, "reward");
  mdp.reward.resize(ns, na);
  for (int s = 0; s < ns; ++s) {
    const std::string ws = "reward[" + std::to_string(s) + "]";
    const Json& rs = array_of(r[s], na, ws);
    for (int a = 0; a < na; ++a) mdp.reward(s, a) = number(rs[a], ws);
  }

  const Json& mu = array_of(field(doc, "mu_weights"), na, "mu_weights");
  mdp.mu.resize(na);
  for (int a = 0; a < na; ++a) mdp.mu(a) = number(mu[a], "mu_weights");

  const Json& rho = array_of(field(doc, "rho"), ns, "rho");
  mdp.rho.resize(ns);
  for (int s = 0; s < ns; ++s) mdp.rho(s) = number(rho[s], "rho");

  require_valid(mdp);
  return mdp;
}

Json to_json(const FiniteMdp& mdp) {
  Json p = Json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    Json ps = Json::array();
    for (int a = 0; a < mdp.n_actions; ++a) ps.push_back(to_json(Vector(mdp.transition.row(mdp.row(s, a)).transpose())));
    p.push_back(ps);
  }
  return Json{{"n_states", mdp.n_states},
              {"n_actions", mdp.n_actions},
              {"gamma", mdp.gamma},
              {"transition", p},
              {"reward", to_json(mdp.reward)},
              {"mu_weights", to_json(mdp.mu)},
              {"rho", to_json(mdp.rho)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

FiniteMdp load_mdp(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return mdp_from_json(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (long i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

Json to_json(const TabularPolicy& pi) { return to_json(pi.probs); }

}  // namespace mfpg
