#include "teleclust/model_spec.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "teleclust/error.hpp"

namespace teleclust {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!keys.count(it.key())) {
      throw ValidationError("config: unknown field '" + (path.empty() ? it.key() : path + "." + it.key()) + "'");
    }
  }
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

const json& require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ValidationError("config: field '" + path + "' must be an object");
  return v;
}

double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("config: field '" + join(path, key) + "' must be a number");
  return v.get<double>();
}

std::optional<double> get_optional(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("config: field '" + join(path, key) + "' must be a number");
  return v.get<double>();
}

long get_integer(const json& obj, const char* key, const std::string& path, long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError("config: field '" + join(path, key) + "' must be an integer");
  return v.get<long>();
}

bool get_bool(const json& obj, const char* key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ValidationError("config: field '" + join(path, key) + "' must be true or false");
  return v.get<bool>();
}

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("config: field '" + path + "' must be positive");
}

CountPrior parse_prior(const json& v, const std::string& path) {
  require_object(v, path);
  if (!v.contains("type") || !v.at("type").is_string()) {
    throw ValidationError("config: field '" + path + ".type' must name a prior");
  }
  const std::string type = v.at("type").get<std::string>();
  try {
    if (type == "point_mass") {
      reject_unknown(v, path, {"type", "value"});
      return CountPrior::point_mass(static_cast<int>(get_integer(v, "value", path, 1)));
    }
    if (type == "shifted_poisson") {
      reject_unknown(v, path, {"type", "lambda"});
      return CountPrior::shifted_poisson(get_number(v, "lambda", path, 1.0));
    }
    if (type == "geometric") {
      reject_unknown(v, path, {"type", "p"});
      return CountPrior::geometric(get_number(v, "p", path, 0.5));
    }
    if (type == "table") {
      reject_unknown(v, path, {"type", "weights"});
      if (!v.contains("weights") || !v.at("weights").is_array()) {
        throw ValidationError("config: field '" + path + ".weights' must be an array");
      }
      std::vector<double> w;
      for (const json& x : v.at("weights")) {
        if (!x.is_number()) throw ValidationError("config: field '" + path + ".weights' must hold numbers");
        w.push_back(x.get<double>());
      }
      return CountPrior::table(std::move(w));
    }
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind("config:", 0) == 0) throw;
    throw ValidationError("config: field '" + path + "': " + msg);
  }
  throw ValidationError("config: field '" + path + ".type' has unknown prior '" + type + "'");
}

json prior_to_json(const CountPrior& p) {
  json out{{"type", p.name()}};
  switch (p.kind()) {
    case CountPrior::Kind::PointMass:
      out["value"] = static_cast<long>(p.parameters()[0]);
      break;
    case CountPrior::Kind::ShiftedPoisson:
      out["lambda"] = p.parameters()[0];
      break;
    case CountPrior::Kind::Geometric:
      out["p"] = p.parameters()[0];
      break;
    case CountPrior::Kind::Table:
      out["weights"] = p.parameters();
      break;
  }
  return out;
}

KernelOverride parse_kernel(const json& v, const std::string& path) {
  require_object(v, path);
  reject_unknown(v, path, {"mu0", "kappa0", "nu0", "sigma0sq"});
  KernelOverride k;
  k.mu0 = get_optional(v, "mu0", path);
  k.kappa0 = get_optional(v, "kappa0", path);
  k.nu0 = get_optional(v, "nu0", path);
  k.sigma0sq = get_optional(v, "sigma0sq", path);
  if (k.kappa0) require_positive(*k.kappa0, path + ".kappa0");
  if (k.nu0) require_positive(*k.nu0, path + ".nu0");
  if (k.sigma0sq) require_positive(*k.sigma0sq, path + ".sigma0sq");
  return k;
}

json kernel_to_json(const KernelOverride& k) {
  json out = json::object();
  if (k.mu0) out["mu0"] = *k.mu0;
  if (k.kappa0) out["kappa0"] = *k.kappa0;
  if (k.nu0) out["nu0"] = *k.nu0;
  if (k.sigma0sq) out["sigma0sq"] = *k.sigma0sq;
  return out;
}

ThdpEdge parse_thdp_edge(const json& v, const std::string& path) {
  require_object(v, path);
  reject_unknown(v, path, {"alpha0", "alpha"});
  ThdpEdge e;
  e.alpha0 = get_number(v, "alpha0", path, e.alpha0);
  e.alpha = get_number(v, "alpha", path, e.alpha);
  require_positive(e.alpha0, path + ".alpha0");
  require_positive(e.alpha, path + ".alpha");
  return e;
}

UaEdge parse_ua_edge(const json& v, const std::string& path) {
  require_object(v, path);
  reject_unknown(v, path, {"alpha", "omega", "s_prior"});
  UaEdge e;
  e.alpha = get_number(v, "alpha", path, e.alpha);
  e.omega = get_number(v, "omega", path, e.omega);
  require_positive(e.alpha, path + ".alpha");
  if (!(e.omega >= 0.0 && e.omega <= 1.0)) throw ValidationError("config: field '" + path + ".omega' must lie in [0, 1]");
  if (v.contains("s_prior")) e.s_prior = parse_prior(v.at("s_prior"), path + ".s_prior");
  return e;
}

template <class Edge, class Parse>
std::vector<Edge> parse_edges(const json& v, Parse parse) {
  std::vector<Edge> out;
  if (v.is_object()) {
    out.push_back(parse(v, "edges"));
  } else if (v.is_array()) {
    if (v.empty()) throw ValidationError("config: field 'edges' must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse(v[i], "edges[" + std::to_string(i) + "]"));
  } else {
    throw ValidationError("config: field 'edges' must be an object or an array");
  }
  return out;
}

}  // namespace

const char* model_name(ModelKind kind) { return kind == ModelKind::Thdp ? "thdp" : "unique_atom"; }

ModelSpec ModelSpec::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  require_object(doc, "<root>");
  reject_unknown(doc, "", {"model", "parents", "root", "edges", "kernel", "kernels", "truncation", "max_components", "mcmc", "seed"});

  ModelSpec spec;
  if (!doc.contains("model") || !doc.at("model").is_string()) {
    throw ValidationError("config: field 'model' is required and must be \"thdp\" or \"unique_atom\"");
  }
  const std::string model = doc.at("model").get<std::string>();
  if (model == "thdp") {
    spec.model = ModelKind::Thdp;
  } else if (model == "unique_atom") {
    spec.model = ModelKind::UniqueAtom;
  } else {
    throw ValidationError("config: field 'model' must be \"thdp\" or \"unique_atom\", got \"" + model + "\"");
  }

  if (doc.contains("parents")) {
    const json& p = doc.at("parents");
    if (!p.is_array()) throw ValidationError("config: field 'parents' must be an array of integers");
    for (const json& x : p) {
      if (!x.is_number_integer()) throw ValidationError("config: field 'parents' must be an array of integers");
      spec.parents.push_back(x.get<int>());
    }
  }

  if (doc.contains("root")) {
    const json& r = require_object(doc.at("root"), "root");
    if (spec.model == ModelKind::Thdp) {
      reject_unknown(r, "root", {"gamma0", "gamma"});
      spec.thdp_root.gamma0 = get_number(r, "gamma0", "root", 1.0);
      spec.thdp_root.gamma = get_number(r, "gamma", "root", 1.0);
    } else {
      reject_unknown(r, "root", {"gamma", "m_prior"});
      spec.ua_root.gamma = get_number(r, "gamma", "root", 1.0);
      if (r.contains("m_prior")) spec.ua_root.m_prior = parse_prior(r.at("m_prior"), "root.m_prior");
    }
  }
  if (doc.contains("edges")) {
    if (spec.model == ModelKind::Thdp) {
      spec.thdp_edges = parse_edges<ThdpEdge>(doc.at("edges"), parse_thdp_edge);
    } else {
      spec.ua_edges = parse_edges<UaEdge>(doc.at("edges"), parse_ua_edge);
    }
  }
  if (doc.contains("kernel")) spec.kernel = parse_kernel(doc.at("kernel"), "kernel");
  if (doc.contains("kernels")) {
    const json& ks = doc.at("kernels");
    if (!ks.is_array()) throw ValidationError("config: field 'kernels' must be an array");
    for (std::size_t i = 0; i < ks.size(); ++i) spec.kernels.push_back(parse_kernel(ks[i], "kernels[" + std::to_string(i) + "]"));
  }
  spec.truncation = static_cast<int>(get_integer(doc, "truncation", "", spec.truncation));
  spec.max_components = static_cast<int>(get_integer(doc, "max_components", "", spec.max_components));
  if (doc.contains("mcmc")) {
    const json& m = require_object(doc.at("mcmc"), "mcmc");
    reject_unknown(m, "mcmc", {"iterations", "burn_in", "thin", "update_concentrations", "check_invariants", "prior_only"});
    spec.mcmc.iterations = get_integer(m, "iterations", "mcmc", spec.mcmc.iterations);
    spec.mcmc.burn_in = get_integer(m, "burn_in", "mcmc", m.contains("iterations") ? spec.mcmc.iterations / 2 : spec.mcmc.burn_in);
    spec.mcmc.thin = get_integer(m, "thin", "mcmc", spec.mcmc.thin);
    spec.mcmc.update_concentrations = get_bool(m, "update_concentrations", "mcmc", spec.mcmc.update_concentrations);
    spec.mcmc.check_invariants = get_bool(m, "check_invariants", "mcmc", spec.mcmc.check_invariants);
    spec.mcmc.prior_only = get_bool(m, "prior_only", "mcmc", spec.mcmc.prior_only);
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw ValidationError("config: field 'seed' must be a nonnegative integer");
    spec.seed = s.get<std::uint64_t>();
  }
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ModelSpec::to_json_text() const {
  json doc;
  doc["model"] = model_name(model);
  if (!parents.empty()) doc["parents"] = parents;
  json edges = json::array();
  if (model == ModelKind::Thdp) {
    doc["root"] = {{"gamma0", thdp_root.gamma0}, {"gamma", thdp_root.gamma}};
    for (const ThdpEdge& e : thdp_edges) edges.push_back({{"alpha0", e.alpha0}, {"alpha", e.alpha}});
  } else {
    doc["root"] = {{"gamma", ua_root.gamma}, {"m_prior", prior_to_json(ua_root.m_prior)}};
    for (const UaEdge& e : ua_edges) {
      edges.push_back({{"alpha", e.alpha}, {"omega", e.omega}, {"s_prior", prior_to_json(e.s_prior)}});
    }
  }
  doc["edges"] = edges;
  doc["kernel"] = kernel_to_json(kernel);
  if (!kernels.empty()) {
    json ks = json::array();
    for (const KernelOverride& k : kernels) ks.push_back(kernel_to_json(k));
    doc["kernels"] = ks;
  }
  doc["truncation"] = truncation;
  doc["max_components"] = max_components;
  doc["mcmc"] = {{"iterations", mcmc.iterations},
                 {"burn_in", mcmc.burn_in},
                 {"thin", mcmc.thin},
                 {"update_concentrations", mcmc.update_concentrations},
                 {"check_invariants", mcmc.check_invariants},
                 {"prior_only", mcmc.prior_only}};
  doc["seed"] = seed;
  return doc.dump(2);
}

void ModelSpec::validate() const {
  require_positive(thdp_root.gamma0, "root.gamma0");
  require_positive(thdp_root.gamma, "root.gamma");
  require_positive(ua_root.gamma, "root.gamma");
  if (thdp_edges.empty() || ua_edges.empty()) throw ValidationError("config: field 'edges' must not be empty");
  if (truncation < 2) throw ValidationError("config: field 'truncation' must be at least 2");
  if (max_components < 1) throw ValidationError("config: field 'max_components' must be positive");
  if (mcmc.iterations < 1) throw ValidationError("config: field 'mcmc.iterations' must be positive");
  if (mcmc.burn_in < 0 || mcmc.burn_in >= mcmc.iterations) {
    throw ValidationError("config: field 'mcmc.burn_in' must lie in [0, iterations)");
  }
  if (mcmc.thin < 1) throw ValidationError("config: field 'mcmc.thin' must be positive");
}

void ModelSpec::validate_for(int num_layers) const {
  validate();
  if (num_layers < 1) throw ValidationError("model: the data has no layers");
  if (!parents.empty() && static_cast<int>(parents.size()) != num_layers) {
    throw ValidationError("config: field 'parents' has " + std::to_string(parents.size()) + " entries but the data has " +
                          std::to_string(num_layers) + " layers");
  }
  (void)tree(num_layers);
  const std::size_t edges = model == ModelKind::Thdp ? thdp_edges.size() : ua_edges.size();
  if (edges != 1 && static_cast<int>(edges) != num_layers - 1) {
    throw ValidationError("config: field 'edges' must hold one entry or one per non-root layer (" +
                          std::to_string(num_layers - 1) + ")");
  }
  if (!kernels.empty() && static_cast<int>(kernels.size()) != num_layers) {
    throw ValidationError("config: field 'kernels' must hold one entry per layer (" + std::to_string(num_layers) + ")");
  }
}

Polytree ModelSpec::tree(int num_layers) const {
  if (parents.empty()) return Polytree::chain(num_layers);
  try {
    return Polytree(parents);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config: field 'parents': ") + e.what());
  }
}

namespace {
// Position of a non-root layer among non-root layers in index order.
std::size_t edge_index(int layer, const Polytree& tree) {
  if (layer == tree.root()) throw ValidationError("model: the root layer has no incoming edge");
  return static_cast<std::size_t>(layer > tree.root() ? layer - 1 : layer);
}
}  // namespace

ThdpEdge ModelSpec::thdp_edge(int layer, const Polytree& tree) const {
  const std::size_t i = edge_index(layer, tree);
  return thdp_edges.size() == 1 ? thdp_edges.front() : thdp_edges.at(i);
}

UaEdge ModelSpec::ua_edge(int layer, const Polytree& tree) const {
  const std::size_t i = edge_index(layer, tree);
  return ua_edges.size() == 1 ? ua_edges.front() : ua_edges.at(i);
}

std::vector<LayerPrior> ModelSpec::kernel_priors(const LayerStack& data) const {
  std::vector<LayerPrior> out;
  for (int l = 0; l < data.num_layers(); ++l) {
    const Layer& layer = data.layer(l);
    LayerPrior prior;
    for (int d = 0; d < layer.dim; ++d) {
      const auto col = layer.column(d);
      NixParams p = default_prior(col);
      for (const KernelOverride* k : {&kernel, kernels.empty() ? nullptr : &kernels[static_cast<std::size_t>(l)]}) {
        if (!k) continue;
        if (k->mu0) p.mu0 = *k->mu0;
        if (k->kappa0) p.kappa0 = *k->kappa0;
        if (k->nu0) p.nu0 = *k->nu0;
        if (k->sigma0sq) p.sigma0sq = *k->sigma0sq;
      }
      p.validate();
      prior.push_back(p);
    }
    out.push_back(std::move(prior));
  }
  return out;
}

}  // namespace teleclust
