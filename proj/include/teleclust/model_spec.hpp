#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teleclust/count_prior.hpp"
#include "teleclust/eppf.hpp"
#include "teleclust/kernels.hpp"
#include "teleclust/layers.hpp"

namespace teleclust {

enum class ModelKind { Thdp, UniqueAtom };

const char* model_name(ModelKind kind);

/// Partial kernel hyperparameters; unset fields take data-driven defaults.
struct KernelOverride {
  std::optional<double> mu0, kappa0, nu0, sigma0sq;
};

struct McmcSettings {
  long iterations = 100000;
  long burn_in = 50000;
  long thin = 5;
  bool update_concentrations = true;
  bool check_invariants = false;
  /// Ignore the data: every layer's likelihood is identically one.
  bool prior_only = false;

  long retained() const { return iterations <= burn_in ? 0 : (iterations - burn_in) / thin; }
};

struct ThdpRoot {
  double gamma0 = 1.0;
  double gamma = 1.0;
};

struct ThdpEdge {
  double alpha0 = 1.0;
  double alpha = 1.0;
};

struct UaRoot {
  double gamma = 1.0;
  CountPrior m_prior = CountPrior::shifted_poisson(1.0);
};

struct UaEdge {
  double alpha = 1.0;
  double omega = 0.5;
  CountPrior s_prior = CountPrior::shifted_poisson(1.0);
};

struct ModelSpec {
  ModelKind model = ModelKind::Thdp;
  /// Parent of each layer (-1 for the root); empty means the chain 0 -> 1 -> ...
  std::vector<int> parents;
  ThdpRoot thdp_root;
  UaRoot ua_root;
  /// Either one entry applied to every edge, or one per non-root layer in
  /// layer order.
  std::vector<ThdpEdge> thdp_edges{ThdpEdge{}};
  std::vector<UaEdge> ua_edges{UaEdge{}};
  KernelOverride kernel;
  /// Optional per-layer overrides, applied on top of `kernel`.
  std::vector<KernelOverride> kernels;
  int truncation = 40;
  int max_components = 500;
  McmcSettings mcmc;
  std::uint64_t seed = 1;

  static ModelSpec from_json_text(const std::string& text);
  static ModelSpec load(const std::string& path);
  std::string to_json_text() const;

  /// Checks everything that does not depend on the data.
  void validate() const;
  /// Also checks consistency with the number of layers.
  void validate_for(int num_layers) const;

  Polytree tree(int num_layers) const;
  /// Edge hyperparameters of a non-root layer.
  ThdpEdge thdp_edge(int layer, const Polytree& tree) const;
  UaEdge ua_edge(int layer, const Polytree& tree) const;
  /// Per-layer, per-coordinate kernel priors with data-driven defaults filled.
  std::vector<LayerPrior> kernel_priors(const LayerStack& data) const;
};

}  // namespace teleclust
