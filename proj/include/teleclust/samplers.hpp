#pragma once

#include <functional>

#include "teleclust/layers.hpp"
#include "teleclust/model_spec.hpp"
#include "teleclust/random.hpp"
#include "teleclust/trace.hpp"

namespace teleclust {

/// Called after every sweep with the 1-based sweep number.
using SweepCallback = std::function<void(long)>;

/// Truncated blocked Gibbs sampler for telescopic hierarchical Dirichlet
/// process mixtures over a polytree of layers.
Trace fit_thdp(const LayerStack& data, const Polytree& tree, const ModelSpec& spec, Rng& rng, int chain = 0,
               const SweepCallback& on_sweep = {});

/// Gibbs sampler for telescopic unique-atom mixtures of finite mixtures.
Trace fit_ua(const LayerStack& data, const Polytree& tree, const ModelSpec& spec, Rng& rng, int chain = 0,
             const SweepCallback& on_sweep = {});

/// Dispatches on spec.model; data dimensions are ignored when
/// spec.mcmc.prior_only is set.
Trace fit(const LayerStack& data, const ModelSpec& spec, Rng& rng, int chain = 0, const SweepCallback& on_sweep = {});

namespace detail {

/// Log-scale random-walk Metropolis step size, adapted towards a 0.44
/// acceptance rate while `adapting` is set.
class AdaptiveStep {
 public:
  explicit AdaptiveStep(double log_step = 0.0) : log_step_(log_step) {}
  double step() const;
  void record(bool accepted, bool adapting);
  long accepted() const { return accepted_total_; }
  long proposed() const { return proposed_total_; }

 private:
  double log_step_;
  int batch_accepted_ = 0;
  int batch_size_ = 0;
  long batches_ = 0;
  long accepted_total_ = 0;
  long proposed_total_ = 0;
};

/// One Metropolis update of a positive parameter with a Gamma(1, 1) prior on
/// the log scale. `log_target` is the log-likelihood part as a function of
/// the parameter.
double mh_positive(double value, const std::function<double(double)>& log_target, AdaptiveStep& step, bool adapting,
                   Rng& rng);

/// log Gamma(a + n) - log Gamma(a) given log(a); stable for tiny a.
double log_rising_from_log(double log_a, long n);

/// Precomputed Gaussian product kernel for fast repeated evaluation.
struct KernelCache {
  std::vector<double> mean;
  std::vector<double> inv_var;
  double constant = 0.0;
  void set(const Atom& atom);
  double operator()(std::span<const double> x) const;
};

}  // namespace detail

}  // namespace teleclust
