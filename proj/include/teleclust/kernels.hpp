#pragma once

#include <span>
#include <vector>

#include "teleclust/random.hpp"

namespace teleclust {

/// Normal-Inverse-Chi-Squared hyperparameters for one coordinate:
/// sigma^2 ~ Scaled-Inv-chi^2(nu0, sigma0sq), mu | sigma^2 ~ N(mu0, sigma^2 / kappa0).
/// The Normal-Inverse-Gamma form has shape nu0 / 2 and scale nu0 * sigma0sq / 2.
struct NixParams {
  double mu0 = 0.0;
  double kappa0 = 0.1;
  double nu0 = 2.0;
  double sigma0sq = 1.0;

  void validate() const;
  static NixParams from_nig(double mu0, double kappa0, double shape, double scale);
  double nig_shape() const { return nu0 / 2.0; }
  double nig_scale() const { return nu0 * sigma0sq / 2.0; }
};

/// One prior per coordinate of a layer.
using LayerPrior = std::vector<NixParams>;

/// Data-driven defaults: mu0 = column mean, kappa0 = 0.1, nu0 = 2,
/// sigma0sq = column variance (1 if the column is constant or too short).
NixParams default_prior(std::span<const double> column);

/// Per-coordinate count, mean and centered sum of squares.
class ClusterStats {
 public:
  ClusterStats() = default;
  explicit ClusterStats(int dim);

  int dim() const { return static_cast<int>(mean_.size()); }
  long count() const { return count_; }
  double mean(int d) const { return mean_[static_cast<std::size_t>(d)]; }
  double m2(int d) const { return m2_[static_cast<std::size_t>(d)]; }
  double sum(int d) const { return static_cast<double>(count_) * mean(d); }
  double sum_squares(int d) const { return m2(d) + static_cast<double>(count_) * mean(d) * mean(d); }

  void add(std::span<const double> x);
  void remove(std::span<const double> x);
  void merge(const ClusterStats& other);
  void clear();

 private:
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct Atom {
  std::vector<double> mean;
  std::vector<double> variance;
};

NixParams posterior_params(const NixParams& prior, const ClusterStats& stats, int coord);
LayerPrior posterior_params(const LayerPrior& prior, const ClusterStats& stats);

Atom sample_atom(const LayerPrior& params, Rng& rng);
double log_likelihood(std::span<const double> x, const Atom& atom);

/// log p(data in the cluster) with the atom integrated out.
double log_marginal(const ClusterStats& stats, const LayerPrior& prior);

/// Student-t predictive density of one new observation at one coordinate.
double log_predictive(double x, const NixParams& params);

}  // namespace teleclust
