#include "teleclust/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "teleclust/error.hpp"

namespace teleclust {

void NixParams::validate() const {
  if (!std::isfinite(mu0)) throw ValidationError("kernel: mu0 must be finite");
  if (!(kappa0 > 0.0) || !std::isfinite(kappa0)) throw ValidationError("kernel: kappa0 must be positive");
  if (!(nu0 > 0.0) || !std::isfinite(nu0)) throw ValidationError("kernel: nu0 must be positive");
  if (!(sigma0sq > 0.0) || !std::isfinite(sigma0sq)) throw ValidationError("kernel: sigma0sq must be positive");
}

NixParams NixParams::from_nig(double mu0, double kappa0, double shape, double scale) {
  NixParams p{mu0, kappa0, 2.0 * shape, scale / shape};
  p.validate();
  return p;
}

NixParams default_prior(std::span<const double> column) {
  NixParams p;
  if (column.empty()) return p;
  double mean = 0.0;
  for (double v : column) mean += v;
  mean /= static_cast<double>(column.size());
  double ss = 0.0;
  for (double v : column) ss += (v - mean) * (v - mean);
  p.mu0 = mean;
  if (column.size() >= 2 && ss > 0.0) p.sigma0sq = ss / static_cast<double>(column.size() - 1);
  return p;
}

ClusterStats::ClusterStats(int dim) : mean_(static_cast<std::size_t>(dim), 0.0), m2_(static_cast<std::size_t>(dim), 0.0) {}

void ClusterStats::add(std::span<const double> x) {
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t d = 0; d < mean_.size(); ++d) {
    const double delta = x[d] - mean_[d];
    mean_[d] += delta * inv;
    m2_[d] += delta * (x[d] - mean_[d]);
  }
}

void ClusterStats::remove(std::span<const double> x) {
  if (count_ == 0) throw NumericalError("cluster stats: removing from an empty cluster");
  if (count_ == 1) {
    clear();
    return;
  }
  const double n = static_cast<double>(count_);
  --count_;
  for (std::size_t d = 0; d < mean_.size(); ++d) {
    const double old_mean = (n * mean_[d] - x[d]) / (n - 1.0);
    m2_[d] -= (x[d] - old_mean) * (x[d] - mean_[d]);
    if (m2_[d] < 0.0) m2_[d] = 0.0;
    mean_[d] = old_mean;
  }
}

void ClusterStats::merge(const ClusterStats& other) {
  if (other.count_ == 0) return;
  if (mean_.empty()) {
    mean_.assign(other.mean_.size(), 0.0);
    m2_.assign(other.m2_.size(), 0.0);
  }
  if (other.mean_.size() != mean_.size()) throw ValidationError("cluster stats: dimension mismatch in merge");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t d = 0; d < mean_.size(); ++d) {
    const double delta = other.mean_[d] - mean_[d];
    mean_[d] += delta * nb / n;
    m2_[d] += other.m2_[d] + delta * delta * na * nb / n;
  }
  count_ += other.count_;
}

void ClusterStats::clear() {
  count_ = 0;
  std::fill(mean_.begin(), mean_.end(), 0.0);
  std::fill(m2_.begin(), m2_.end(), 0.0);
}

NixParams posterior_params(const NixParams& prior, const ClusterStats& stats, int coord) {
  if (stats.count() == 0) return prior;
  const double n = static_cast<double>(stats.count());
  const double xbar = stats.mean(coord);
  NixParams post;
  post.kappa0 = prior.kappa0 + n;
  post.mu0 = (prior.kappa0 * prior.mu0 + n * xbar) / post.kappa0;
  post.nu0 = prior.nu0 + n;
  const double diff = xbar - prior.mu0;
  post.sigma0sq = (prior.nu0 * prior.sigma0sq + stats.m2(coord) + prior.kappa0 * n / post.kappa0 * diff * diff) / post.nu0;
  return post;
}

LayerPrior posterior_params(const LayerPrior& prior, const ClusterStats& stats) {
  LayerPrior out(prior.size());
  for (std::size_t d = 0; d < prior.size(); ++d) out[d] = posterior_params(prior[d], stats, static_cast<int>(d));
  return out;
}

Atom sample_atom(const LayerPrior& params, Rng& rng) {
  Atom atom;
  atom.mean.resize(params.size());
  atom.variance.resize(params.size());
  for (std::size_t d = 0; d < params.size(); ++d) {
    const NixParams& p = params[d];
    // chi^2_nu = 2 Gamma(nu / 2)
    const double chi2 = 2.0 * gamma_variate(p.nu0 / 2.0, rng);
    const double var = p.nu0 * p.sigma0sq / chi2;
    if (!(var > 0.0) || !std::isfinite(var)) throw NumericalError("sample_atom: degenerate variance draw");
    atom.variance[d] = var;
    atom.mean[d] = p.mu0 + std::sqrt(var / p.kappa0) * standard_normal(rng);
  }
  return atom;
}

double log_likelihood(std::span<const double> x, const Atom& atom) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  double out = 0.0;
  for (std::size_t d = 0; d < atom.mean.size(); ++d) {
    const double r = x[d] - atom.mean[d];
    out -= 0.5 * (kLog2Pi + std::log(atom.variance[d]) + r * r / atom.variance[d]);
  }
  return out;
}

double log_marginal(const ClusterStats& stats, const LayerPrior& prior) {
  if (stats.count() == 0) return 0.0;
  const double n = static_cast<double>(stats.count());
  double out = 0.0;
  for (std::size_t d = 0; d < prior.size(); ++d) {
    const NixParams& p0 = prior[d];
    const NixParams pn = posterior_params(p0, stats, static_cast<int>(d));
    out += std::lgamma(pn.nu0 / 2.0) - std::lgamma(p0.nu0 / 2.0) + 0.5 * std::log(p0.kappa0 / pn.kappa0) +
           0.5 * p0.nu0 * std::log(p0.nu0 * p0.sigma0sq) - 0.5 * pn.nu0 * std::log(pn.nu0 * pn.sigma0sq) -
           0.5 * n * std::log(std::numbers::pi);
  }
  return out;
}

double log_predictive(double x, const NixParams& p) {
  const double nu = p.nu0;
  const double scale2 = p.sigma0sq * (1.0 + p.kappa0) / p.kappa0;
  const double z = (x - p.mu0) * (x - p.mu0) / (nu * scale2);
  return std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi * scale2) -
         0.5 * (nu + 1.0) * std::log1p(z);
}

}  // namespace teleclust
