#include <cmath>

#include "teleclust/eppf.hpp"
#include "teleclust/samplers.hpp"

namespace teleclust::detail {

double AdaptiveStep::step() const { return std::exp(log_step_); }

void AdaptiveStep::record(bool accepted, bool adapting) {
  ++proposed_total_;
  if (accepted) ++accepted_total_;
  if (!adapting) return;
  ++batch_size_;
  if (accepted) ++batch_accepted_;
  if (batch_size_ == 50) {
    ++batches_;
    const double delta = std::min(0.05, 1.0 / std::sqrt(static_cast<double>(batches_)));
    log_step_ += static_cast<double>(batch_accepted_) / 50.0 > 0.44 ? delta : -delta;
    batch_size_ = 0;
    batch_accepted_ = 0;
  }
}

double mh_positive(double value, const std::function<double(double)>& log_target, AdaptiveStep& step, bool adapting,
                   Rng& rng) {
  // Gamma(1, 1) prior density exp(-x); the log-scale proposal adds the
  // Jacobian log x.
  const double proposal = value * std::exp(step.step() * standard_normal(rng));
  if (!(proposal > 0.0) || !std::isfinite(proposal)) {
    step.record(false, adapting);
    return value;
  }
  const double current = log_target(value) - value + std::log(value);
  const double next = log_target(proposal) - proposal + std::log(proposal);
  const bool accept = std::log(uniform01(rng)) < next - current;
  step.record(accept, adapting);
  return accept ? proposal : value;
}

double log_rising_from_log(double log_a, long n) {
  if (n == 0) return 0.0;
  if (log_a < -30.0) return log_a + std::lgamma(static_cast<double>(n));
  return log_rising_factorial(std::exp(log_a), n);
}

void KernelCache::set(const Atom& atom) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  mean = atom.mean;
  inv_var.resize(atom.variance.size());
  constant = 0.0;
  for (std::size_t d = 0; d < atom.variance.size(); ++d) {
    inv_var[d] = 1.0 / atom.variance[d];
    constant -= 0.5 * (kLog2Pi + std::log(atom.variance[d]));
  }
}

double KernelCache::operator()(std::span<const double> x) const {
  double q = 0.0;
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const double r = x[d] - mean[d];
    q += r * r * inv_var[d];
  }
  return constant - 0.5 * q;
}

}  // namespace teleclust::detail
