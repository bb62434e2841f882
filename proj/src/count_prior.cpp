#include "teleclust/count_prior.hpp"

#include <cmath>
#include <limits>

#include "teleclust/error.hpp"

namespace teleclust {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CountPrior CountPrior::point_mass(int value) {
  if (value < 1) throw ValidationError("count prior: point mass must sit on a positive integer");
  CountPrior p;
  p.kind_ = Kind::PointMass;
  p.params_ = {static_cast<double>(value)};
  return p;
}

CountPrior CountPrior::shifted_poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("count prior: shifted_poisson lambda must be positive and finite");
  }
  CountPrior p;
  p.kind_ = Kind::ShiftedPoisson;
  p.params_ = {lambda};
  return p;
}

CountPrior CountPrior::geometric(double prob) {
  if (!(prob > 0.0 && prob <= 1.0)) throw ValidationError("count prior: geometric p must lie in (0, 1]");
  CountPrior p;
  p.kind_ = Kind::Geometric;
  p.params_ = {prob};
  return p;
}

CountPrior CountPrior::table(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("count prior: table weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("count prior: table weights must have positive total");
  while (!weights.empty() && weights.back() == 0.0) weights.pop_back();
  CountPrior p;
  p.kind_ = Kind::Table;
  for (double& w : weights) w /= total;
  p.log_table_.reserve(weights.size());
  for (double w : weights) p.log_table_.push_back(w > 0.0 ? std::log(w) : kNegInf);
  p.params_ = std::move(weights);
  return p;
}

const std::string& CountPrior::name() const {
  static const std::string names[] = {"point_mass", "shifted_poisson", "geometric", "table"};
  return names[static_cast<int>(kind_)];
}

double CountPrior::log_pmf(long m) const {
  if (m < 1) return kNegInf;
  switch (kind_) {
    case Kind::PointMass:
      return m == static_cast<long>(params_[0]) ? 0.0 : kNegInf;
    case Kind::ShiftedPoisson: {
      const double lambda = params_[0];
      const double k = static_cast<double>(m - 1);
      return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
    }
    case Kind::Geometric: {
      const double p = params_[0];
      if (p == 1.0) return m == 1 ? 0.0 : kNegInf;
      return std::log(p) + static_cast<double>(m - 1) * std::log1p(-p);
    }
    case Kind::Table:
      return m <= static_cast<long>(log_table_.size()) ? log_table_[static_cast<std::size_t>(m - 1)] : kNegInf;
  }
  return kNegInf;
}

int CountPrior::min_support() const {
  switch (kind_) {
    case Kind::PointMass:
      return static_cast<int>(params_[0]);
    case Kind::Table:
      for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i] > 0.0) return static_cast<int>(i + 1);
      }
      return 1;
    default:
      return 1;
  }
}

long CountPrior::max_support() const {
  switch (kind_) {
    case Kind::PointMass:
      return static_cast<long>(params_[0]);
    case Kind::Geometric:
      return params_[0] == 1.0 ? 1 : -1;
    case Kind::Table:
      return static_cast<long>(params_.size());
    default:
      return -1;
  }
}

double CountPrior::log_survival_bound(long m) const {
  if (m < 1) return 0.0;
  switch (kind_) {
    case Kind::PointMass:
    case Kind::Table: {
      const long top = max_support();
      if (m >= top) return kNegInf;
      double acc = kNegInf;
      for (long j = m + 1; j <= top; ++j) acc = log_add_exp(acc, log_pmf(j));
      return acc;
    }
    case Kind::Geometric: {
      const double p = params_[0];
      if (p == 1.0) return kNegInf;
      return static_cast<double>(m) * std::log1p(-p);
    }
    case Kind::ShiftedPoisson: {
      // P(K > k) for K ~ Poisson(lambda), k = m - 1: bounded by the first
      // omitted term times a geometric series once the ratio drops below 1.
      const double lambda = params_[0];
      const double next = static_cast<double>(m);  // first omitted Poisson index
      const double ratio = lambda / (next + 1.0);
      if (ratio >= 1.0) return 0.0;
      return log_pmf(m + 1) - std::log1p(-ratio);
    }
  }
  return 0.0;
}

double CountPrior::mean() const {
  switch (kind_) {
    case Kind::PointMass:
      return params_[0];
    case Kind::ShiftedPoisson:
      return 1.0 + params_[0];
    case Kind::Geometric:
      return 1.0 / params_[0];
    case Kind::Table: {
      double acc = 0.0;
      for (std::size_t i = 0; i < params_.size(); ++i) acc += static_cast<double>(i + 1) * params_[i];
      return acc;
    }
  }
  return 0.0;
}

double CountPrior::expectation(const std::function<double(long)>& f) const {
  const long top = max_support();
  double acc = 0.0;
  for (long m = min_support();; ++m) {
    if (top >= 0 && m > top) break;
    const double lp = log_pmf(m);
    if (lp > kNegInf) acc += std::exp(lp) * f(m);
    if (top < 0 && log_survival_bound(m) < std::log(1e-17)) break;
    if (m > 10000000) throw NumericalError("count prior: expectation series did not converge");
  }
  return acc;
}

long CountPrior::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::PointMass:
      return static_cast<long>(params_[0]);
    case Kind::ShiftedPoisson:
      return 1 + poisson(params_[0], rng);
    case Kind::Geometric: {
      const double p = params_[0];
      if (p == 1.0) return 1;
      return 1 + static_cast<long>(std::floor(std::log(uniform01(rng)) / std::log1p(-p)));
    }
    case Kind::Table:
      return 1 + static_cast<long>(categorical_from_log(log_table_, rng));
  }
  return 1;
}

}  // namespace teleclust
