#pragma once

#include <functional>
#include <string>
#include <vector>

#include "teleclust/random.hpp"

namespace teleclust {

/// Prior on a component count M in {1, 2, ...}.
class CountPrior {
 public:
  enum class Kind { PointMass, ShiftedPoisson, Geometric, Table };

  /// P(M = value) = 1.
  static CountPrior point_mass(int value);
  /// M = 1 + Poisson(lambda).
  static CountPrior shifted_poisson(double lambda);
  /// P(M = m) = p (1 - p)^(m - 1).
  static CountPrior geometric(double p);
  /// P(M = m) proportional to weights[m - 1]; normalized on construction.
  static CountPrior table(std::vector<double> weights);

  Kind kind() const { return kind_; }
  const std::string& name() const;
  /// Parameters in constructor order (value / lambda / p / table weights).
  const std::vector<double>& parameters() const { return params_; }

  double log_pmf(long m) const;
  int min_support() const;
  /// Largest m with positive mass, or -1 when the support is unbounded.
  long max_support() const;
  /// Upper bound on log P(M > m).
  double log_survival_bound(long m) const;
  double mean() const;
  /// E[f(M)] for f bounded by 1 in absolute value; the series is cut when the
  /// remaining mass drops below 1e-17.
  double expectation(const std::function<double(long)>& f) const;
  long sample(Rng& rng) const;

 private:
  Kind kind_ = Kind::PointMass;
  std::vector<double> params_;
  std::vector<double> log_table_;
};

}  // namespace teleclust
