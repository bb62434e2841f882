#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "teleclust/count_prior.hpp"
#include "teleclust/partition.hpp"

namespace teleclust {

using BigInt = boost::multiprecision::cpp_int;

/// log Gamma(x + n) - log Gamma(x); exactly 0 for n = 0. Throws for x <= 0.
double log_rising_factorial(double x, long n);

/// Signless Stirling numbers of the first kind: exact up to exact_max, log
/// values up to max_n.
class StirlingTable {
 public:
  explicit StirlingTable(int max_n, int exact_max = 25);

  int max_n() const { return max_n_; }
  int exact_max() const { return exact_max_; }
  const BigInt& exact(int n, int k) const;
  double log_value(int n, int k) const;

 private:
  int max_n_;
  int exact_max_;
  std::vector<std::vector<BigInt>> exact_;
  std::vector<std::vector<double>> log_;
};

struct HdpParams {
  double gamma0 = 1.0;
  double gamma = 1.0;
  double alpha0 = 1.0;
  double alpha = 1.0;
  void validate() const;
};

struct MfmParams {
  double gamma = 1.0;
  double alpha = 1.0;
  double omega = 0.5;
  CountPrior m_prior = CountPrior::shifted_poisson(1.0);
  CountPrior s_prior = CountPrior::shifted_poisson(1.0);
  void validate() const;
};

struct DependenceReport {
  double tau = 0.0;
  double er = 0.0;
  /// Expected Binder loss per pair of subjects.
  double eb = 0.0;
  double er_indep = 0.0;
  /// Tie probabilities of subjects 0 and 1 behind the report.
  double p_tie1 = 0.0;
  double p_tie2_given_tie1 = 0.0;
  double p_tie2_given_split1 = 0.0;
};

/// Joint log-probability of a pair of partitions at one sample size.
using JointLaw = std::function<double(const Partition&, const Partition&)>;

/// Exact partition laws in the log domain.
class EppfEngine {
 public:
  explicit EppfEngine(int cap = 25);

  int cap() const { return cap_; }
  const StirlingTable& stirling() const { return stirling_; }

  double hdp_log_eppf(const Partition& p, const HdpParams& params) const;
  double hdp_log_cond_eppf(const Partition& p2, const Partition& p1, const HdpParams& params) const;
  double thdp_log_teppf(const Partition& p1, const Partition& p2, const HdpParams& params) const;

  double mfm_log_V(int n, int k, double gamma, const CountPrior& m_prior) const;
  double mfm_log_eppf(const Partition& p, double gamma, const CountPrior& m_prior) const;
  double ua_log_cond_eppf(const Partition& p2, const Partition& p1, const MfmParams& params) const;
  double ua_log_teppf(const Partition& p1, const Partition& p2, const MfmParams& params) const;

  /// Writes "n,K,log_V" rows for 1 <= K <= n <= max_n.
  void dump_log_V(std::ostream& out, int max_n, double gamma, const CountPrior& m_prior) const;

 private:
  void check_size(std::size_t n) const;
  int cap_;
  StirlingTable stirling_;
};

double tau_thdp(const HdpParams& params);
double er_thdp(const HdpParams& params);
double tau_ua(const MfmParams& params);
double er_ua(const MfmParams& params);
/// Rand index expected under independence from the laws of K_12 and K_22,
/// each given as (P(K=1), P(K=2)).
double er_independent(const std::array<double, 2>& k1_dist, const std::array<double, 2>& k2_dist);

DependenceReport thdp_dependence(const HdpParams& params);
DependenceReport ua_dependence(const MfmParams& params);

/// Dependence measures by exhaustive evaluation of a joint law at sample size
/// n (ties refer to subjects 0 and 1). Throws if the law does not sum to one
/// within 1e-8.
DependenceReport dependence_from_teppf(const JointLaw& law, int n = 2);

}  // namespace teleclust
