#include "teleclust/eppf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "teleclust/error.hpp"
#include "teleclust/random.hpp"

namespace teleclust {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Polynomial in the linear domain with a shared log scale:
// value[d] = coef[d] * exp(log_scale).
struct ScaledPoly {
  std::vector<double> coef;
  double log_scale = 0.0;
};

void rescale(ScaledPoly& p) {
  double top = 0.0;
  for (double c : p.coef) top = std::max(top, c);
  if (top == 0.0) return;
  for (double& c : p.coef) c /= top;
  p.log_scale += std::log(top);
}

ScaledPoly from_logs(const std::vector<double>& logs) {
  ScaledPoly p;
  double top = kNegInf;
  for (double v : logs) top = std::max(top, v);
  if (top == kNegInf) throw NumericalError("eppf: empty coefficient vector");
  p.log_scale = top;
  p.coef.reserve(logs.size());
  for (double v : logs) p.coef.push_back(v == kNegInf ? 0.0 : std::exp(v - top));
  return p;
}

ScaledPoly convolve(const ScaledPoly& a, const ScaledPoly& b) {
  ScaledPoly out;
  out.coef.assign(a.coef.size() + b.coef.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coef.size(); ++i) {
    if (a.coef[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.coef.size(); ++j) out.coef[i + j] += a.coef[i] * b.coef[j];
  }
  out.log_scale = a.log_scale + b.log_scale;
  rescale(out);
  return out;
}

// Identity element: the constant polynomial 1.
ScaledPoly unit_poly() { return ScaledPoly{{1.0}, 0.0}; }

// log sum_d poly[d] * exp(weight(d)).
template <class F>
double finish(const ScaledPoly& poly, F&& log_weight) {
  std::vector<double> terms;
  terms.reserve(poly.coef.size());
  for (std::size_t d = 0; d < poly.coef.size(); ++d) {
    if (poly.coef[d] == 0.0) continue;
    terms.push_back(std::log(poly.coef[d]) + log_weight(static_cast<long>(d)));
  }
  return poly.log_scale + log_sum_exp(terms);
}

double log_factorial(long n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

double log_rising_factorial(double x, long n) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("log_rising_factorial: x must be positive");
  if (n < 0) throw ValidationError("log_rising_factorial: n must be nonnegative");
  if (n == 0) return 0.0;
  if (n > 64) return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
  // Direct product, flushed to the log accumulator before it can overflow.
  double acc = 0.0;
  double prod = 1.0;
  for (long i = 0; i < n; ++i) {
    prod *= x + static_cast<double>(i);
    if (prod > 1e250) {
      acc += std::log(prod);
      prod = 1.0;
    }
  }
  return acc + std::log(prod);
}

StirlingTable::StirlingTable(int max_n, int exact_max) : max_n_(max_n), exact_max_(std::min(exact_max, max_n)) {
  if (max_n < 0) throw ValidationError("stirling table: negative size");
  exact_.resize(static_cast<std::size_t>(exact_max_ + 1));
  for (int n = 0; n <= exact_max_; ++n) {
    auto& row = exact_[static_cast<std::size_t>(n)];
    row.assign(static_cast<std::size_t>(n + 1), BigInt(0));
    if (n == 0) {
      row[0] = 1;
      continue;
    }
    const auto& prev = exact_[static_cast<std::size_t>(n - 1)];
    for (int k = 1; k <= n; ++k) {
      BigInt v = prev[static_cast<std::size_t>(k - 1)];
      if (k <= n - 1) v += BigInt(n - 1) * prev[static_cast<std::size_t>(k)];
      row[static_cast<std::size_t>(k)] = v;
    }
  }
  log_.resize(static_cast<std::size_t>(max_n_ + 1));
  for (int n = 0; n <= max_n_; ++n) {
    auto& row = log_[static_cast<std::size_t>(n)];
    row.assign(static_cast<std::size_t>(n + 1), kNegInf);
    if (n <= exact_max_) {
      for (int k = 0; k <= n; ++k) {
        const BigInt& v = exact_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        if (v == 0) continue;
        // Split into a leading double and a binary exponent to keep full precision.
        const std::size_t bits = boost::multiprecision::msb(v) + 1;
        if (bits <= 1000) {
          row[static_cast<std::size_t>(k)] = std::log(v.convert_to<double>());
        } else {
          const std::size_t shift = bits - 60;
          const BigInt head = v >> shift;
          row[static_cast<std::size_t>(k)] = std::log(head.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
        }
      }
      continue;
    }
    const auto& prev = log_[static_cast<std::size_t>(n - 1)];
    const double log_nm1 = std::log(static_cast<double>(n - 1));
    for (int k = 1; k <= n; ++k) {
      double v = prev[static_cast<std::size_t>(k - 1)];
      if (k <= n - 1) v = log_add_exp(v, log_nm1 + prev[static_cast<std::size_t>(k)]);
      row[static_cast<std::size_t>(k)] = v;
    }
  }
}

const BigInt& StirlingTable::exact(int n, int k) const {
  if (n < 0 || k < 0 || k > n || n > exact_max_) {
    throw ValidationError("stirling_signless: (" + std::to_string(n) + ", " + std::to_string(k) +
                          ") outside the exact table");
  }
  return exact_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

double StirlingTable::log_value(int n, int k) const {
  if (n < 0 || k < 0 || n > max_n_) {
    throw ValidationError("stirling_signless: (" + std::to_string(n) + ", " + std::to_string(k) +
                          ") outside the table");
  }
  if (k > n) return kNegInf;
  return log_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

void HdpParams::validate() const {
  require_positive(gamma0, "gamma0");
  require_positive(gamma, "gamma");
  require_positive(alpha0, "alpha0");
  require_positive(alpha, "alpha");
}

void MfmParams::validate() const {
  require_positive(gamma, "gamma");
  require_positive(alpha, "alpha");
  if (!(omega >= 0.0 && omega <= 1.0)) throw ValidationError("omega must lie in [0, 1]");
}

EppfEngine::EppfEngine(int cap) : cap_(cap), stirling_(cap) {
  if (cap < 1) throw ValidationError("eppf engine: cap must be positive");
}

void EppfEngine::check_size(std::size_t n) const {
  if (n > static_cast<std::size_t>(cap_)) {
    throw ValidationError("exact partition law: n = " + std::to_string(n) + " exceeds the evaluation cap of " +
                          std::to_string(cap_));
  }
  if (n == 0) throw ValidationError("exact partition law: empty partition");
}

double EppfEngine::hdp_log_eppf(const Partition& p, const HdpParams& params) const {
  params.validate();
  check_size(p.size());
  const long n = static_cast<long>(p.size());
  // Per cluster: a(l) = (l-1)! |s(n_m, l)|, l = 1..n_m, stored at degree l.
  ScaledPoly total = unit_poly();
  for (int nm : p.sizes()) {
    std::vector<double> logs(static_cast<std::size_t>(nm + 1), kNegInf);
    for (int l = 1; l <= nm; ++l) logs[static_cast<std::size_t>(l)] = log_factorial(l - 1) + stirling_.log_value(nm, l);
    total = convolve(total, from_logs(logs));
  }
  const double log_g = std::log(params.gamma);
  const double inner = finish(total, [&](long l) { return static_cast<double>(l) * log_g - log_rising_factorial(params.gamma0, l); });
  return static_cast<double>(p.num_clusters()) * std::log(params.gamma0) - log_rising_factorial(params.gamma, n) + inner;
}

double EppfEngine::hdp_log_cond_eppf(const Partition& p2, const Partition& p1, const HdpParams& params) const {
  params.validate();
  check_size(p1.size());
  const CrossTab tab(p1, p2);
  ScaledPoly grand = unit_poly();
  for (int s = 0; s < tab.cols(); ++s) {
    // Distribution of the column table total t_s over rows with n_ms >= 1.
    ScaledPoly column = unit_poly();
    for (int m = 0; m < tab.rows(); ++m) {
      const int nms = tab.at(m, s);
      if (nms == 0) continue;
      std::vector<double> logs(static_cast<std::size_t>(nms + 1), kNegInf);
      for (int t = 1; t <= nms; ++t) logs[static_cast<std::size_t>(t)] = stirling_.log_value(nms, t);
      column = convolve(column, from_logs(logs));
    }
    for (std::size_t t = 1; t < column.coef.size(); ++t) {
      column.coef[t] *= std::exp(log_factorial(static_cast<long>(t) - 1));
    }
    column.coef[0] = 0.0;
    rescale(column);
    grand = convolve(grand, column);
  }
  const double log_a = std::log(params.alpha);
  const double inner = finish(grand, [&](long t) { return static_cast<double>(t) * log_a - log_rising_factorial(params.alpha0, t); });
  double out = static_cast<double>(tab.cols()) * std::log(params.alpha0) + inner;
  for (int nm : tab.row_sums()) out -= log_rising_factorial(params.alpha, nm);
  return out;
}

double EppfEngine::thdp_log_teppf(const Partition& p1, const Partition& p2, const HdpParams& params) const {
  return hdp_log_eppf(p1, params) + hdp_log_cond_eppf(p2, p1, params);
}

double EppfEngine::mfm_log_V(int n, int k, double gamma, const CountPrior& m_prior) const {
  require_positive(gamma, "gamma");
  if (k < 1 || k > n) throw ValidationError("mfm_log_V: need 1 <= K <= n");
  constexpr long kHardCap = 100000;
  const long top = m_prior.max_support();
  if (top >= 0 && k > top) return kNegInf;
  const double log_tol = std::log(1e-14);
  const double log_gamma = std::log(gamma);
  double acc = kNegInf;
  for (long m = std::max<long>(k, m_prior.min_support());; ++m) {
    if (top >= 0 && m > top) break;
    if (m > kHardCap) {
      throw NumericalError("mfm_log_V: series did not converge before M = 100000 (prior tail not summable?)");
    }
    const double lp = m_prior.log_pmf(m);
    if (lp > kNegInf) {
      const double term = lp + std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(m - k) + 1.0) -
                          log_rising_factorial(gamma * static_cast<double>(m), n);
      acc = log_add_exp(acc, term);
    }
    if (top < 0 && acc > kNegInf) {
      // Remaining terms are bounded by gamma^-n (M+1)^(K-n) P(M' > M).
      const double bound = -static_cast<double>(n) * log_gamma +
                           static_cast<double>(k - n) * std::log(static_cast<double>(m + 1)) + m_prior.log_survival_bound(m);
      if (bound < acc + log_tol) break;
    }
  }
  return acc;
}

double EppfEngine::mfm_log_eppf(const Partition& p, double gamma, const CountPrior& m_prior) const {
  check_size(p.size());
  const double log_v = mfm_log_V(static_cast<int>(p.size()), p.num_clusters(), gamma, m_prior);
  if (log_v == kNegInf) return kNegInf;
  double out = log_v;
  for (int nm : p.sizes()) out += log_rising_factorial(gamma, nm);
  return out;
}

double EppfEngine::ua_log_cond_eppf(const Partition& p2, const Partition& p1, const MfmParams& params) const {
  params.validate();
  if (p1.size() != p2.size()) throw ValidationError("ua_log_cond_eppf: partitions have different numbers of subjects");
  const double sticky = (p1 == p2 && params.omega < 1.0) ? std::log1p(-params.omega) : kNegInf;
  const double fresh = params.omega > 0.0 ? std::log(params.omega) + mfm_log_eppf(p2, params.alpha, params.s_prior) : kNegInf;
  return log_add_exp(sticky, fresh);
}

double EppfEngine::ua_log_teppf(const Partition& p1, const Partition& p2, const MfmParams& params) const {
  params.validate();
  const double first = mfm_log_eppf(p1, params.gamma, params.m_prior);
  if (first == kNegInf) return kNegInf;
  return first + ua_log_cond_eppf(p2, p1, params);
}

void EppfEngine::dump_log_V(std::ostream& out, int max_n, double gamma, const CountPrior& m_prior) const {
  out << "n,K,log_V\n";
  char buf[64];
  for (int n = 1; n <= max_n; ++n) {
    for (int k = 1; k <= n; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", mfm_log_V(n, k, gamma, m_prior));
      out << n << ',' << k << ',' << buf << '\n';
    }
  }
}

namespace {

// P(two subjects tie at the first layer) and the two conditional tie
// probabilities at the second layer.
struct TieLaw {
  double p1;
  double tie_given_tie;
  double tie_given_split;
};

DependenceReport report_from_ties(const TieLaw& t) {
  DependenceReport r;
  r.p_tie1 = t.p1;
  r.p_tie2_given_tie1 = t.tie_given_tie;
  r.p_tie2_given_split1 = t.tie_given_split;
  r.tau = (t.tie_given_tie - t.tie_given_split) / t.tie_given_tie;
  r.er = t.p1 * t.tie_given_tie + (1.0 - t.p1) * (1.0 - t.tie_given_split);
  r.eb = 1.0 - r.er;
  const double p2 = t.p1 * t.tie_given_tie + (1.0 - t.p1) * t.tie_given_split;
  r.er_indep = er_independent({t.p1, 1.0 - t.p1}, {p2, 1.0 - p2});
  return r;
}

TieLaw thdp_ties(const HdpParams& q) {
  q.validate();
  return {(q.gamma0 + 1.0 + q.gamma) / ((q.gamma + 1.0) * (q.gamma0 + 1.0)),
          (q.alpha0 + 1.0 + q.alpha) / ((q.alpha + 1.0) * (q.alpha0 + 1.0)), 1.0 / (q.alpha0 + 1.0)};
}

// E[(c + 1) / (c M + 1)]: tie probability of two subjects under a symmetric
// Dirichlet(c) mixture with M ~ prior components.
double mfm_tie(double c, const CountPrior& prior) {
  return prior.expectation([c](long m) { return (c + 1.0) / (c * static_cast<double>(m) + 1.0); });
}

TieLaw ua_ties(const MfmParams& q) {
  q.validate();
  const double t_s = mfm_tie(q.alpha, q.s_prior);
  return {mfm_tie(q.gamma, q.m_prior), (1.0 - q.omega) + q.omega * t_s, q.omega * t_s};
}

}  // namespace

double tau_thdp(const HdpParams& params) {
  params.validate();
  return params.alpha0 / (params.alpha0 + params.alpha + 1.0);
}

double er_thdp(const HdpParams& q) {
  q.validate();
  const double num = (1.0 + q.gamma0 + q.gamma) * (1.0 + q.alpha0 + q.alpha) + q.gamma0 * q.gamma * q.alpha0 * (q.alpha + 1.0);
  const double den = (q.gamma0 + 1.0) * (q.gamma + 1.0) * (q.alpha0 + 1.0) * (q.alpha + 1.0);
  return num / den;
}

double tau_ua(const MfmParams& params) {
  params.validate();
  const double t_s = mfm_tie(params.alpha, params.s_prior);
  return (1.0 - params.omega) / ((1.0 - params.omega) + params.omega * t_s);
}

double er_ua(const MfmParams& params) { return report_from_ties(ua_ties(params)).er; }

double er_independent(const std::array<double, 2>& k1, const std::array<double, 2>& k2) {
  for (double v : {k1[0], k1[1], k2[0], k2[1]}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("er_independent: probabilities must lie in [0, 1]");
  }
  if (std::abs(k1[0] + k1[1] - 1.0) > 1e-9 || std::abs(k2[0] + k2[1] - 1.0) > 1e-9) {
    throw ValidationError("er_independent: distributions must sum to one");
  }
  return k1[0] * k2[0] + k1[1] * k2[1];
}

DependenceReport thdp_dependence(const HdpParams& params) {
  DependenceReport r = report_from_ties(thdp_ties(params));
  r.tau = tau_thdp(params);
  r.er = er_thdp(params);
  r.eb = 1.0 - r.er;
  return r;
}

DependenceReport ua_dependence(const MfmParams& params) { return report_from_ties(ua_ties(params)); }

DependenceReport dependence_from_teppf(const JointLaw& law, int n) {
  if (n < 2) throw ValidationError("dependence_from_teppf: n must be at least 2");
  const auto parts = enumerate_partitions(n, 6);
  double total = 0.0;
  double tie1 = 0.0, tie_both = 0.0, split1_tie2 = 0.0;
  double er = 0.0, eb = 0.0;
  for (const Partition& p1 : parts) {
    for (const Partition& p2 : parts) {
      const double lp = law(p1, p2);
      if (std::isnan(lp)) throw NumericalError("dependence_from_teppf: law returned NaN");
      const double w = std::exp(lp);
      total += w;
      const bool t1 = p1[0] == p1[1];
      const bool t2 = p2[0] == p2[1];
      if (t1) tie1 += w;
      if (t1 && t2) tie_both += w;
      if (!t1 && t2) split1_tie2 += w;
      er += w * rand_index(p1, p2);
      eb += w * static_cast<double>(binder_count(p1, p2));
    }
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw NumericalError("dependence_from_teppf: joint law sums to " + std::to_string(total) + ", not 1");
  }
  if (!(tie1 > 0.0)) throw NumericalError("dependence_from_teppf: the law never ties subjects 0 and 1 at layer 1");
  const TieLaw ties{tie1, tie_both / tie1, tie1 < 1.0 ? split1_tie2 / (1.0 - tie1) : 0.0};
  DependenceReport r = report_from_ties(ties);
  r.er = er;
  // Per pair, so reports at different n are comparable.
  r.eb = eb / (0.5 * n * (n - 1));
  return r;
}

}  // namespace teleclust
