#include "teleclust/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "teleclust/error.hpp"

namespace teleclust {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x7e1ec1u};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  // Marsaglia polar method, one value per call.
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double log_gamma_variate(double shape, Rng& rng) {
  if (!(shape >= 0.0) || !std::isfinite(shape)) {
    throw NumericalError("gamma variate: invalid shape");
  }
  if (shape == 0.0) return kNegInf;
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^(1/a)
    return log_gamma_variate(shape + 1.0, rng) + std::log(uniform01(rng)) / shape;
  }
  // Marsaglia and Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d) + std::log(v);
  }
}

double log_gamma_variate_log_shape(double log_shape, Rng& rng) {
  if (std::isnan(log_shape)) throw NumericalError("gamma variate: NaN shape");
  if (log_shape == kNegInf) return kNegInf;
  if (log_shape > -30.0) return log_gamma_variate(std::exp(log_shape), rng);
  // shape below ~1e-13: G(a+1) is Gamma(1) to double precision and
  // log(U)/a = log(U) * exp(-log_shape).
  const double head = log_gamma_variate(1.0, rng);
  const double tail = std::log(uniform01(rng)) * std::exp(-log_shape);
  return head + tail;
}

double gamma_variate(double shape, Rng& rng) { return std::exp(log_gamma_variate(shape, rng)); }

bool bernoulli(double p, Rng& rng) { return uniform01(rng) < p; }

long poisson(double lambda, Rng& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw NumericalError("poisson: invalid rate");
  if (lambda == 0.0) return 0;
  if (lambda > 500.0) return poisson(lambda / 2.0, rng) + poisson(lambda / 2.0, rng);
  // Sequential inversion.
  const double u = uniform01(rng);
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  long k = 0;
  while (u > cdf) {
    ++k;
    pmf *= lambda / static_cast<double>(k);
    cdf += pmf;
    if (pmf == 0.0 && cdf < u) break;  // roundoff guard
  }
  return k;
}

std::vector<double> log_dirichlet(std::span<const double> log_params, Rng& rng) {
  std::vector<double> out(log_params.size());
  for (std::size_t h = 0; h < out.size(); ++h) out[h] = log_gamma_variate_log_shape(log_params[h], rng);
  const double norm = log_sum_exp(out);
  if (!std::isfinite(norm)) throw NumericalError("dirichlet draw degenerate");
  for (double& v : out) v -= norm;
  return out;
}

std::size_t categorical_from_log(std::span<const double> log_weights, Rng& rng) {
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) throw NumericalError("categorical draw with no finite weight");
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  double u = uniform01(rng) * total;
  for (std::size_t h = 0; h < log_weights.size(); ++h) {
    u -= std::exp(log_weights[h] - top);
    if (u <= 0.0) return h;
  }
  // Roundoff: return the last index with positive weight.
  for (std::size_t h = log_weights.size(); h-- > 0;) {
    if (log_weights[h] > kNegInf) return h;
  }
  return 0;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw ValidationError("sample_without_replacement: k > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(pool[i], pool[std::min(j, n - 1)]);
  }
  pool.resize(k);
  return pool;
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double top = *std::max_element(values.begin(), values.end());
  if (top == kNegInf) return kNegInf;
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

}  // namespace teleclust
