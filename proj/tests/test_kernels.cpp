#include <doctest.h>

#include <cmath>
#include <vector>

#include "teleclust/error.hpp"
#include "teleclust/kernels.hpp"

using namespace teleclust;

namespace {

double normal_logpdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * (x - mean) * (x - mean) / var;
}

double scaled_inv_chi2_logpdf(double s2, double nu, double tau2) {
  return 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu) + 0.5 * nu * std::log(tau2) - (0.5 * nu + 1.0) * std::log(s2) -
         0.5 * nu * tau2 / s2;
}

// Marginal likelihood of xs by Simpson quadrature over (mu, log sigma^2).
double marginal_by_quadrature(const std::vector<double>& xs, const NixParams& p) {
  const int nt = 2400, nm = 400;
  const double t_lo = -7.0, t_hi = 7.0;
  const double ht = (t_hi - t_lo) / nt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean = (p.kappa0 * p.mu0 + mean) / (p.kappa0 + static_cast<double>(xs.size()));
  auto simpson_weight = [](int i, int n) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double outer = 0.0;
  for (int a = 0; a <= nt; ++a) {
    const double t = t_lo + a * ht;
    const double s2 = std::exp(t);
    const double sd = std::sqrt(s2 / (p.kappa0 + static_cast<double>(xs.size())));
    const double m_lo = mean - 14.0 * sd, m_hi = mean + 14.0 * sd;
    const double hm = (m_hi - m_lo) / nm;
    double inner = 0.0;
    for (int b = 0; b <= nm; ++b) {
      const double mu = m_lo + b * hm;
      double lp = normal_logpdf(mu, p.mu0, s2 / p.kappa0);
      for (double x : xs) lp += normal_logpdf(x, mu, s2);
      inner += simpson_weight(b, nm) * std::exp(lp);
    }
    inner *= hm / 3.0;
    // d sigma^2 = sigma^2 dt
    outer += simpson_weight(a, nt) * inner * std::exp(scaled_inv_chi2_logpdf(s2, p.nu0, p.sigma0sq)) * s2;
  }
  return std::log(outer * ht / 3.0);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("parameter validation and the Normal-Inverse-Gamma form") {
    CHECK_THROWS_AS((NixParams{0.0, 0.0, 2.0, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((NixParams{0.0, 1.0, -2.0, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((NixParams{NAN, 1.0, 2.0, 1.0}.validate()), ValidationError);
    const NixParams p = NixParams::from_nig(1.0, 0.5, 3.0, 4.0);
    CHECK(p.nig_shape() == doctest::Approx(3.0));
    CHECK(p.nig_scale() == doctest::Approx(4.0));
  }

  TEST_CASE("cluster statistics add, remove and merge") {
    const std::vector<double> xs{1.5, -0.3, 2.2, 7.0, 0.1, 3.3};
    ClusterStats all(1), left(1), right(1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double row[] = {xs[i]};
      all.add(row);
      (i < 2 ? left : right).add(row);
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= 6.0;
    double m2 = 0.0;
    for (double x : xs) m2 += (x - mean) * (x - mean);
    CHECK(all.count() == 6);
    CHECK(all.mean(0) == doctest::Approx(mean).epsilon(1e-14));
    CHECK(all.m2(0) == doctest::Approx(m2).epsilon(1e-13));
    left.merge(right);
    CHECK(left.mean(0) == doctest::Approx(mean).epsilon(1e-14));
    CHECK(left.m2(0) == doctest::Approx(m2).epsilon(1e-13));
    const double last[] = {3.3};
    all.remove(last);
    CHECK(all.count() == 5);
    CHECK(all.mean(0) == doctest::Approx((mean * 6.0 - 3.3) / 5.0).epsilon(1e-14));
    all.clear();
    CHECK(all.count() == 0);
  }

  TEST_CASE("marginal likelihood equals the chain of predictives") {
    const NixParams p{0.4, 0.3, 3.0, 1.7};
    const std::vector<double> xs{0.2, 1.9, -0.8, 1.1};
    ClusterStats stats(1);
    double chain = 0.0;
    for (double x : xs) {
      chain += log_predictive(x, stats.count() ? posterior_params(p, stats, 0) : p);
      const double row[] = {x};
      stats.add(row);
    }
    CHECK(log_marginal(stats, LayerPrior{p}) == doctest::Approx(chain).epsilon(1e-12));
    CHECK(log_marginal(ClusterStats(1), LayerPrior{p}) == 0.0);
  }

  TEST_CASE("marginal likelihood matches quadrature") {
    const NixParams p{0.5, 0.4, 4.0, 0.8};
    const std::vector<double> xs{0.1, 1.3, 0.7};
    ClusterStats stats(1);
    for (double x : xs) {
      const double row[] = {x};
      stats.add(row);
    }
    CHECK(log_marginal(stats, LayerPrior{p}) == doctest::Approx(marginal_by_quadrature(xs, p)).epsilon(1e-6));
  }

  TEST_CASE("coordinates are independent") {
    const LayerPrior prior{NixParams{0.0, 0.2, 2.0, 1.0}, NixParams{1.0, 1.0, 5.0, 0.5}};
    ClusterStats both(2), first(1), second(1);
    for (auto [a, b] : {std::pair{0.3, 1.2}, std::pair{-0.4, 0.8}}) {
      const double row[] = {a, b};
      both.add(row);
      const double ra[] = {a}, rb[] = {b};
      first.add(ra);
      second.add(rb);
    }
    CHECK(log_marginal(both, prior) ==
          doctest::Approx(log_marginal(first, LayerPrior{prior[0]}) + log_marginal(second, LayerPrior{prior[1]})).epsilon(1e-13));
  }

  TEST_CASE("likelihood of an atom") {
    const Atom atom{{1.0, -2.0}, {0.5, 2.0}};
    const double x[] = {0.3, -1.0};
    CHECK(log_likelihood(x, atom) == doctest::Approx(normal_logpdf(0.3, 1.0, 0.5) + normal_logpdf(-1.0, -2.0, 2.0)).epsilon(1e-14));
  }

  TEST_CASE("atom draws have the prior moments") {
    const LayerPrior prior{NixParams{2.0, 0.5, 6.0, 1.5}};
    Rng rng = make_stream(4, 0);
    const int draws = 200000;
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < draws; ++i) {
      const Atom a = sample_atom(prior, rng);
      mean += a.mean[0];
      var += a.variance[0];
    }
    mean /= draws;
    var /= draws;
    // E[sigma^2] = nu sigma0^2 / (nu - 2).
    CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
    CHECK(var == doctest::Approx(6.0 * 1.5 / 4.0).epsilon(0.01));
  }

  TEST_CASE("data-driven defaults") {
    const std::vector<double> column{1.0, 2.0, 3.0, 4.0};
    const NixParams p = default_prior(column);
    CHECK(p.mu0 == doctest::Approx(2.5));
    CHECK(p.sigma0sq == doctest::Approx(5.0 / 3.0));
    const std::vector<double> constant{3.0, 3.0, 3.0};
    CHECK(default_prior(constant).sigma0sq == 1.0);
  }
}
