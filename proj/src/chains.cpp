#include "teleclust/chains.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

#include "teleclust/error.hpp"

namespace teleclust {

int default_thread_count() {
  if (const char* env = std::getenv("TELECLUST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<Trace> run_chains(const ModelSpec& spec, const LayerStack& data, int num_chains, int threads) {
  if (num_chains < 1) throw ValidationError("run_chains: need at least one chain");
  spec.validate_for(data.num_layers());
  const int workers = std::min(num_chains, threads > 0 ? threads : default_thread_count());
  std::vector<Trace> out(static_cast<std::size_t>(num_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(num_chains));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < num_chains; c = next++) {
      try {
        Rng rng = make_stream(spec.seed, static_cast<std::uint64_t>(c));
        out[static_cast<std::size_t>(c)] = fit(data, spec, rng, c);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

// Sequential seating in a Chinese restaurant franchise. `restaurant[i]` is
// the restaurant of customer i; returns the dish of every customer.
std::vector<int> franchise(const std::vector<int>& restaurant, int num_restaurants, double top, double group, Rng& rng) {
  std::vector<std::vector<int>> table_customers(static_cast<std::size_t>(num_restaurants));
  std::vector<std::vector<int>> table_dish(static_cast<std::size_t>(num_restaurants));
  std::vector<int> dish_tables;
  int total_tables = 0;
  std::vector<int> dish(restaurant.size());
  for (std::size_t i = 0; i < restaurant.size(); ++i) {
    const auto r = static_cast<std::size_t>(restaurant[i]);
    auto& customers = table_customers[r];
    int seated = 0;
    for (int c : customers) seated += c;
    double u = uniform01(rng) * (seated + group);
    int table = -1;
    for (std::size_t t = 0; t < customers.size(); ++t) {
      u -= customers[t];
      if (u < 0.0) {
        table = static_cast<int>(t);
        break;
      }
    }
    if (table < 0) {
      double v = uniform01(rng) * (total_tables + top);
      int chosen = -1;
      for (std::size_t k = 0; k < dish_tables.size(); ++k) {
        v -= dish_tables[k];
        if (v < 0.0) {
          chosen = static_cast<int>(k);
          break;
        }
      }
      if (chosen < 0) {
        chosen = static_cast<int>(dish_tables.size());
        dish_tables.push_back(0);
      }
      ++dish_tables[static_cast<std::size_t>(chosen)];
      ++total_tables;
      customers.push_back(0);
      table_dish[r].push_back(chosen);
      table = static_cast<int>(customers.size()) - 1;
    }
    ++customers[static_cast<std::size_t>(table)];
    dish[i] = table_dish[r][static_cast<std::size_t>(table)];
  }
  return dish;
}

std::vector<double> truncated_sticks(double conc, int truncation, Rng& rng) {
  std::vector<double> log_beta(static_cast<std::size_t>(truncation));
  double log_rest = 0.0;
  for (int h = 0; h + 1 < truncation; ++h) {
    const double a = log_gamma_variate(1.0, rng);
    const double b = log_gamma_variate(conc, rng);
    const double norm = log_add_exp(a, b);
    log_beta[static_cast<std::size_t>(h)] = log_rest + a - norm;
    log_rest += b - norm;
  }
  log_beta[static_cast<std::size_t>(truncation - 1)] = log_rest;
  return log_beta;
}

std::vector<double> scaled_dirichlet(double conc, const std::vector<double>& log_beta, Rng& rng) {
  std::vector<double> params(log_beta.size());
  for (std::size_t h = 0; h < params.size(); ++h) params[h] = std::log(conc) + log_beta[h];
  return log_dirichlet(params, rng);
}

std::vector<double> symmetric_dirichlet(double conc, long size, Rng& rng) {
  std::vector<double> params(static_cast<std::size_t>(size), std::log(conc));
  return log_dirichlet(params, rng);
}

}  // namespace

PartitionPair simulate_thdp_layered(int n, const HdpParams& params, Rng& rng) {
  params.validate();
  const std::vector<int> one(static_cast<std::size_t>(n), 0);
  const Partition first = canonicalize(franchise(one, 1, params.gamma0, params.gamma, rng));
  const Partition second = canonicalize(franchise(first.labels(), first.num_clusters(), params.alpha0, params.alpha, rng));
  return {first, second};
}

PartitionPair simulate_thdp_joint(int n, const HdpParams& params, int truncation, Rng& rng) {
  params.validate();
  const auto beta1 = truncated_sticks(params.gamma0, truncation, rng);
  const auto w = scaled_dirichlet(params.gamma, beta1, rng);
  const auto beta2 = truncated_sticks(params.alpha0, truncation, rng);
  std::vector<std::vector<double>> q;
  for (int m = 0; m < truncation; ++m) q.push_back(scaled_dirichlet(params.alpha, beta2, rng));
  std::vector<int> c1(static_cast<std::size_t>(n)), c2(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::size_t m = categorical_from_log(w, rng);
    c1[static_cast<std::size_t>(i)] = static_cast<int>(m);
    c2[static_cast<std::size_t>(i)] = static_cast<int>(categorical_from_log(q[m], rng));
  }
  return {canonicalize(c1), canonicalize(c2)};
}

PartitionPair simulate_ua_layered(int n, const MfmParams& params, Rng& rng) {
  params.validate();
  const auto w = symmetric_dirichlet(params.gamma, params.m_prior.sample(rng), rng);
  std::vector<int> c1(static_cast<std::size_t>(n));
  for (int& c : c1) c = static_cast<int>(categorical_from_log(w, rng));
  const Partition first = canonicalize(c1);
  if (!bernoulli(params.omega, rng)) return {first, first};
  const auto q = symmetric_dirichlet(params.alpha, params.s_prior.sample(rng), rng);
  std::vector<int> c2(static_cast<std::size_t>(n));
  for (int& c : c2) c = static_cast<int>(categorical_from_log(q, rng));
  return {first, canonicalize(c2)};
}

PartitionPair simulate_ua_joint(int n, const MfmParams& params, Rng& rng) {
  params.validate();
  // The vector of measures is either one shared discrete measure on pairs
  // of atoms (copy) or the product of two independent ones; subjects draw
  // their pair of labels from it directly.
  const bool copy = !bernoulli(params.omega, rng);
  const long m = params.m_prior.sample(rng);
  const auto w = symmetric_dirichlet(params.gamma, m, rng);
  std::vector<double> joint;
  long s = 1;
  if (copy) {
    joint = w;
  } else {
    s = params.s_prior.sample(rng);
    const auto q = symmetric_dirichlet(params.alpha, s, rng);
    joint.reserve(static_cast<std::size_t>(m * s));
    for (double a : w) {
      for (double b : q) joint.push_back(a + b);
    }
  }
  std::vector<int> c1(static_cast<std::size_t>(n)), c2(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<long>(categorical_from_log(joint, rng));
    c1[static_cast<std::size_t>(i)] = static_cast<int>(copy ? k : k / s);
    c2[static_cast<std::size_t>(i)] = static_cast<int>(copy ? k : k % s);
  }
  return {canonicalize(c1), canonicalize(c2)};
}

}  // namespace teleclust
