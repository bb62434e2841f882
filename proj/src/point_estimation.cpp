#include "teleclust/point_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "teleclust/error.hpp"

namespace teleclust {

namespace {

struct Candidate {
  const Partition* partition;
  std::size_t weight;
  std::size_t first;
};

std::vector<Candidate> distinct(const std::vector<Partition>& draws) {
  std::map<std::vector<int>, std::size_t> index;
  std::vector<Candidate> out;
  for (std::size_t d = 0; d < draws.size(); ++d) {
    auto [it, inserted] = index.try_emplace(draws[d].labels(), out.size());
    if (inserted) {
      out.push_back({&draws[d], 1, d});
    } else {
      ++out[it->second].weight;
    }
  }
  return out;
}

void require_draws(const std::vector<Partition>& draws, const char* what) {
  if (draws.empty()) throw ValidationError(std::string(what) + ": no retained draws");
  for (const Partition& p : draws) {
    if (p.size() != draws.front().size()) throw ValidationError(std::string(what) + ": draws differ in size");
  }
}

double entropy(const Partition& p) {
  const double n = static_cast<double>(p.size());
  double h = 0.0;
  for (int s : p.sizes()) h -= s / n * std::log(s / n);
  return h;
}

// Mutual information with a reusable dense contingency buffer.
double mutual_information(const Partition& a, const Partition& b, std::vector<int>& buf) {
  const auto ka = static_cast<std::size_t>(a.num_clusters());
  const auto kb = static_cast<std::size_t>(b.num_clusters());
  buf.assign(ka * kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++buf[static_cast<std::size_t>(a[i]) * kb + static_cast<std::size_t>(b[i])];
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (std::size_t m = 0; m < ka; ++m) {
    const double r = a.sizes()[m];
    for (std::size_t s = 0; s < kb; ++s) {
      const int c = buf[m * kb + s];
      if (c == 0) continue;
      mi += c / n * std::log(c * n / (r * b.sizes()[s]));
    }
  }
  return mi;
}

// Rand index with a reusable dense contingency buffer.
double fast_rand(const Partition& a, const Partition& b, std::vector<int>& buf) {
  const auto kb = static_cast<std::size_t>(b.num_clusters());
  buf.assign(static_cast<std::size_t>(a.num_clusters()) * kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++buf[static_cast<std::size_t>(a[i]) * kb + static_cast<std::size_t>(b[i])];
  auto pairs = [](double x) { return 0.5 * x * (x - 1.0); };
  double both = 0.0, first = 0.0, second = 0.0;
  for (int c : buf) both += pairs(c);
  for (int r : a.sizes()) first += pairs(r);
  for (int c : b.sizes()) second += pairs(c);
  const double total = pairs(static_cast<double>(a.size()));
  return (total - first - second + 2.0 * both) / total;
}

// Lower loss wins; within 1e-12, fewer clusters, then earlier first draw.
bool better(double loss, const Candidate& c, double best_loss, const Candidate& best) {
  if (loss < best_loss - 1e-12) return true;
  if (loss > best_loss + 1e-12) return false;
  if (c.partition->num_clusters() != best.partition->num_clusters()) {
    return c.partition->num_clusters() < best.partition->num_clusters();
  }
  return c.first < best.first;
}

}  // namespace

SimilarityMatrix::SimilarityMatrix(const std::vector<Partition>& draws) {
  require_draws(draws, "similarity");
  n_ = draws.front().size();
  values_.assign(n_ * n_, 0.0);
  for (const Partition& p : draws) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i; j < n_; ++j) {
        if (p[i] == p[j]) values_[i * n_ + j] += 1.0;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(draws.size());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      values_[i * n_ + j] *= inv;
      values_[j * n_ + i] = values_[i * n_ + j];
    }
  }
}

std::vector<std::vector<double>> SimilarityMatrix::rows() const {
  std::vector<std::vector<double>> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i].assign(values_.begin() + static_cast<long>(i * n_), values_.begin() + static_cast<long>((i + 1) * n_));
  return out;
}

SimilarityMatrix similarity(const Trace& trace, int layer) { return SimilarityMatrix(trace.layer(layer)); }

PointEstimate min_vi(const std::vector<Partition>& draws, std::size_t max_candidates) {
  require_draws(draws, "min_vi");
  const auto all = distinct(draws);
  std::vector<Candidate> scored = all;
  if (max_candidates > 0 && scored.size() > max_candidates) {
    std::stable_sort(scored.begin(), scored.end(), [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });
    scored.resize(max_candidates);
  }
  std::vector<double> h(all.size());
  double mean_h = 0.0;
  for (std::size_t u = 0; u < all.size(); ++u) {
    h[u] = entropy(*all[u].partition);
    mean_h += static_cast<double>(all[u].weight) * h[u];
  }
  const double total = static_cast<double>(draws.size());
  mean_h /= total;

  std::vector<int> buf;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t c = 0; c < scored.size(); ++c) {
    // E[VI] = H(c) + E[H(draw)] - 2 E[I(c, draw)]
    double mi = 0.0;
    for (const Candidate& u : all) mi += static_cast<double>(u.weight) * mutual_information(*scored[c].partition, *u.partition, buf);
    const double loss = std::max(0.0, entropy(*scored[c].partition) + mean_h - 2.0 * mi / total);
    if (c == 0 || better(loss, scored[c], best_loss, scored[best])) {
      best_loss = loss;
      best = c;
    }
  }
  // Recompute the winner's loss term by term for an exact report.
  double exact = 0.0;
  for (const Candidate& u : all) exact += static_cast<double>(u.weight) * variation_of_information(*scored[best].partition, *u.partition);
  return {*scored[best].partition, exact / total, scored[best].first, scored.size()};
}

PointEstimate min_binder(const std::vector<Partition>& draws) {
  require_draws(draws, "min_binder");
  const SimilarityMatrix sim(draws);
  const auto all = distinct(draws);
  const std::size_t n = sim.size();
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t c = 0; c < all.size(); ++c) {
    const Partition& p = *all[c].partition;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) loss += p[i] == p[j] ? 1.0 - sim.at(i, j) : sim.at(i, j);
    }
    if (c == 0 || better(loss, all[c], best_loss, all[best])) {
      best_loss = loss;
      best = c;
    }
  }
  return {*all[best].partition, best_loss, all[best].first, all.size()};
}

PointEstimate min_vi(const Trace& trace, int layer, std::size_t max_candidates) {
  return min_vi(trace.layer(layer), max_candidates);
}

PointEstimate min_binder(const Trace& trace, int layer) { return min_binder(trace.layer(layer)); }

Interval summarize_draws(std::vector<double> values, double coverage) {
  if (values.empty()) throw ValidationError("summarize_draws: no values");
  Interval out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  out.lower = quantile((1.0 - coverage) / 2.0);
  out.upper = quantile(1.0 - (1.0 - coverage) / 2.0);
  return out;
}

namespace {
// Posterior probability that two distinct subjects share a cluster,
// averaged over all pairs.
double tie_frequency(const std::vector<Partition>& draws) {
  double acc = 0.0;
  for (const Partition& p : draws) {
    const double n = static_cast<double>(p.size());
    double together = 0.0;
    for (int s : p.sizes()) together += 0.5 * s * (s - 1.0);
    acc += together / (0.5 * n * (n - 1.0));
  }
  return acc / static_cast<double>(draws.size());
}
}  // namespace

DependenceSummary posterior_dependence(const Trace& trace, int layer_a, int layer_b, std::optional<double> er_indep) {
  const auto a = trace.layer(layer_a);
  const auto b = trace.layer(layer_b);
  require_draws(a, "posterior_dependence");
  if (a.front().size() < 2) throw ValidationError("posterior_dependence: needs at least two subjects");
  DependenceSummary out;
  if (er_indep) {
    out.er_indep = *er_indep;
  } else {
    const double p1 = tie_frequency(a);
    const double p2 = tie_frequency(b);
    out.er_indep = p1 * p2 + (1.0 - p1) * (1.0 - p2);
  }
  const bool centered = out.er_indep < 1.0 - 1e-12;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double r = rand_index(a[d], b[d]);
    out.rand.push_back(r);
    out.tari.push_back(centered ? (r - out.er_indep) / (1.0 - out.er_indep) : std::numeric_limits<double>::quiet_NaN());
  }
  out.rand_summary = summarize_draws(out.rand);
  out.tari_summary = summarize_draws(out.tari);
  return out;
}

std::vector<std::vector<double>> posterior_rand_matrix(const Trace& trace) {
  const int num = trace.num_layers();
  if (trace.empty()) throw ValidationError("posterior_rand_matrix: no retained draws");
  if (trace.meta().num_subjects < 2) throw ValidationError("posterior_rand_matrix: needs at least two subjects");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(num), std::vector<double>(static_cast<std::size_t>(num), 1.0));
  std::vector<int> buf;
  for (int l = 0; l < num; ++l) {
    for (int m = l + 1; m < num; ++m) {
      double acc = 0.0;
      for (const Draw& d : trace.draws()) acc += fast_rand(d.layers[static_cast<std::size_t>(l)], d.layers[static_cast<std::size_t>(m)], buf);
      acc /= static_cast<double>(trace.size());
      out[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)] = acc;
      out[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] = acc;
    }
  }
  return out;
}

std::vector<std::vector<double>> point_rand_matrix(const std::vector<Partition>& estimates) {
  const std::size_t num = estimates.size();
  std::vector<std::vector<double>> out(num, std::vector<double>(num, 1.0));
  for (std::size_t l = 0; l < num; ++l) {
    for (std::size_t m = l + 1; m < num; ++m) {
      out[l][m] = out[m][l] = rand_index(estimates[l], estimates[m]);
    }
  }
  return out;
}

}  // namespace teleclust
