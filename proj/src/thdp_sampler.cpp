#include <cmath>
#include <limits>
#include <string>

#include "teleclust/error.hpp"
#include "teleclust/samplers.hpp"

namespace teleclust {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ThdpLayer {
  int groups = 1;  // 1 at the root, parent truncation otherwise
  double top = 1.0;    // gamma0 at the root, alpha0 on edges
  double group = 1.0;  // gamma at the root, alpha on edges
  detail::AdaptiveStep top_step;
  detail::AdaptiveStep group_step;
  std::vector<double> log_beta;  // H shared sticks
  std::vector<double> log_w;     // groups x H, row-major
  std::vector<detail::KernelCache> kernels;
  std::vector<int> alloc;
  std::vector<int> counts;  // groups x H
  LayerPrior prior;
  bool has_data = false;
};

class ThdpSampler {
 public:
  ThdpSampler(const LayerStack& data, const Polytree& tree, const ModelSpec& spec, Rng& rng)
      : data_(data), tree_(tree), spec_(spec), rng_(rng), n_(data.num_subjects()), H_(spec.truncation) {
    const auto priors = spec.kernel_priors(data);
    layers_.resize(static_cast<std::size_t>(tree.num_layers()));
    for (int l = 0; l < tree.num_layers(); ++l) {
      ThdpLayer& L = layer(l);
      if (l == tree.root()) {
        L.groups = 1;
        L.top = spec.thdp_root.gamma0;
        L.group = spec.thdp_root.gamma;
      } else {
        const ThdpEdge e = spec.thdp_edge(l, tree);
        L.groups = H_;
        L.top = e.alpha0;
        L.group = e.alpha;
      }
      L.prior = priors[static_cast<std::size_t>(l)];
      L.has_data = !spec.mcmc.prior_only && data.layer(l).dim > 0;
      L.alloc.assign(n_, 0);
      L.counts.assign(static_cast<std::size_t>(L.groups * H_), 0);
      L.log_beta.assign(static_cast<std::size_t>(H_), 0.0);
      L.log_w.assign(static_cast<std::size_t>(L.groups * H_), 0.0);
    }
    initialize();
  }

  Trace run(int chain, const SweepCallback& on_sweep) {
    TraceMeta meta;
    meta.model = "thdp";
    meta.seed = spec_.seed;
    meta.chain = chain;
    meta.iterations = spec_.mcmc.iterations;
    meta.burn_in = spec_.mcmc.burn_in;
    meta.thin = spec_.mcmc.thin;
    meta.num_subjects = n_;
    meta.parents = tree_.parents();
    meta.config = nlohmann::json::parse(spec_.to_json_text());
    for (int l = 0; l < tree_.num_layers(); ++l) {
      const std::string s = std::to_string(l);
      if (l == tree_.root()) {
        meta.hyper_names.push_back("gamma0");
        meta.hyper_names.push_back("gamma");
      } else {
        meta.hyper_names.push_back("alpha0[" + s + "]");
        meta.hyper_names.push_back("alpha[" + s + "]");
      }
    }
    for (int l = 0; l < tree_.num_layers(); ++l) meta.hyper_names.push_back("K[" + std::to_string(l) + "]");

    Trace trace(std::move(meta));
    for (long it = 1; it <= spec_.mcmc.iterations; ++it) {
      sweep(it);
      if (spec_.mcmc.check_invariants) check_invariants(it);
      if (it > spec_.mcmc.burn_in && (it - spec_.mcmc.burn_in) % spec_.mcmc.thin == 0) trace.append(snapshot(it));
      if (on_sweep) on_sweep(it);
    }
    return trace;
  }

 private:
  ThdpLayer& layer(int l) { return layers_[static_cast<std::size_t>(l)]; }

  int group_of(int l, std::size_t i) {
    const int p = tree_.parent(l);
    return p < 0 ? 0 : layer(p).alloc[i];
  }

  void initialize() {
    for (int l : tree_.topological_order()) {
      ThdpLayer& L = layer(l);
      std::vector<int> m(static_cast<std::size_t>(H_), 0);
      draw_sticks(L, m);
      draw_weights(L);
      draw_atoms(l);
      for (std::size_t i = 0; i < n_; ++i) {
        const int g = group_of(l, i);
        const std::span<const double> row(L.log_w.data() + g * H_, static_cast<std::size_t>(H_));
        L.alloc[i] = static_cast<int>(categorical_from_log(row, rng_));
      }
    }
  }

  void sweep(long it) {
    adapting_ = it <= spec_.mcmc.burn_in;
    for (int l : tree_.topological_order()) update_allocations(l, it);
    for (int l = 0; l < tree_.num_layers(); ++l) {
      ThdpLayer& L = layer(l);
      count(l);
      if (spec_.mcmc.update_concentrations) update_group_concentration(L);
      const std::vector<int> m = table_counts(L);
      if (spec_.mcmc.update_concentrations) update_top_concentration(L, m);
      draw_sticks(L, m);
      draw_weights(L);
      draw_atoms(l);
    }
  }

  void update_allocations(int l, long it) {
    ThdpLayer& L = layer(l);
    const auto& kids = tree_.children(l);
    const Layer& obs = data_.layer(l);
    std::vector<double> lp(static_cast<std::size_t>(H_));
    for (std::size_t i = 0; i < n_; ++i) {
      const double* w = L.log_w.data() + group_of(l, i) * H_;
      for (int h = 0; h < H_; ++h) {
        double v = w[h];
        if (L.has_data) v += L.kernels[static_cast<std::size_t>(h)](obs.row(i));
        for (int c : kids) {
          const ThdpLayer& C = layer(c);
          v += C.log_w[static_cast<std::size_t>(h * H_ + C.alloc[i])];
        }
        lp[static_cast<std::size_t>(h)] = v;
      }
      for (double v : lp) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
          throw NumericalError("thdp sampler: non-finite allocation weight at iteration " + std::to_string(it) +
                               ", layer " + std::to_string(l) + ", subject " + std::to_string(i));
        }
      }
      L.alloc[i] = static_cast<int>(categorical_from_log(lp, rng_));
    }
  }

  void count(int l) {
    ThdpLayer& L = layer(l);
    std::fill(L.counts.begin(), L.counts.end(), 0);
    for (std::size_t i = 0; i < n_; ++i) ++L.counts[static_cast<std::size_t>(group_of(l, i) * H_ + L.alloc[i])];
  }

  // Group concentration with the group weights integrated out.
  void update_group_concentration(ThdpLayer& L) {
    auto target = [&](double c) {
      const double log_c = std::log(c);
      double out = 0.0;
      for (int g = 0; g < L.groups; ++g) {
        long ng = 0;
        for (int h = 0; h < H_; ++h) {
          const int k = L.counts[static_cast<std::size_t>(g * H_ + h)];
          if (k == 0) continue;
          ng += k;
          out += detail::log_rising_from_log(log_c + L.log_beta[static_cast<std::size_t>(h)], k);
        }
        if (ng > 0) out -= log_rising_factorial(c, ng);
      }
      return out;
    };
    L.group = detail::mh_positive(L.group, target, L.group_step, adapting_, rng_);
  }

  // Auxiliary table counts (Chinese restaurant table distribution).
  std::vector<int> table_counts(const ThdpLayer& L) {
    std::vector<int> m(static_cast<std::size_t>(H_), 0);
    const double log_c = std::log(L.group);
    for (int g = 0; g < L.groups; ++g) {
      for (int h = 0; h < H_; ++h) {
        const int k = L.counts[static_cast<std::size_t>(g * H_ + h)];
        if (k == 0) continue;
        const double a = std::exp(log_c + L.log_beta[static_cast<std::size_t>(h)]);
        int tables = 1;
        for (int j = 1; j < k; ++j) {
          if (uniform01(rng_) * (a + j) < a) ++tables;
        }
        m[static_cast<std::size_t>(h)] += tables;
      }
    }
    return m;
  }

  // Top-level concentration with the truncated sticks integrated out.
  void update_top_concentration(ThdpLayer& L, const std::vector<int>& m) {
    std::vector<double> above(static_cast<std::size_t>(H_), 0.0);  // sum_{j>h} m_j
    for (int h = H_ - 2; h >= 0; --h) above[static_cast<std::size_t>(h)] = above[static_cast<std::size_t>(h + 1)] + m[static_cast<std::size_t>(h + 1)];
    auto target = [&](double c0) {
      double out = 0.0;
      for (int h = 0; h + 1 < H_; ++h) {
        const double gt = above[static_cast<std::size_t>(h)];
        const double ge = gt + m[static_cast<std::size_t>(h)];
        out += std::log(c0) + std::lgamma(c0 + gt) - std::lgamma(1.0 + c0 + ge);
      }
      return out;
    };
    L.top = detail::mh_positive(L.top, target, L.top_step, adapting_, rng_);
  }

  // Truncated stick-breaking given table counts: V_h ~ Beta(1 + m_h, c0 + sum_{j>h} m_j).
  void draw_sticks(ThdpLayer& L, const std::vector<int>& m) {
    double above = 0.0;
    std::vector<double> gt(static_cast<std::size_t>(H_), 0.0);
    for (int h = H_ - 1; h >= 0; --h) {
      gt[static_cast<std::size_t>(h)] = above;
      above += m[static_cast<std::size_t>(h)];
    }
    double log_rest = 0.0;
    for (int h = 0; h + 1 < H_; ++h) {
      const double a = log_gamma_variate(1.0 + m[static_cast<std::size_t>(h)], rng_);
      const double b = log_gamma_variate(L.top + gt[static_cast<std::size_t>(h)], rng_);
      const double norm = log_add_exp(a, b);
      L.log_beta[static_cast<std::size_t>(h)] = log_rest + a - norm;
      log_rest += b - norm;
    }
    L.log_beta[static_cast<std::size_t>(H_ - 1)] = log_rest;
  }

  void draw_weights(ThdpLayer& L) {
    const double log_c = std::log(L.group);
    std::vector<double> params(static_cast<std::size_t>(H_));
    for (int g = 0; g < L.groups; ++g) {
      for (int h = 0; h < H_; ++h) {
        const double base = log_c + L.log_beta[static_cast<std::size_t>(h)];
        const int k = L.counts[static_cast<std::size_t>(g * H_ + h)];
        params[static_cast<std::size_t>(h)] = k > 0 ? log_add_exp(base, std::log(static_cast<double>(k))) : base;
      }
      const auto w = log_dirichlet(params, rng_);
      std::copy(w.begin(), w.end(), L.log_w.begin() + g * H_);
    }
  }

  void draw_atoms(int l) {
    ThdpLayer& L = layer(l);
    if (!L.has_data) return;
    const Layer& obs = data_.layer(l);
    std::vector<ClusterStats> stats(static_cast<std::size_t>(H_), ClusterStats(obs.dim));
    for (std::size_t i = 0; i < n_; ++i) stats[static_cast<std::size_t>(L.alloc[i])].add(obs.row(i));
    L.kernels.resize(static_cast<std::size_t>(H_));
    for (int h = 0; h < H_; ++h) {
      const auto& s = stats[static_cast<std::size_t>(h)];
      L.kernels[static_cast<std::size_t>(h)].set(sample_atom(s.count() ? posterior_params(L.prior, s) : L.prior, rng_));
    }
  }

  void check_invariants(long it) {
    auto fail = [&](const std::string& what) {
      throw NumericalError("thdp sampler invariant violated at iteration " + std::to_string(it) + ": " + what);
    };
    for (int l = 0; l < tree_.num_layers(); ++l) {
      ThdpLayer& L = layer(l);
      if (std::abs(log_sum_exp(L.log_beta)) > 1e-9) fail("sticks do not sum to one at layer " + std::to_string(l));
      for (int g = 0; g < L.groups; ++g) {
        const std::span<const double> row(L.log_w.data() + g * H_, static_cast<std::size_t>(H_));
        if (std::abs(log_sum_exp(row)) > 1e-9) fail("weights do not sum to one at layer " + std::to_string(l));
      }
      for (int a : L.alloc) {
        if (a < 0 || a >= H_) fail("allocation out of range at layer " + std::to_string(l));
      }
    }
  }

  Draw snapshot(long it) {
    Draw d;
    d.iteration = it;
    for (int l = 0; l < tree_.num_layers(); ++l) {
      d.layers.push_back(canonicalize(layer(l).alloc));
      const ThdpLayer& L = layer(l);
      d.hyper.push_back(L.top);
      d.hyper.push_back(L.group);
    }
    for (const Partition& p : d.layers) d.hyper.push_back(p.num_clusters());
    return d;
  }

  const LayerStack& data_;
  const Polytree& tree_;
  const ModelSpec& spec_;
  Rng& rng_;
  std::size_t n_;
  int H_;
  bool adapting_ = true;
  std::vector<ThdpLayer> layers_;
};

void check_shapes(const LayerStack& data, const Polytree& tree, const ModelSpec& spec) {
  if (data.num_layers() != tree.num_layers()) {
    throw ValidationError("fit: data has " + std::to_string(data.num_layers()) + " layers but the tree has " +
                          std::to_string(tree.num_layers()));
  }
  if (data.num_subjects() == 0) throw ValidationError("fit: no subjects");
  spec.validate_for(data.num_layers());
}

}  // namespace

Trace fit_thdp(const LayerStack& data, const Polytree& tree, const ModelSpec& spec, Rng& rng, int chain,
               const SweepCallback& on_sweep) {
  check_shapes(data, tree, spec);
  ThdpSampler sampler(data, tree, spec, rng);
  return sampler.run(chain, on_sweep);
}

Trace fit(const LayerStack& data, const ModelSpec& spec, Rng& rng, int chain, const SweepCallback& on_sweep) {
  const Polytree tree = spec.tree(data.num_layers());
  return spec.model == ModelKind::Thdp ? fit_thdp(data, tree, spec, rng, chain, on_sweep)
                                       : fit_ua(data, tree, spec, rng, chain, on_sweep);
}

}  // namespace teleclust
