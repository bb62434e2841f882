#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "teleclust/error.hpp"
#include "teleclust/samplers.hpp"

namespace teleclust {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct UaLayer {
  int parent = -1;
  int comps = 1;  // M at the root, S on edges
  bool active = true;  // root, or an edge with Z = 1
  double conc = 1.0;  // gamma at the root, alpha on edges
  double omega = 1.0;
  CountPrior count_prior = CountPrior::point_mass(1);
  std::vector<double> log_w;
  std::vector<int> own;
  // Atoms of the layer's own mixture, indexed by own labels.
  std::vector<detail::KernelCache> own_kernels;
  // Atoms used while copying the parent partition, indexed by the parent's
  // effective labels.
  std::vector<detail::KernelCache> copy_kernels;
  LayerPrior prior;
  bool has_data = false;
};

class UaSampler {
 public:
  UaSampler(const LayerStack& data, const Polytree& tree, const ModelSpec& spec, Rng& rng)
      : data_(data), tree_(tree), spec_(spec), rng_(rng), n_(data.num_subjects()) {
    const auto priors = spec.kernel_priors(data);
    layers_.resize(static_cast<std::size_t>(tree.num_layers()));
    for (int l = 0; l < tree.num_layers(); ++l) {
      UaLayer& L = layer(l);
      L.parent = tree.parent(l);
      if (l == tree.root()) {
        L.conc = spec.ua_root.gamma;
        L.count_prior = spec.ua_root.m_prior;
        L.omega = 1.0;
      } else {
        const UaEdge e = spec.ua_edge(l, tree);
        L.conc = e.alpha;
        L.omega = e.omega;
        L.count_prior = e.s_prior;
      }
      L.prior = priors[static_cast<std::size_t>(l)];
      L.has_data = !spec.mcmc.prior_only && data.layer(l).dim > 0;
      L.own.assign(n_, 0);
    }
    initialize();
  }

  Trace run(int chain, const SweepCallback& on_sweep) {
    TraceMeta meta;
    meta.model = "unique_atom";
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
        meta.hyper_names.push_back("M");
      } else {
        meta.hyper_names.push_back("S[" + s + "]");
        meta.hyper_names.push_back("Z[" + s + "]");
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
  UaLayer& layer(int l) { return layers_[static_cast<std::size_t>(l)]; }

  // Nearest layer at or above l that carries its own partition.
  int source(int l) {
    while (!layer(l).active) l = layer(l).parent;
    return l;
  }

  const std::vector<int>& effective(int l) { return layer(source(l)).own; }
  int effective_count(int l) { return layer(source(l)).comps; }

  // Layers whose effective partition is the own partition of `a`, with the
  // copy chain above them passing only through inactive edges.
  std::vector<int> closure(int a) {
    std::vector<int> out{a};
    for (std::size_t head = 0; head < out.size(); ++head) {
      for (int c : tree_.children(out[head])) {
        if (!layer(c).active) out.push_back(c);
      }
    }
    return out;
  }

  int clamp_count(long m) const { return static_cast<int>(std::min<long>(m, spec_.max_components)); }

  void initialize() {
    for (int l : tree_.topological_order()) {
      UaLayer& L = layer(l);
      if (l != tree_.root()) L.active = bernoulli(L.omega, rng_);
      L.comps = clamp_count(L.count_prior.sample(rng_));
      draw_weights(L, false);
      for (std::size_t i = 0; i < n_; ++i) L.own[i] = static_cast<int>(categorical_from_log(L.log_w, rng_));
    }
    resize_copy_kernels();
    draw_atoms();
  }

  void sweep(long it) {
    for (int l : tree_.topological_order()) update_allocations(l, it);
    for (int l : tree_.topological_order()) update_count_and_weights(l);
    for (int l : tree_.topological_order()) {
      if (l != tree_.root()) {
        update_indicator(l);
        jump_indicator(l);
      }
    }
    resize_copy_kernels();
    draw_atoms();
  }

  double loglik(int k, std::size_t i, int label) {
    UaLayer& K = layer(k);
    const auto& kernels = K.active ? K.own_kernels : K.copy_kernels;
    return kernels[static_cast<std::size_t>(label)](data_.layer(k).row(i));
  }

  void update_allocations(int l, long it) {
    UaLayer& L = layer(l);
    if (!L.active) {
      // Latent labels of a copying layer follow their prior.
      for (std::size_t i = 0; i < n_; ++i) L.own[i] = static_cast<int>(categorical_from_log(L.log_w, rng_));
      return;
    }
    std::vector<int> members;
    for (int k : closure(l)) {
      if (layer(k).has_data) members.push_back(k);
    }
    std::vector<double> lp(static_cast<std::size_t>(L.comps));
    for (std::size_t i = 0; i < n_; ++i) {
      for (int e = 0; e < L.comps; ++e) {
        double v = L.log_w[static_cast<std::size_t>(e)];
        for (int k : members) v += loglik(k, i, e);
        lp[static_cast<std::size_t>(e)] = v;
      }
      for (double v : lp) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
          throw NumericalError("unique-atom sampler: non-finite allocation weight at iteration " + std::to_string(it) +
                               ", layer " + std::to_string(l) + ", subject " + std::to_string(i));
        }
      }
      L.own[i] = static_cast<int>(categorical_from_log(lp, rng_));
    }
  }

  // Relabels own labels by first appearance, moves the matching atoms, then
  // updates the component count and the weights.
  void update_count_and_weights(int l) {
    UaLayer& L = layer(l);
    std::vector<int> perm(static_cast<std::size_t>(L.comps), -1);  // old -> new
    int next = 0;
    for (int& c : L.own) {
      int& target = perm[static_cast<std::size_t>(c)];
      if (target < 0) target = next++;
      c = target;
    }
    const int k_occupied = next;
    for (int& p : perm) {
      if (p < 0) p = next++;
    }
    auto permute = [&](std::vector<detail::KernelCache>& v) {
      if (v.size() != perm.size()) return;
      std::vector<detail::KernelCache> out(v.size());
      for (std::size_t old = 0; old < v.size(); ++old) out[static_cast<std::size_t>(perm[old])] = std::move(v[old]);
      v = std::move(out);
    };
    permute(L.own_kernels);
    if (L.active) {
      for (int k : closure(l)) {
        for (int c : tree_.children(k)) permute(layer(c).copy_kernels);
      }
    }

    // Component count: +-1 random walk targeting p(M) M_(K) / (c M)^(n).
    auto target = [&](long m) {
      const double lp = L.count_prior.log_pmf(m);
      if (lp == kNegInf) return kNegInf;
      return lp + std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(m - k_occupied) + 1.0) -
             log_rising_factorial(L.conc * static_cast<double>(m), static_cast<long>(n_));
    };
    long m = L.comps;
    double current = target(m);
    for (int step = 0; step < 3; ++step) {
      const long proposal = m + (uniform01(rng_) < 0.5 ? -1 : 1);
      if (proposal < k_occupied || proposal < 1 || proposal > spec_.max_components) continue;
      const double next_lp = target(proposal);
      if (std::log(uniform01(rng_)) < next_lp - current) {
        m = proposal;
        current = next_lp;
      }
    }
    L.comps = static_cast<int>(m);
    if (L.own_kernels.size() > static_cast<std::size_t>(L.comps)) L.own_kernels.resize(static_cast<std::size_t>(L.comps));
    draw_weights(L);
    if (L.active) {
      for (int k : closure(l)) {
        for (int c : tree_.children(k)) {
          auto& v = layer(c).copy_kernels;
          if (v.size() > static_cast<std::size_t>(L.comps)) v.resize(static_cast<std::size_t>(L.comps));
        }
      }
    }
  }

  void draw_weights(UaLayer& L, bool with_counts = true) {
    std::vector<double> counts(static_cast<std::size_t>(L.comps), 0.0);
    if (with_counts) {
      for (int c : L.own) counts[static_cast<std::size_t>(c)] += 1.0;
    }
    std::vector<double> params(counts.size());
    for (std::size_t e = 0; e < counts.size(); ++e) params[e] = std::log(L.conc + counts[e]);
    L.log_w = log_dirichlet(params, rng_);
  }

  // Log marginal likelihood of the data of `members`, grouped by `labels`.
  double grouped_marginal(const std::vector<int>& members, const std::vector<int>& labels, int num_labels) {
    double out = 0.0;
    for (int k : members) {
      const Layer& obs = data_.layer(k);
      std::vector<ClusterStats> stats(static_cast<std::size_t>(num_labels), ClusterStats(obs.dim));
      for (std::size_t i = 0; i < n_; ++i) stats[static_cast<std::size_t>(labels[i])].add(obs.row(i));
      for (const auto& s : stats) out += log_marginal(s, layer(k).prior);
    }
    return out;
  }

  // Z with every atom integrated out: copying groups the subtree's data by
  // the parent's effective partition, a fresh draw groups it by own labels.
  void update_indicator(int j) {
    UaLayer& J = layer(j);
    if (J.omega == 0.0) {
      J.active = false;
      return;
    }
    if (J.omega == 1.0) {
      J.active = true;
      return;
    }
    J.active = true;
    std::vector<int> members;
    for (int k : closure(j)) {
      if (layer(k).has_data) members.push_back(k);
    }
    double log_odds = std::log(J.omega) - std::log1p(-J.omega);
    if (!members.empty()) {
      const double fresh = grouped_marginal(members, J.own, J.comps);
      J.active = false;
      const double copied = grouped_marginal(members, effective(J.parent), effective_count(J.parent));
      log_odds += fresh - copied;
    }
    const double u = uniform01(rng_);
    J.active = std::log(u) - std::log1p(-u) < log_odds;
  }

  // Joint move on (Z, own labels). Switching on proposes own labels by
  // sequential allocation with collapsed predictives; switching off returns
  // the own labels to their prior. Without this, a copying layer's own labels
  // follow the prior and almost never explain the data well enough to switch.
  void jump_indicator(int j) {
    UaLayer& J = layer(j);
    if (J.omega == 0.0 || J.omega == 1.0) return;
    std::vector<int> members;
    for (int k : closure(j)) {
      if (layer(k).has_data) members.push_back(k);
    }
    if (members.empty()) return;
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n_; i > 1; --i) {
      const auto r = static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(r, i - 1)]);
    }
    const bool was_active = J.active;
    J.active = false;
    const double copied = grouped_marginal(members, effective(J.parent), effective_count(J.parent));
    J.active = was_active;
    const double prior_odds = std::log(J.omega) - std::log1p(-J.omega);

    if (!was_active) {
      std::vector<int> proposal(n_, 0);
      const double log_evidence = sequential_allocation(members, J, order, &proposal, nullptr);
      // The proposal density, the label prior and the marginal likelihood
      // telescope into the sequential evidence estimate.
      if (std::log(uniform01(rng_)) < prior_odds + log_evidence - copied) {
        J.own = std::move(proposal);
        J.active = true;
      }
    } else {
      const double log_evidence = sequential_allocation(members, J, order, nullptr, &J.own);
      if (std::log(uniform01(rng_)) < -(prior_odds + log_evidence - copied)) {
        J.active = false;
        for (std::size_t i = 0; i < n_; ++i) J.own[i] = static_cast<int>(categorical_from_log(J.log_w, rng_));
      }
    }
  }

  // Allocates subjects in `order` to components with probability
  // proportional to w_h times the collapsed predictive of their data over
  // `members`. Draws labels into `out`, or scores the fixed `given` labels.
  // Returns the sum of log normalizers, log of p(labels-marginalized data)
  // estimated along the sequence.
  double sequential_allocation(const std::vector<int>& members, const UaLayer& J, const std::vector<std::size_t>& order,
                               std::vector<int>* out, const std::vector<int>* given) {
    const auto comps = static_cast<std::size_t>(J.comps);
    std::vector<std::vector<ClusterStats>> stats;
    for (int k : members) stats.emplace_back(comps, ClusterStats(data_.layer(k).dim));
    std::vector<double> lp(comps);
    double total = 0.0;
    for (std::size_t i : order) {
      for (std::size_t h = 0; h < comps; ++h) {
        double v = J.log_w[h];
        for (std::size_t m = 0; m < members.size(); ++m) {
          const int k = members[m];
          const auto x = data_.layer(k).row(i);
          const LayerPrior& prior = layer(k).prior;
          const ClusterStats& st = stats[m][h];
          for (int d = 0; d < st.dim(); ++d) {
            v += log_predictive(x[static_cast<std::size_t>(d)],
                                st.count() ? posterior_params(prior[static_cast<std::size_t>(d)], st, d)
                                           : prior[static_cast<std::size_t>(d)]);
          }
        }
        lp[h] = v;
      }
      total += log_sum_exp(lp);
      const std::size_t h = out ? categorical_from_log(lp, rng_) : static_cast<std::size_t>((*given)[i]);
      if (out) (*out)[i] = static_cast<int>(h);
      for (std::size_t m = 0; m < members.size(); ++m) stats[m][h].add(data_.layer(members[m]).row(i));
    }
    if (!std::isfinite(total)) throw NumericalError("unique-atom sampler: non-finite sequential evidence");
    return total;
  }

  void resize_copy_kernels() {
    for (int l : tree_.topological_order()) {
      if (l == tree_.root()) continue;
      UaLayer& L = layer(l);
      L.copy_kernels.resize(static_cast<std::size_t>(effective_count(L.parent)));
    }
  }

  void draw_atoms() {
    for (int l = 0; l < tree_.num_layers(); ++l) {
      UaLayer& L = layer(l);
      if (!L.has_data) continue;
      const Layer& obs = data_.layer(l);
      auto refresh = [&](std::vector<detail::KernelCache>& kernels, const std::vector<int>* labels) {
        std::vector<ClusterStats> stats(kernels.size(), ClusterStats(obs.dim));
        if (labels) {
          for (std::size_t i = 0; i < n_; ++i) stats[static_cast<std::size_t>((*labels)[i])].add(obs.row(i));
        }
        for (std::size_t e = 0; e < kernels.size(); ++e) {
          const auto& s = stats[e];
          kernels[e].set(sample_atom(s.count() ? posterior_params(L.prior, s) : L.prior, rng_));
        }
      };
      L.own_kernels.resize(static_cast<std::size_t>(L.comps));
      refresh(L.own_kernels, L.active ? &L.own : nullptr);
      if (l != tree_.root()) refresh(L.copy_kernels, L.active ? nullptr : &effective(L.parent));
    }
  }

  void check_invariants(long it) {
    auto fail = [&](const std::string& what) {
      throw NumericalError("unique-atom sampler invariant violated at iteration " + std::to_string(it) + ": " + what);
    };
    for (int l = 0; l < tree_.num_layers(); ++l) {
      UaLayer& L = layer(l);
      if (static_cast<int>(L.log_w.size()) != L.comps || std::abs(log_sum_exp(L.log_w)) > 1e-9) {
        fail("weights off the simplex at layer " + std::to_string(l));
      }
      for (int c : L.own) {
        if (c < 0 || c >= L.comps) fail("allocation out of range at layer " + std::to_string(l));
      }
      if (l != tree_.root() && !L.active && effective(l) != effective(L.parent)) {
        fail("copying layer " + std::to_string(l) + " differs from its parent");
      }
    }
  }

  Draw snapshot(long it) {
    Draw d;
    d.iteration = it;
    for (int l = 0; l < tree_.num_layers(); ++l) {
      d.layers.push_back(canonicalize(effective(l)));
      const UaLayer& L = layer(l);
      d.hyper.push_back(L.comps);
      if (l != tree_.root()) d.hyper.push_back(L.active ? 1.0 : 0.0);
    }
    for (const Partition& p : d.layers) d.hyper.push_back(p.num_clusters());
    return d;
  }

  const LayerStack& data_;
  const Polytree& tree_;
  const ModelSpec& spec_;
  Rng& rng_;
  std::size_t n_;
  std::vector<UaLayer> layers_;
};

}  // namespace

Trace fit_ua(const LayerStack& data, const Polytree& tree, const ModelSpec& spec, Rng& rng, int chain,
             const SweepCallback& on_sweep) {
  if (data.num_layers() != tree.num_layers()) {
    throw ValidationError("fit: data has " + std::to_string(data.num_layers()) + " layers but the tree has " +
                          std::to_string(tree.num_layers()));
  }
  if (data.num_subjects() == 0) throw ValidationError("fit: no subjects");
  spec.validate_for(data.num_layers());
  UaSampler sampler(data, tree, spec, rng);
  return sampler.run(chain, on_sweep);
}

}  // namespace teleclust
