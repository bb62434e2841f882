#include "teleclust/teleclust.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "teleclust/chains.hpp"
#include "teleclust/eppf.hpp"
#include "teleclust/error.hpp"
#include "teleclust/io.hpp"
#include "teleclust/model_spec.hpp"
#include "teleclust/partition.hpp"
#include "teleclust/point_estimation.hpp"
#include "teleclust/simgen.hpp"
#include "teleclust/summarize.hpp"

namespace tc = teleclust;

struct tc_engine {
  tc::EppfEngine engine;
};

struct tc_dataset {
  tc::Dataset ds;
};

struct tc_model {
  tc::ModelSpec spec;
};

struct tc_traces {
  std::vector<tc::Trace> chains;
};

namespace {

thread_local std::string last_error;

tc_status fail(tc_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
tc_status guarded(F&& body) {
  try {
    body();
    return TC_OK;
  } catch (const tc::ValidationError& e) {
    return fail(TC_ERR_INVALID, e.what());
  } catch (const tc::NumericalError& e) {
    return fail(TC_ERR_NUMERICAL, e.what());
  } catch (const tc::IoError& e) {
    return fail(TC_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TC_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw tc::ValidationError(std::string(what) + " must not be NULL");
}

tc::Partition to_partition(const int* labels, std::size_t n) {
  require(labels, "labels");
  if (n == 0) throw tc::ValidationError("partition of zero subjects");
  return tc::canonicalize(std::span<const int>(labels, n));
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tc::CountPrior to_prior(const tc_count_prior& p) {
  switch (p.kind) {
    case TC_PRIOR_POINT_MASS: {
      const int v = static_cast<int>(p.value);
      if (static_cast<double>(v) != p.value) throw tc::ValidationError("point mass prior needs an integer value");
      return tc::CountPrior::point_mass(v);
    }
    case TC_PRIOR_SHIFTED_POISSON:
      return tc::CountPrior::shifted_poisson(p.value);
    case TC_PRIOR_GEOMETRIC:
      return tc::CountPrior::geometric(p.value);
    case TC_PRIOR_TABLE:
      require(p.weights, "table prior weights");
      return tc::CountPrior::table(std::vector<double>(p.weights, p.weights + p.num_weights));
  }
  throw tc::ValidationError("unknown count prior kind");
}

tc::HdpParams to_hdp(const tc_hdp_params* p) {
  require(p, "params");
  tc::HdpParams out{p->gamma0, p->gamma, p->alpha0, p->alpha};
  out.validate();
  return out;
}

tc::MfmParams to_mfm(const tc_mfm_params* p) {
  require(p, "params");
  tc::MfmParams out;
  out.gamma = p->gamma;
  out.alpha = p->alpha;
  out.omega = p->omega;
  out.m_prior = to_prior(p->m_prior);
  out.s_prior = to_prior(p->s_prior);
  out.validate();
  return out;
}

void copy_report(const tc::DependenceReport& r, tc_dependence* out) {
  require(out, "out");
  *out = tc_dependence{r.tau, r.er, r.eb, r.er_indep};
}

void copy_labels(const tc::Partition& p, int* out) {
  require(out, "out");
  std::copy(p.labels().begin(), p.labels().end(), out);
}

const tc::Trace& chain_at(const tc_traces* t, int chain) {
  require(t, "traces");
  if (chain < 0 || chain >= static_cast<int>(t->chains.size())) throw tc::ValidationError("chain index out of range");
  return t->chains[static_cast<std::size_t>(chain)];
}

}  // namespace

extern "C" {

const char* tc_version(void) { return TELECLUST_VERSION; }
const char* tc_last_error(void) { return last_error.c_str(); }
void tc_string_free(char* s) { std::free(s); }

tc_status tc_file_digest(const char* path, char** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = dup_string(tc::digest_hex(tc::read_file(path)));
  });
}

tc_status tc_canonicalize(const int* labels, size_t n, int* out, int* num_clusters) {
  return guarded([&] {
    const tc::Partition p = to_partition(labels, n);
    copy_labels(p, out);
    if (num_clusters) *num_clusters = p.num_clusters();
  });
}

tc_status tc_rand_index(const int* a, const int* b, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tc::rand_index(to_partition(a, n), to_partition(b, n));
  });
}

tc_status tc_binder_count(const int* a, const int* b, size_t n, uint64_t* out) {
  return guarded([&] {
    require(out, "out");
    *out = tc::binder_count(to_partition(a, n), to_partition(b, n));
  });
}

tc_status tc_variation_of_information(const int* a, const int* b, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tc::variation_of_information(to_partition(a, n), to_partition(b, n));
  });
}

tc_status tc_tari(const int* a, const int* b, size_t n, double er_indep, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = tc::tari(to_partition(a, n), to_partition(b, n), er_indep);
  });
}

tc_status tc_misallocation(const int* estimate, const int* truth, size_t n, int* out) {
  return guarded([&] {
    require(out, "out");
    *out = tc::misallocation_count(to_partition(estimate, n), to_partition(truth, n));
  });
}

tc_status tc_count_partitions(int n, uint64_t* out) {
  return guarded([&] {
    require(out, "out");
    if (n > tc::kDefaultEnumerationCap) throw tc::ValidationError("tc_count_partitions: n exceeds 10");
    tc::PartitionEnumerator it(n);
    std::uint64_t count = 0;
    while (it.next()) ++count;
    *out = count;
  });
}

tc_status tc_engine_create(int cap, tc_engine** out) {
  return guarded([&] {
    require(out, "out");
    if (cap < 1) throw tc::ValidationError("engine cap must be positive");
    *out = new tc_engine{tc::EppfEngine(cap)};
  });
}

void tc_engine_destroy(tc_engine* engine) { delete engine; }

tc_status tc_hdp_log_eppf(const tc_engine* e, const int* p, size_t n, const tc_hdp_params* params, double* out) {
  return guarded([&] {
    require(e, "engine");
    require(out, "out");
    *out = e->engine.hdp_log_eppf(to_partition(p, n), to_hdp(params));
  });
}

tc_status tc_hdp_log_cond_eppf(const tc_engine* e, const int* p2, const int* p1, size_t n, const tc_hdp_params* params,
                               double* out) {
  return guarded([&] {
    require(e, "engine");
    require(out, "out");
    *out = e->engine.hdp_log_cond_eppf(to_partition(p2, n), to_partition(p1, n), to_hdp(params));
  });
}

tc_status tc_thdp_log_teppf(const tc_engine* e, const int* p1, const int* p2, size_t n, const tc_hdp_params* params,
                            double* out) {
  return guarded([&] {
    require(e, "engine");
    require(out, "out");
    *out = e->engine.thdp_log_teppf(to_partition(p1, n), to_partition(p2, n), to_hdp(params));
  });
}

tc_status tc_mfm_log_v(const tc_engine* e, int n, int k, double gamma, const tc_count_prior* prior, double* out) {
  return guarded([&] {
    require(e, "engine");
    require(prior, "prior");
    require(out, "out");
    *out = e->engine.mfm_log_V(n, k, gamma, to_prior(*prior));
  });
}

tc_status tc_mfm_log_eppf(const tc_engine* e, const int* p, size_t n, double gamma, const tc_count_prior* prior,
                          double* out) {
  return guarded([&] {
    require(e, "engine");
    require(prior, "prior");
    require(out, "out");
    *out = e->engine.mfm_log_eppf(to_partition(p, n), gamma, to_prior(*prior));
  });
}

tc_status tc_ua_log_cond_eppf(const tc_engine* e, const int* p2, const int* p1, size_t n, const tc_mfm_params* params,
                              double* out) {
  return guarded([&] {
    require(e, "engine");
    require(out, "out");
    *out = e->engine.ua_log_cond_eppf(to_partition(p2, n), to_partition(p1, n), to_mfm(params));
  });
}

tc_status tc_ua_log_teppf(const tc_engine* e, const int* p1, const int* p2, size_t n, const tc_mfm_params* params,
                          double* out) {
  return guarded([&] {
    require(e, "engine");
    require(out, "out");
    *out = e->engine.ua_log_teppf(to_partition(p1, n), to_partition(p2, n), to_mfm(params));
  });
}

tc_status tc_mfm_dump_log_v(const tc_engine* e, int max_n, double gamma, const tc_count_prior* prior, const char* path) {
  return guarded([&] {
    require(e, "engine");
    require(prior, "prior");
    require(path, "path");
    std::ostringstream os;
    e->engine.dump_log_V(os, max_n, gamma, to_prior(*prior));
    tc::write_file_atomic(path, os.str());
  });
}

tc_status tc_thdp_dependence(const tc_hdp_params* params, tc_dependence* out) {
  return guarded([&] { copy_report(tc::thdp_dependence(to_hdp(params)), out); });
}

tc_status tc_ua_dependence(const tc_mfm_params* params, tc_dependence* out) {
  return guarded([&] { copy_report(tc::ua_dependence(to_mfm(params)), out); });
}

tc_status tc_thdp_dependence_enumerated(const tc_engine* e, const tc_hdp_params* params, int n, tc_dependence* out) {
  return guarded([&] {
    require(e, "engine");
    const tc::HdpParams p = to_hdp(params);
    const tc::JointLaw law = [&](const tc::Partition& a, const tc::Partition& b) {
      return e->engine.thdp_log_teppf(a, b, p);
    };
    copy_report(tc::dependence_from_teppf(law, n), out);
  });
}

tc_status tc_ua_dependence_enumerated(const tc_engine* e, const tc_mfm_params* params, int n, tc_dependence* out) {
  return guarded([&] {
    require(e, "engine");
    const tc::MfmParams p = to_mfm(params);
    const tc::JointLaw law = [&](const tc::Partition& a, const tc::Partition& b) {
      return e->engine.ua_log_teppf(a, b, p);
    };
    copy_report(tc::dependence_from_teppf(law, n), out);
  });
}

tc_status tc_dataset_simulate(const char* scenario, uint64_t seed, int layers, tc_dataset** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    *out = new tc_dataset{tc::simulate_scenario(scenario, seed, layers)};
  });
}

tc_status tc_dataset_read(const char* dir, tc_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new tc_dataset{tc::read_dataset(dir)};
  });
}

tc_status tc_dataset_write(const tc_dataset* ds, const char* dir) {
  return guarded([&] {
    require(ds, "dataset");
    require(dir, "dir");
    tc::write_dataset(ds->ds, dir);
  });
}

void tc_dataset_destroy(tc_dataset* ds) { delete ds; }
size_t tc_dataset_num_subjects(const tc_dataset* ds) { return ds ? ds->ds.data.num_subjects() : 0; }
int tc_dataset_num_layers(const tc_dataset* ds) { return ds ? ds->ds.data.num_layers() : 0; }
int tc_dataset_has_truth(const tc_dataset* ds) { return ds && !ds->ds.truth.empty() ? 1 : 0; }

tc_status tc_dataset_truth(const tc_dataset* ds, int layer, int* out) {
  return guarded([&] {
    require(ds, "dataset");
    if (ds->ds.truth.empty()) throw tc::ValidationError("dataset has no ground truth");
    if (layer < 0 || layer >= static_cast<int>(ds->ds.truth.size())) throw tc::ValidationError("layer out of range");
    copy_labels(ds->ds.truth[static_cast<std::size_t>(layer)], out);
  });
}

tc_status tc_model_parse(const char* json_text, tc_model** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new tc_model{tc::ModelSpec::from_json_text(json_text)};
  });
}

tc_status tc_model_load(const char* path, tc_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tc_model{tc::ModelSpec::load(path)};
  });
}

void tc_model_destroy(tc_model* model) { delete model; }

tc_status tc_model_to_json(const tc_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup_string(model->spec.to_json_text());
  });
}

tc_status tc_model_set_seed(tc_model* model, uint64_t seed) {
  return guarded([&] {
    require(model, "model");
    model->spec.seed = seed;
  });
}

tc_status tc_model_set_mcmc(tc_model* model, long iterations, long burn_in, long thin) {
  return guarded([&] {
    require(model, "model");
    tc::McmcSettings m = model->spec.mcmc;
    if (iterations >= 0) m.iterations = iterations;
    if (burn_in >= 0) m.burn_in = burn_in;
    if (thin >= 0) m.thin = thin;
    tc::ModelSpec next = model->spec;
    next.mcmc = m;
    next.validate();
    model->spec = std::move(next);
  });
}

tc_status tc_fit(const tc_model* model, const tc_dataset* ds, int num_chains, int threads, tc_traces** out) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    require(out, "out");
    if (num_chains < 1) throw tc::ValidationError("number of chains must be at least 1");
    model->spec.validate_for(ds->ds.data.num_layers());
    *out = new tc_traces{tc::run_chains(model->spec, ds->ds.data, num_chains, threads)};
  });
}

tc_status tc_traces_read(const char* dir, tc_traces** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new tc_traces{tc::load_traces(dir)};
  });
}

tc_status tc_traces_write(const tc_traces* traces, const char* dir) {
  return guarded([&] {
    require(traces, "traces");
    require(dir, "dir");
    for (std::size_t c = 0; c < traces->chains.size(); ++c) traces->chains[c].write(dir, "chain_" + std::to_string(c));
  });
}

void tc_traces_destroy(tc_traces* traces) { delete traces; }
int tc_traces_num_chains(const tc_traces* traces) { return traces ? static_cast<int>(traces->chains.size()) : 0; }

int tc_traces_num_layers(const tc_traces* traces) {
  return traces && !traces->chains.empty() ? traces->chains.front().num_layers() : 0;
}

size_t tc_traces_num_subjects(const tc_traces* traces) {
  return traces && !traces->chains.empty() ? traces->chains.front().meta().num_subjects : 0;
}

size_t tc_traces_num_draws(const tc_traces* traces, int chain) {
  if (!traces || chain < 0 || chain >= static_cast<int>(traces->chains.size())) return 0;
  return traces->chains[static_cast<std::size_t>(chain)].size();
}

tc_status tc_traces_draw(const tc_traces* traces, int chain, size_t draw, int layer, int* out) {
  return guarded([&] {
    const tc::Trace& t = chain_at(traces, chain);
    if (draw >= t.size()) throw tc::ValidationError("draw index out of range");
    if (layer < 0 || layer >= t.num_layers()) throw tc::ValidationError("layer out of range");
    copy_labels(t.draws()[draw].layers[static_cast<std::size_t>(layer)], out);
  });
}

tc_status tc_summarize(const tc_traces* traces, const tc_summary_options* options, const char* out_dir,
                       char** summary_json) {
  return guarded([&] {
    require(traces, "traces");
    require(out_dir, "out_dir");
    tc::SummarizeOptions opts;
    if (options) {
      opts.max_candidates = options->max_candidates;
      opts.similarity_matrices = options->write_similarity != 0;
      if (options->truth) {
        if (options->truth->ds.truth.empty()) throw tc::ValidationError("truth dataset has no ground truth");
        opts.truth = options->truth->ds.truth;
      }
    }
    const tc::Summary s = tc::summarize(traces->chains, opts);
    tc::write_summary(s, traces->chains, out_dir);
    if (summary_json) {
      *summary_json = dup_string(tc::read_file((std::filesystem::path(out_dir) / "summary.json").string()));
    }
  });
}

tc_status tc_min_vi(const tc_traces* traces, int layer, size_t max_candidates, int* out, double* expected_loss) {
  return guarded([&] {
    require(traces, "traces");
    const tc::Trace merged = tc::Trace::merge(traces->chains);
    if (layer < 0 || layer >= merged.num_layers()) throw tc::ValidationError("layer out of range");
    const tc::PointEstimate est = tc::min_vi(merged, layer, max_candidates);
    copy_labels(est.partition, out);
    if (expected_loss) *expected_loss = est.expected_loss;
  });
}

tc_status tc_posterior_rand_matrix(const tc_traces* traces, double* out) {
  return guarded([&] {
    require(traces, "traces");
    require(out, "out");
    const auto m = tc::posterior_rand_matrix(tc::Trace::merge(traces->chains));
    std::size_t k = 0;
    for (const auto& row : m) {
      for (double v : row) out[k++] = v;
    }
  });
}

}  // extern "C"
