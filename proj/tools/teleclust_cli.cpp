// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teleclust/teleclust.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliFailure {
  int code;
};

void check(tc_status s, const char* context) {
  if (s == TC_OK) return;
  std::fprintf(stderr, "teleclust %s: %s\n", context, tc_last_error());
  throw CliFailure{static_cast<int>(s)};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using DatasetPtr = std::unique_ptr<tc_dataset, Deleter<tc_dataset, tc_dataset_destroy>>;
using ModelPtr = std::unique_ptr<tc_model, Deleter<tc_model, tc_model_destroy>>;
using TracesPtr = std::unique_ptr<tc_traces, Deleter<tc_traces, tc_traces_destroy>>;
using EnginePtr = std::unique_ptr<tc_engine, Deleter<tc_engine, tc_engine_destroy>>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  tc_string_free(s);
  return out;
}

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const tc_dependence& d) {
  return {{"tau", finite(d.tau)}, {"er", finite(d.er)}, {"eb", finite(d.eb)}, {"er_indep", finite(d.er_indep)}};
}

double max_abs_diff(const tc_dependence& a, const tc_dependence& b) {
  double m = 0.0;
  for (auto [x, y] : {std::pair{a.tau, b.tau}, {a.er, b.er}, {a.eb, b.eb}, {a.er_indep, b.er_indep}}) {
    m = std::max(m, std::abs(x - y));
  }
  return m;
}

struct SimulateArgs {
  std::string scenario;
  std::uint64_t seed = 1;
  int layers = 0;
  std::string out;
};

void run_simulate(const SimulateArgs& a) {
  tc_dataset* raw = nullptr;
  check(tc_dataset_simulate(a.scenario.c_str(), a.seed, a.layers, &raw), "simulate");
  DatasetPtr ds(raw);
  check(tc_dataset_write(ds.get(), a.out.c_str()), "simulate");
  std::printf("wrote %zu subjects x %d layers to %s\n", tc_dataset_num_subjects(ds.get()), tc_dataset_num_layers(ds.get()),
              a.out.c_str());
}

struct FitArgs {
  std::string config;
  std::string data;
  std::string out;
  int chains = 1;
  int threads = 0;
  long iterations = -1, burn_in = -1, thin = -1;
  std::optional<std::uint64_t> seed;
};

void run_fit(const FitArgs& a) {
  tc_model* model_raw = nullptr;
  check(tc_model_load(a.config.c_str(), &model_raw), "fit");
  ModelPtr model(model_raw);
  if (a.seed) check(tc_model_set_seed(model.get(), *a.seed), "fit");
  check(tc_model_set_mcmc(model.get(), a.iterations, a.burn_in, a.thin), "fit");
  tc_dataset* ds_raw = nullptr;
  check(tc_dataset_read(a.data.c_str(), &ds_raw), "fit");
  DatasetPtr ds(ds_raw);
  tc_traces* tr_raw = nullptr;
  check(tc_fit(model.get(), ds.get(), a.chains, a.threads, &tr_raw), "fit");
  TracesPtr traces(tr_raw);
  check(tc_traces_write(traces.get(), a.out.c_str()), "fit");

  char* cfg = nullptr;
  check(tc_model_to_json(model.get(), &cfg), "fit");
  json inputs = json::object();
  for (const char* name : {"data.csv", "manifest.json", "truth.csv"}) {
    const fs::path p = fs::path(a.data) / name;
    if (!fs::exists(p)) continue;
    char* d = nullptr;
    check(tc_file_digest(p.string().c_str(), &d), "fit");
    inputs[name] = take_string(d);
  }
  json chains = json::array();
  for (int c = 0; c < tc_traces_num_chains(traces.get()); ++c) {
    chains.push_back({{"chain", c},
                      {"labels", "chain_" + std::to_string(c) + ".csv"},
                      {"sidecar", "chain_" + std::to_string(c) + ".json"},
                      {"retained", tc_traces_num_draws(traces.get(), c)}});
  }
  const json manifest{{"format", "teleclust-run"},
                      {"format_version", 1},
                      {"generator", std::string("teleclust ") + tc_version()},
                      {"config", json::parse(take_string(cfg))},
                      {"data_dir", a.data},
                      {"input_digests", inputs},
                      {"chains", chains}};
  const fs::path tmp = fs::path(a.out) / "run.json.tmp";
  {
    std::FILE* f = std::fopen(tmp.string().c_str(), "wb");
    if (!f) {
      std::fprintf(stderr, "teleclust fit: cannot write %s\n", tmp.string().c_str());
      throw CliFailure{TC_ERR_IO};
    }
    const std::string text = manifest.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  fs::rename(tmp, fs::path(a.out) / "run.json");
  std::printf("wrote %d chain(s) to %s\n", tc_traces_num_chains(traces.get()), a.out.c_str());
}

struct SummarizeArgs {
  std::string traces;
  std::string out;
  std::string truth;
  std::size_t max_candidates = 0;
  bool no_similarity = false;
};

void run_summarize(const SummarizeArgs& a) {
  tc_traces* tr_raw = nullptr;
  check(tc_traces_read(a.traces.c_str(), &tr_raw), "summarize");
  TracesPtr traces(tr_raw);
  DatasetPtr truth;
  if (!a.truth.empty()) {
    tc_dataset* raw = nullptr;
    check(tc_dataset_read(a.truth.c_str(), &raw), "summarize");
    truth.reset(raw);
  }
  tc_summary_options opts{truth.get(), a.max_candidates, a.no_similarity ? 0 : 1};
  check(tc_summarize(traces.get(), &opts, a.out.c_str(), nullptr), "summarize");
  std::printf("wrote summary of %d chain(s) to %s\n", tc_traces_num_chains(traces.get()), a.out.c_str());
}

struct MeasuresArgs {
  std::string model = "thdp";
  double gamma0 = 1.0, gamma = 1.0, alpha0 = 1.0, alpha = 1.0;
  double omega = 0.5, m_lambda = 1.0, s_lambda = 1.0;
  bool enumerate = false;
  int n = 2;
  std::string traces;
};

void run_measures(const MeasuresArgs& a) {
  json out;
  if (!a.traces.empty()) {
    tc_traces* raw = nullptr;
    check(tc_traces_read(a.traces.c_str(), &raw), "measures");
    TracesPtr traces(raw);
    const int L = tc_traces_num_layers(traces.get());
    std::vector<double> m(static_cast<std::size_t>(L) * static_cast<std::size_t>(L));
    check(tc_posterior_rand_matrix(traces.get(), m.data()), "measures");
    json rows = json::array();
    for (int i = 0; i < L; ++i) {
      rows.push_back(std::vector<double>(m.begin() + i * L, m.begin() + (i + 1) * L));
    }
    out = {{"source", a.traces}, {"posterior_rand_matrix", rows}};
    std::printf("%s\n", out.dump(2).c_str());
    return;
  }
  tc_dependence closed{};
  tc_dependence enumerated{};
  EnginePtr engine;
  if (a.enumerate) {
    tc_engine* raw = nullptr;
    check(tc_engine_create(25, &raw), "measures");
    engine.reset(raw);
  }
  if (a.model == "thdp") {
    const tc_hdp_params p{a.gamma0, a.gamma, a.alpha0, a.alpha};
    check(tc_thdp_dependence(&p, &closed), "measures");
    if (a.enumerate) check(tc_thdp_dependence_enumerated(engine.get(), &p, a.n, &enumerated), "measures");
    out = {{"model", "thdp"},
           {"parameters", {{"gamma0", a.gamma0}, {"gamma", a.gamma}, {"alpha0", a.alpha0}, {"alpha", a.alpha}}}};
  } else if (a.model == "ua" || a.model == "unique_atom") {
    const tc_mfm_params p{a.gamma, a.alpha, a.omega, {TC_PRIOR_SHIFTED_POISSON, a.m_lambda, nullptr, 0},
                          {TC_PRIOR_SHIFTED_POISSON, a.s_lambda, nullptr, 0}};
    check(tc_ua_dependence(&p, &closed), "measures");
    if (a.enumerate) check(tc_ua_dependence_enumerated(engine.get(), &p, a.n, &enumerated), "measures");
    out = {{"model", "unique_atom"},
           {"parameters",
            {{"gamma", a.gamma}, {"alpha", a.alpha}, {"omega", a.omega}, {"m_lambda", a.m_lambda}, {"s_lambda", a.s_lambda}}}};
  } else {
    std::fprintf(stderr, "teleclust measures: unknown model '%s' (expected thdp or ua)\n", a.model.c_str());
    throw CliFailure{TC_ERR_INVALID};
  }
  out["closed_form"] = report_json(closed);
  if (a.enumerate) {
    out["enumerated"] = report_json(enumerated);
    out["enumerated"]["n"] = a.n;
    out["max_abs_diff"] = max_abs_diff(closed, enumerated);
  }
  std::printf("%s\n", out.dump(2).c_str());
}

struct VTableArgs {
  double gamma = 1.0;
  double m_lambda = 1.0;
  int max_n = 20;
  std::string out;
};

void run_vtable(const VTableArgs& a) {
  tc_engine* raw = nullptr;
  check(tc_engine_create(std::max(a.max_n, 1), &raw), "vtable");
  EnginePtr engine(raw);
  const tc_count_prior prior{TC_PRIOR_SHIFTED_POISSON, a.m_lambda, nullptr, 0};
  check(tc_mfm_dump_log_v(engine.get(), a.max_n, a.gamma, &prior, a.out.c_str()), "vtable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Telescopic clustering: simulate, fit, summarize and measure"};
  app.set_version_flag("--version", std::string(tc_version()));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a simulated dataset (data.csv, truth.csv, manifest.json)");
  simulate->add_option("--scenario", sim.scenario, "s1, s2 or toy")->required();
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--layers", sim.layers, "Number of layers for s2 (default 100)");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Run MCMC chains and write traces");
  fitc->add_option("--config", fit.config, "Model configuration JSON")->required();
  fitc->add_option("--data", fit.data, "Dataset directory")->required();
  fitc->add_option("--out", fit.out, "Output directory")->required();
  fitc->add_option("--chains", fit.chains, "Independent chains")->check(CLI::PositiveNumber);
  fitc->add_option("--threads", fit.threads, "Worker threads (default TELECLUST_THREADS or all cores)");
  fitc->add_option("--iterations", fit.iterations, "Override mcmc.iterations");
  fitc->add_option("--burn-in", fit.burn_in, "Override mcmc.burn_in");
  fitc->add_option("--thin", fit.thin, "Override mcmc.thin");
  fitc->add_option("--seed", fit.seed, "Override the configured seed");

  SummarizeArgs sum;
  auto* summ = app.add_subcommand("summarize", "Point estimates, similarity and Rand matrices from traces");
  summ->add_option("--traces", sum.traces, "Directory written by fit")->required();
  summ->add_option("--out", sum.out, "Output directory")->required();
  summ->add_option("--truth", sum.truth, "Dataset directory with truth.csv");
  summ->add_option("--max-candidates", sum.max_candidates, "Score only the most frequent visited partitions");
  summ->add_flag("--no-similarity", sum.no_similarity, "Skip the per-layer similarity matrices");

  MeasuresArgs mea;
  auto* meas = app.add_subcommand("measures", "Prior dependence measures as JSON");
  meas->add_option("--model", mea.model, "thdp or ua");
  meas->add_option("--gamma0", mea.gamma0);
  meas->add_option("--gamma", mea.gamma);
  meas->add_option("--alpha0", mea.alpha0);
  meas->add_option("--alpha", mea.alpha);
  meas->add_option("--omega", mea.omega, "Unique-atom: probability of not copying the parent");
  meas->add_option("--m-lambda", mea.m_lambda, "Unique-atom: M = 1 + Poisson(m-lambda)");
  meas->add_option("--s-lambda", mea.s_lambda, "Unique-atom: S = 1 + Poisson(s-lambda)");
  meas->add_flag("--enumerate", mea.enumerate, "Also evaluate by enumerating the joint law");
  meas->add_option("--n", mea.n, "Sample size for --enumerate (2 to 6)");
  meas->add_option("--traces", mea.traces, "Report the posterior Rand matrix of a fit instead");

  VTableArgs vt;
  auto* vtab = app.add_subcommand("vtable", "Dump log V(n, K) of the mixture of finite mixtures as CSV");
  vtab->add_option("--gamma", vt.gamma);
  vtab->add_option("--m-lambda", vt.m_lambda);
  vtab->add_option("--max-n", vt.max_n);
  vtab->add_option("--out", vt.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : TC_ERR_INVALID;
  }

  try {
    if (*simulate) run_simulate(sim);
    if (*fitc) run_fit(fit);
    if (*summ) run_summarize(sum);
    if (*meas) run_measures(mea);
    if (*vtab) run_vtable(vt);
  } catch (const CliFailure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "teleclust: %s\n", e.what());
    return TC_ERR_IO;
  }
  return 0;
}
