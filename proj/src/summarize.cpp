#include "teleclust/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <regex>

#include "teleclust/diagnostics.hpp"
#include "teleclust/error.hpp"
#include "teleclust/io.hpp"

namespace teleclust {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Trace> load_traces(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("trace directory '" + dir + "' does not exist");
  const std::regex pattern(R"(chain_(\d+)\.csv)");
  std::vector<std::pair<int, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) found.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  if (found.empty()) throw IoError("no chain_<k>.csv trace files in '" + dir + "'");
  std::sort(found.begin(), found.end());
  std::vector<Trace> out;
  for (const auto& [k, path] : found) {
    fs::path side = path;
    side.replace_extension(".json");
    out.push_back(Trace::read(path.string(), side.string()));
  }
  return out;
}

Summary summarize(const std::vector<Trace>& chains, const SummarizeOptions& options) {
  if (chains.empty()) throw ValidationError("summarize: no traces");
  const Trace merged = Trace::merge(chains);
  if (merged.empty()) throw ValidationError("summarize: traces hold no retained draws");
  const int num_layers = merged.num_layers();
  Summary s;
  s.chains = chains.size();
  s.draws = merged.size();
  std::vector<Partition> estimates;
  for (int l = 0; l < num_layers; ++l) {
    const auto draws = merged.layer(l);
    s.min_vi.push_back(min_vi(draws, options.max_candidates));
    s.min_binder.push_back(min_binder(draws));
    if (options.similarity_matrices) s.similarity.emplace_back(draws);
    estimates.push_back(s.min_vi.back().partition);
  }
  if (merged.meta().num_subjects >= 2) {
    s.rand_mean = posterior_rand_matrix(merged);
    s.rand_point = point_rand_matrix(estimates);
    const auto& parents = merged.meta().parents;
    for (int l = 0; l < num_layers; ++l) {
      const int p = parents[static_cast<std::size_t>(l)];
      if (p >= 0) s.dependence.push_back({p, l, posterior_dependence(merged, p, l)});
    }
  }
  if (!options.truth.empty()) {
    if (static_cast<int>(options.truth.size()) != num_layers) {
      throw ValidationError("summarize: truth has " + std::to_string(options.truth.size()) + " layers, traces have " +
                            std::to_string(num_layers));
    }
    for (int l = 0; l < num_layers; ++l) {
      const Partition& truth = options.truth[static_cast<std::size_t>(l)];
      s.truth_rand.push_back(rand_index(estimates[static_cast<std::size_t>(l)], truth));
      s.truth_misallocated.push_back(misallocation_count(estimates[static_cast<std::size_t>(l)], truth));
    }
  }
  if (chains.size() >= 2) {
    for (const std::string& name : merged.meta().hyper_names) {
      std::vector<std::vector<double>> columns;
      for (const Trace& t : chains) columns.push_back(t.hyper(name));
      try {
        const double r = split_rhat(columns);
        s.rhat[name] = std::isfinite(r) ? json(r) : json(nullptr);
      } catch (const ValidationError&) {
        s.rhat[name] = nullptr;
      }
    }
  }
  return s;
}

namespace {

std::string partitions_csv(const std::vector<PointEstimate>& estimates, std::size_t n) {
  std::string out = "layer";
  for (std::size_t i = 0; i < n; ++i) out += ",s" + std::to_string(i);
  out += '\n';
  for (std::size_t l = 0; l < estimates.size(); ++l) out += std::to_string(l) + "," + to_csv_row(estimates[l].partition) + "\n";
  return out;
}

std::vector<std::string> indexed(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_summary(const Summary& s, const std::vector<Trace>& chains, const std::string& out_dir) {
  const fs::path dir(out_dir);
  const std::size_t n = chains.front().meta().num_subjects;
  const std::size_t num_layers = s.min_vi.size();
  write_file_atomic((dir / "min_vi.csv").string(), partitions_csv(s.min_vi, n));
  write_file_atomic((dir / "min_binder.csv").string(), partitions_csv(s.min_binder, n));
  for (std::size_t l = 0; l < s.similarity.size(); ++l) {
    write_file_atomic((dir / ("similarity_layer" + std::to_string(l) + ".csv")).string(),
                      matrix_to_csv(s.similarity[l].rows(), indexed("s", n)));
  }
  if (!s.rand_mean.empty()) {
    write_file_atomic((dir / "rand_matrix_mean.csv").string(), matrix_to_csv(s.rand_mean, indexed("layer", num_layers)));
    write_file_atomic((dir / "rand_matrix_point.csv").string(), matrix_to_csv(s.rand_point, indexed("layer", num_layers)));
  }
  std::string dep = "parent,child,rand_mean,rand_lower,rand_upper,tari_mean,tari_lower,tari_upper,er_indep\n";
  for (const EdgeDependence& e : s.dependence) {
    const auto& d = e.summary;
    dep += std::to_string(e.parent) + "," + std::to_string(e.child);
    for (double v : {d.rand_summary.mean, d.rand_summary.lower, d.rand_summary.upper, d.tari_summary.mean,
                     d.tari_summary.lower, d.tari_summary.upper, d.er_indep}) {
      dep += "," + (std::isfinite(v) ? format_double(v) : std::string("nan"));
    }
    dep += '\n';
  }
  write_file_atomic((dir / "dependence.csv").string(), dep);

  json layers = json::array();
  for (std::size_t l = 0; l < num_layers; ++l) {
    json entry{{"layer", l},
               {"min_vi_clusters", s.min_vi[l].partition.num_clusters()},
               {"min_vi_expected_loss", s.min_vi[l].expected_loss},
               {"min_vi_candidates", s.min_vi[l].candidates},
               {"min_binder_clusters", s.min_binder[l].partition.num_clusters()},
               {"min_binder_expected_loss", s.min_binder[l].expected_loss}};
    if (!s.truth_rand.empty()) {
      entry["truth_rand"] = s.truth_rand[l];
      entry["truth_misallocated"] = s.truth_misallocated[l];
    }
    layers.push_back(entry);
  }
  json edges = json::array();
  for (const EdgeDependence& e : s.dependence) {
    edges.push_back({{"parent", e.parent},
                     {"child", e.child},
                     {"rand", {{"mean", e.summary.rand_summary.mean}, {"lower", e.summary.rand_summary.lower}, {"upper", e.summary.rand_summary.upper}}},
                     {"tari",
                      {{"mean", finite_or_null(e.summary.tari_summary.mean)},
                       {"lower", finite_or_null(e.summary.tari_summary.lower)},
                       {"upper", finite_or_null(e.summary.tari_summary.upper)}}},
                     {"er_indep", e.summary.er_indep}});
  }
  json doc{{"format", "teleclust-summary"},
           {"format_version", 1},
           {"generator", std::string("teleclust ") + TELECLUST_VERSION},
           {"model", chains.front().meta().model},
           {"chains", s.chains},
           {"draws", s.draws},
           {"n", n},
           {"layers", layers},
           {"dependence", edges},
           {"rhat", s.rhat}};
  if (!s.truth_rand.empty()) {
    std::string truth = "layer,rand,misallocated\n";
    double mean_rand = 0.0, mean_mis = 0.0;
    for (std::size_t l = 0; l < num_layers; ++l) {
      truth += std::to_string(l) + "," + format_double(s.truth_rand[l]) + "," + std::to_string(s.truth_misallocated[l]) + "\n";
      mean_rand += s.truth_rand[l];
      mean_mis += s.truth_misallocated[l];
    }
    write_file_atomic((dir / "truth_rand.csv").string(), truth);
    doc["truth"] = {{"mean_rand", mean_rand / static_cast<double>(num_layers)},
                    {"mean_misallocated", mean_mis / static_cast<double>(num_layers)}};
  }
  write_file_atomic((dir / "summary.json").string(), doc.dump(2) + "\n");
}

}  // namespace teleclust
