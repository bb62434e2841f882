#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "teleclust/point_estimation.hpp"
#include "teleclust/trace.hpp"

namespace teleclust {

struct SummarizeOptions {
  /// Ground truth, one partition per layer; enables the truth table.
  std::vector<Partition> truth;
  /// Passed to min_vi; 0 scores every distinct visited partition.
  std::size_t max_candidates = 0;
  bool similarity_matrices = true;
};

struct EdgeDependence {
  int parent = 0;
  int child = 0;
  DependenceSummary summary;
};

struct Summary {
  std::size_t chains = 0;
  std::size_t draws = 0;
  std::vector<PointEstimate> min_vi;
  std::vector<PointEstimate> min_binder;
  std::vector<SimilarityMatrix> similarity;
  std::vector<std::vector<double>> rand_mean;
  std::vector<std::vector<double>> rand_point;
  std::vector<EdgeDependence> dependence;
  /// Per layer, against the truth when supplied.
  std::vector<double> truth_rand;
  std::vector<int> truth_misallocated;
  nlohmann::json rhat = nlohmann::json::object();
};

/// Trace files chain_<k>.csv / chain_<k>.json in a directory, by chain index.
std::vector<Trace> load_traces(const std::string& dir);

Summary summarize(const std::vector<Trace>& chains, const SummarizeOptions& options);

/// Writes min_vi.csv, min_binder.csv, similarity_layer<l>.csv,
/// rand_matrix_mean.csv, rand_matrix_point.csv, dependence.csv,
/// truth_rand.csv (with truth) and summary.json.
void write_summary(const Summary& summary, const std::vector<Trace>& chains, const std::string& out_dir);

}  // namespace teleclust
