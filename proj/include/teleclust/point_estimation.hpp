#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "teleclust/partition.hpp"
#include "teleclust/trace.hpp"

namespace teleclust {

/// Posterior co-clustering frequencies.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(const std::vector<Partition>& draws);

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::vector<std::vector<double>> rows() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

SimilarityMatrix similarity(const Trace& trace, int layer);

struct PointEstimate {
  Partition partition;
  /// Posterior expected loss of the estimate, exact over the draws.
  double expected_loss = 0.0;
  /// First draw equal to the estimate.
  std::size_t first_draw = 0;
  /// Distinct partitions scored.
  std::size_t candidates = 0;
};

/// Visited partition minimizing the average variation of information to all
/// draws. Ties go to fewer clusters, then earlier first occurrence.
/// max_candidates > 0 restricts scoring to the most frequent distinct draws.
PointEstimate min_vi(const std::vector<Partition>& draws, std::size_t max_candidates = 0);
/// Visited partition minimizing the expected Binder loss (pair count).
PointEstimate min_binder(const std::vector<Partition>& draws);

PointEstimate min_vi(const Trace& trace, int layer, std::size_t max_candidates = 0);
PointEstimate min_binder(const Trace& trace, int layer);

struct Interval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct DependenceSummary {
  std::vector<double> rand;
  std::vector<double> tari;
  Interval rand_summary;
  Interval tari_summary;
  double er_indep = 0.0;
};

/// Per-draw Rand index and adjusted index between two layers. Without an
/// analytic value, the independence baseline uses each layer's posterior
/// frequency of a tie between two subjects (averaged over all pairs).
DependenceSummary posterior_dependence(const Trace& trace, int layer_a, int layer_b,
                                       std::optional<double> er_indep = std::nullopt);

/// L x L matrix of posterior mean Rand indexes between layers.
std::vector<std::vector<double>> posterior_rand_matrix(const Trace& trace);
/// L x L matrix of Rand indexes between the given point estimates.
std::vector<std::vector<double>> point_rand_matrix(const std::vector<Partition>& estimates);

/// Central interval at the given coverage (linear interpolation of order
/// statistics).
Interval summarize_draws(std::vector<double> values, double coverage = 0.95);

}  // namespace teleclust
