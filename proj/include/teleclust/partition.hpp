#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "teleclust/error.hpp"

namespace teleclust {

/// A set partition of n subjects in canonical order-of-appearance form:
/// labels[0] == 0 and every new label is the smallest unused integer. Two
/// partitions are equal iff their label vectors are equal.
class Partition {
 public:
  Partition() = default;

  /// Wraps labels that are already canonical; throws ValidationError otherwise.
  static Partition from_canonical(std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  int num_clusters() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& sizes() const { return sizes_; }
  int operator[](std::size_t i) const { return labels_[i]; }

  bool operator==(const Partition& other) const { return labels_ == other.labels_; }
  bool operator<(const Partition& other) const { return labels_ < other.labels_; }

 private:
  std::vector<int> labels_;
  std::vector<int> sizes_;
};

/// Order-of-appearance relabeling of arbitrary hashable labels.
template <class T>
Partition canonicalize(std::span<const T> raw) {
  if (raw.empty()) throw ValidationError("canonicalize: empty label sequence");
  std::unordered_map<T, int> seen;
  std::vector<int> labels;
  labels.reserve(raw.size());
  for (const T& value : raw) {
    auto [it, inserted] = seen.try_emplace(value, static_cast<int>(seen.size()));
    labels.push_back(it->second);
  }
  return Partition::from_canonical(std::move(labels));
}

template <class T>
Partition canonicalize(const std::vector<T>& raw) {
  return canonicalize(std::span<const T>(raw));
}

/// Contingency table of two partitions of the same subjects.
class CrossTab {
 public:
  CrossTab(const Partition& first, const Partition& second);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int total() const { return total_; }
  int at(int m, int s) const { return counts_[static_cast<std::size_t>(m * cols_ + s)]; }
  const std::vector<int>& row_sums() const { return row_sums_; }
  const std::vector<int>& col_sums() const { return col_sums_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  int total_ = 0;
  std::vector<int> counts_;
  std::vector<int> row_sums_;
  std::vector<int> col_sums_;
};

/// Pair counts: a (together in both), b (apart in both), c (together only in
/// the first), d (together only in the second).
struct PairCounts {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;
  std::uint64_t total() const { return a + b + c + d; }
};

PairCounts pair_counts(const Partition& p1, const Partition& p2);
double rand_index(const Partition& p1, const Partition& p2);
std::uint64_t binder_count(const Partition& p1, const Partition& p2);
/// Variation of information, natural logarithms.
double variation_of_information(const Partition& p1, const Partition& p2);
/// Rand index centered by its expectation under independent partitions.
double tari(const Partition& p1, const Partition& p2, double er_indep);

/// Two subjects share a cluster iff they share one in every input.
Partition common_refinement(std::span<const Partition> partitions);

/// Subjects outside the best one-to-one matching between clusters of the
/// estimate and of the truth (extra clusters count entirely as errors).
int misallocation_count(const Partition& estimate, const Partition& truth);

/// Streams every set partition of {0..n-1} once, as restricted growth strings.
class PartitionEnumerator {
 public:
  explicit PartitionEnumerator(int n);
  /// Returns the next partition, or nullopt when exhausted.
  std::optional<Partition> next();

 private:
  int n_;
  bool started_ = false;
  bool done_ = false;
  std::vector<int> labels_;
  std::vector<int> prefix_max_;
};

inline constexpr int kDefaultEnumerationCap = 10;

/// All partitions of n subjects; n above the cap is refused.
std::vector<Partition> enumerate_partitions(int n, int cap = kDefaultEnumerationCap);

/// Comma-separated labels on one line, no trailing newline.
std::string to_csv_row(const Partition& p);
/// Parses one CSV row of integer labels and canonicalizes it.
Partition partition_from_csv_row(std::string_view row);

}  // namespace teleclust
