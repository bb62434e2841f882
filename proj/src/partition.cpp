#include "teleclust/partition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

namespace teleclust {

namespace {

void require_same_size(const Partition& p1, const Partition& p2, const char* what) {
  if (p1.size() != p2.size()) {
    throw ValidationError(std::string(what) + ": partitions have different numbers of subjects (" +
                          std::to_string(p1.size()) + " vs " + std::to_string(p2.size()) + ")");
  }
}

std::uint64_t choose2(std::uint64_t x) { return x < 2 ? 0 : x * (x - 1) / 2; }

// Minimum-cost perfect assignment on a square matrix (Hungarian method,
// potentials formulation). Returns the assigned column of every row.
std::vector<int> hungarian(const std::vector<std::vector<long>>& cost) {
  const int n = static_cast<int>(cost.size());
  const long inf = std::numeric_limits<long>::max() / 4;
  std::vector<long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

}  // namespace

Partition Partition::from_canonical(std::vector<int> labels) {
  Partition p;
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label > next) {
      throw ValidationError("partition labels are not in canonical order-of-appearance form at position " +
                            std::to_string(i));
    }
    if (label == next) {
      ++next;
      p.sizes_.push_back(0);
    }
    ++p.sizes_[static_cast<std::size_t>(label)];
  }
  p.labels_ = std::move(labels);
  return p;
}

CrossTab::CrossTab(const Partition& first, const Partition& second) {
  require_same_size(first, second, "crosstab");
  rows_ = first.num_clusters();
  cols_ = second.num_clusters();
  total_ = static_cast<int>(first.size());
  counts_.assign(static_cast<std::size_t>(rows_ * cols_), 0);
  for (std::size_t i = 0; i < first.size(); ++i) {
    ++counts_[static_cast<std::size_t>(first[i] * cols_ + second[i])];
  }
  row_sums_ = first.sizes();
  col_sums_ = second.sizes();
}

PairCounts pair_counts(const Partition& p1, const Partition& p2) {
  const CrossTab tab(p1, p2);
  std::uint64_t together_both = 0;
  for (int m = 0; m < tab.rows(); ++m) {
    for (int s = 0; s < tab.cols(); ++s) together_both += choose2(static_cast<std::uint64_t>(tab.at(m, s)));
  }
  std::uint64_t together_first = 0;
  for (int r : tab.row_sums()) together_first += choose2(static_cast<std::uint64_t>(r));
  std::uint64_t together_second = 0;
  for (int c : tab.col_sums()) together_second += choose2(static_cast<std::uint64_t>(c));

  PairCounts out;
  out.a = together_both;
  out.c = together_first - together_both;
  out.d = together_second - together_both;
  out.b = choose2(p1.size()) - out.a - out.c - out.d;
  return out;
}

double rand_index(const Partition& p1, const Partition& p2) {
  require_same_size(p1, p2, "rand_index");
  if (p1.size() < 2) throw ValidationError("rand_index: needs at least two subjects");
  const PairCounts pc = pair_counts(p1, p2);
  return static_cast<double>(pc.a + pc.b) / static_cast<double>(pc.total());
}

std::uint64_t binder_count(const Partition& p1, const Partition& p2) {
  require_same_size(p1, p2, "binder_count");
  const PairCounts pc = pair_counts(p1, p2);
  return pc.c + pc.d;
}

double variation_of_information(const Partition& p1, const Partition& p2) {
  require_same_size(p1, p2, "variation_of_information");
  if (p1.size() == 0) return 0.0;
  const CrossTab tab(p1, p2);
  // VI = (1/n) sum_ms n_ms [log(r_m / n_ms) + log(c_s / n_ms)]; every term is
  // nonnegative and vanishes exactly for identical partitions.
  double acc = 0.0;
  for (int m = 0; m < tab.rows(); ++m) {
    const double r = tab.row_sums()[static_cast<std::size_t>(m)];
    for (int s = 0; s < tab.cols(); ++s) {
      const int nms = tab.at(m, s);
      if (nms == 0) continue;
      const double c = tab.col_sums()[static_cast<std::size_t>(s)];
      acc += nms * (std::log(r / nms) + std::log(c / nms));
    }
  }
  return acc / static_cast<double>(tab.total());
}

double tari(const Partition& p1, const Partition& p2, double er_indep) {
  if (!(er_indep >= 0.0 && er_indep < 1.0)) {
    throw ValidationError("tari: expected Rand index under independence must lie in [0, 1)");
  }
  return (rand_index(p1, p2) - er_indep) / (1.0 - er_indep);
}

Partition common_refinement(std::span<const Partition> partitions) {
  if (partitions.empty()) throw ValidationError("common_refinement: no partitions given");
  const std::size_t n = partitions.front().size();
  for (const Partition& p : partitions) require_same_size(partitions.front(), p, "common_refinement");
  std::map<std::vector<int>, int> ids;
  std::vector<int> labels(n);
  std::vector<int> key(partitions.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < partitions.size(); ++l) key[l] = partitions[l][i];
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(ids.size()));
    labels[i] = it->second;
  }
  return Partition::from_canonical(std::move(labels));
}

int misallocation_count(const Partition& estimate, const Partition& truth) {
  require_same_size(estimate, truth, "misallocation_count");
  const CrossTab tab(estimate, truth);
  const int dim = std::max(tab.rows(), tab.cols());
  long max_count = 0;
  for (int m = 0; m < tab.rows(); ++m) {
    for (int s = 0; s < tab.cols(); ++s) max_count = std::max<long>(max_count, tab.at(m, s));
  }
  std::vector<std::vector<long>> cost(static_cast<std::size_t>(dim), std::vector<long>(static_cast<std::size_t>(dim), max_count));
  for (int m = 0; m < tab.rows(); ++m) {
    for (int s = 0; s < tab.cols(); ++s) cost[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)] = max_count - tab.at(m, s);
  }
  const auto assignment = hungarian(cost);
  int matched = 0;
  for (int m = 0; m < tab.rows(); ++m) {
    const int s = assignment[static_cast<std::size_t>(m)];
    if (s >= 0 && s < tab.cols()) matched += tab.at(m, s);
  }
  return tab.total() - matched;
}

PartitionEnumerator::PartitionEnumerator(int n) : n_(n) {
  if (n < 0) throw ValidationError("enumerate_partitions: negative size");
  labels_.assign(static_cast<std::size_t>(n), 0);
  prefix_max_.assign(static_cast<std::size_t>(n), 0);
}

std::optional<Partition> PartitionEnumerator::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    if (n_ <= 1) done_ = true;
    return Partition::from_canonical(labels_);
  }
  // prefix_max_[i] = max(labels_[0..i-1]); position i may take values up to
  // prefix_max_[i] + 1.
  for (int i = n_ - 1; i >= 1; --i) {
    const auto ui = static_cast<std::size_t>(i);
    if (labels_[ui] <= prefix_max_[ui]) {
      ++labels_[ui];
      for (int j = i + 1; j < n_; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        labels_[uj] = 0;
        prefix_max_[uj] = std::max(prefix_max_[uj - 1], labels_[uj - 1]);
      }
      return Partition::from_canonical(labels_);
    }
  }
  done_ = true;
  return std::nullopt;
}

std::vector<Partition> enumerate_partitions(int n, int cap) {
  if (n > cap) {
    throw ValidationError("enumerate_partitions: n = " + std::to_string(n) + " exceeds the cap of " +
                          std::to_string(cap));
  }
  PartitionEnumerator it(n);
  std::vector<Partition> out;
  while (auto p = it.next()) out.push_back(std::move(*p));
  return out;
}

std::string to_csv_row(const Partition& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(p[i]);
  }
  return out;
}

Partition partition_from_csv_row(std::string_view row) {
  std::vector<int> raw;
  std::size_t pos = 0;
  while (pos <= row.size()) {
    std::size_t end = row.find(',', pos);
    if (end == std::string_view::npos) end = row.size();
    std::string_view cell = row.substr(pos, end - pos);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t')) cell.remove_suffix(1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
      throw IoError("partition row: invalid integer label '" + std::string(cell) + "'");
    }
    raw.push_back(value);
    pos = end + 1;
  }
  return canonicalize(raw);
}

}  // namespace teleclust
