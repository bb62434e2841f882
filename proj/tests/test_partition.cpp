#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "teleclust/partition.hpp"
#include "teleclust/random.hpp"

using namespace teleclust;

namespace {

Partition random_partition(int n, int k, Rng& rng) {
  std::vector<int> raw(static_cast<std::size_t>(n));
  for (int& v : raw) v = static_cast<int>(uniform01(rng) * k);
  return canonicalize(raw);
}

// Pair-by-pair oracles.
double rand_brute(const Partition& a, const Partition& b) {
  long agree = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      ++pairs;
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

double entropy(const std::vector<int>& sizes, double n) {
  double h = 0.0;
  for (int s : sizes) {
    if (s > 0) h -= s / n * std::log(s / n);
  }
  return h;
}

double vi_brute(const Partition& a, const Partition& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, int> joint;
  for (std::size_t i = 0; i < a.size(); ++i) ++joint[{a[i], b[i]}];
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pab = c / n;
    const double pa = a.sizes()[static_cast<std::size_t>(key.first)] / n;
    const double pb = b.sizes()[static_cast<std::size_t>(key.second)] / n;
    mi += pab * std::log(pab / (pa * pb));
  }
  return entropy(a.sizes(), n) + entropy(b.sizes(), n) - 2.0 * mi;
}

// Best one-to-one matching by trying every injection of estimate clusters.
int misallocation_brute(const Partition& est, const Partition& truth) {
  const int ke = est.num_clusters(), kt = truth.num_clusters();
  const int slots = std::max(ke, kt);
  std::vector<int> perm(static_cast<std::size_t>(slots));
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int matched = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (perm[static_cast<std::size_t>(est[i])] == truth[i]) ++matched;
    }
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<int>(est.size()) - best;
}

}  // namespace

TEST_SUITE("partition") {
  TEST_CASE("canonical form") {
    const Partition p = canonicalize(std::vector<int>{7, 7, 3, 9, 3});
    CHECK(p.labels() == std::vector<int>{0, 0, 1, 2, 1});
    CHECK(p.sizes() == std::vector<int>{2, 2, 1});
    CHECK(p.num_clusters() == 3);
    CHECK_THROWS_AS(Partition::from_canonical({1, 0}), ValidationError);
    CHECK_THROWS_AS(Partition::from_canonical({0, 2}), ValidationError);
    CHECK_THROWS_AS(canonicalize(std::vector<int>{}), ValidationError);
  }

  TEST_CASE("rand, binder and pair counts agree with pair enumeration") {
    Rng rng = make_stream(1, 0);
    for (int t = 0; t < 300; ++t) {
      const int n = 2 + static_cast<int>(uniform01(rng) * 20);
      const Partition a = random_partition(n, 4, rng), b = random_partition(n, 3, rng);
      CHECK(rand_index(a, b) == doctest::Approx(rand_brute(a, b)).epsilon(1e-14));
      const PairCounts pc = pair_counts(a, b);
      CHECK(pc.total() == static_cast<std::uint64_t>(n * (n - 1) / 2));
      CHECK(binder_count(a, b) == pc.c + pc.d);
    }
  }

  TEST_CASE("rand index of identical partitions is one and needs two subjects") {
    const Partition p = canonicalize(std::vector<int>{0, 1, 1, 2});
    CHECK(rand_index(p, p) == 1.0);
    CHECK_THROWS_AS(rand_index(canonicalize(std::vector<int>{0}), canonicalize(std::vector<int>{0})), ValidationError);
    CHECK_THROWS_AS(rand_index(p, canonicalize(std::vector<int>{0, 1})), ValidationError);
  }

  TEST_CASE("variation of information matches the entropy form") {
    Rng rng = make_stream(2, 0);
    for (int t = 0; t < 300; ++t) {
      const int n = 1 + static_cast<int>(uniform01(rng) * 25);
      const Partition a = random_partition(n, 5, rng), b = random_partition(n, 4, rng);
      CHECK(variation_of_information(a, b) == doctest::Approx(vi_brute(a, b)).epsilon(1e-12));
      CHECK(variation_of_information(a, b) == doctest::Approx(variation_of_information(b, a)).epsilon(1e-14));
      CHECK(variation_of_information(a, a) == 0.0);
    }
  }

  TEST_CASE("tari centers the rand index") {
    const Partition a = canonicalize(std::vector<int>{0, 0, 1, 1});
    const Partition b = canonicalize(std::vector<int>{0, 1, 1, 1});
    const double r = rand_index(a, b);
    CHECK(tari(a, b, 0.5) == doctest::Approx((r - 0.5) / 0.5));
    CHECK(tari(a, a, 0.25) == doctest::Approx(1.0));
    CHECK_THROWS_AS(tari(a, b, 1.0), ValidationError);
    CHECK_THROWS_AS(tari(a, b, -0.1), ValidationError);
  }

  TEST_CASE("misallocation matches exhaustive matching") {
    Rng rng = make_stream(3, 0);
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + static_cast<int>(uniform01(rng) * 15);
      const Partition a = random_partition(n, 4, rng), b = random_partition(n, 4, rng);
      CHECK(misallocation_count(a, b) == misallocation_brute(a, b));
    }
    const Partition truth = canonicalize(std::vector<int>{0, 0, 0, 1, 1, 1});
    CHECK(misallocation_count(canonicalize(std::vector<int>{1, 1, 0, 0, 0, 0}), truth) == 1);
    CHECK(misallocation_count(canonicalize(std::vector<int>{0, 0, 0, 0, 0, 0}), truth) == 3);
  }

  TEST_CASE("common refinement") {
    const std::vector<Partition> ps{canonicalize(std::vector<int>{0, 0, 1, 1}), canonicalize(std::vector<int>{0, 1, 1, 1})};
    CHECK(common_refinement(ps).labels() == std::vector<int>{0, 1, 2, 2});
  }

  TEST_CASE("enumeration yields distinct canonical partitions") {
    for (int n = 0; n <= 6; ++n) {
      auto parts = enumerate_partitions(n);
      const std::size_t count = parts.size();
      std::sort(parts.begin(), parts.end());
      CHECK(std::unique(parts.begin(), parts.end()) == parts.end());
      CHECK(count == parts.size());
    }
    CHECK(enumerate_partitions(0).size() == 1);
    CHECK_THROWS_AS(enumerate_partitions(11), ValidationError);
  }

  TEST_CASE("csv round trip") {
    const Partition p = canonicalize(std::vector<int>{4, 4, 2, 0});
    CHECK(to_csv_row(p) == "0,0,1,2");
    CHECK(partition_from_csv_row(" 5, 5,1 ,5\r") == canonicalize(std::vector<int>{0, 0, 1, 0}));
    CHECK_THROWS_AS(partition_from_csv_row("1,x"), IoError);
    CHECK_THROWS_AS(partition_from_csv_row("1,,2"), IoError);
  }
}
