#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "teleclust/diagnostics.hpp"
#include "teleclust/point_estimation.hpp"
#include "teleclust/summarize.hpp"

using namespace teleclust;
namespace fs = std::filesystem;

namespace {

Partition P(std::vector<int> raw) { return canonicalize(raw); }

// Draws concentrated on a few partitions so the candidate set is small.
std::vector<Partition> random_draws(std::mt19937& gen, std::size_t n, std::size_t count, int max_k) {
  std::vector<Partition> pool;
  for (int i = 0; i < 6; ++i) {
    std::vector<int> raw(n);
    for (auto& v : raw) v = static_cast<int>(gen() % static_cast<unsigned>(max_k));
    pool.push_back(canonicalize(raw));
  }
  std::vector<Partition> out;
  for (std::size_t d = 0; d < count; ++d) out.push_back(pool[gen() % pool.size()]);
  return out;
}

Trace make_trace(int layers, std::size_t n, std::size_t draws, unsigned seed, int chain = 0) {
  TraceMeta meta;
  meta.model = "thdp";
  meta.chain = chain;
  meta.num_subjects = n;
  meta.parents.push_back(-1);
  for (int l = 1; l < layers; ++l) meta.parents.push_back(l - 1);
  meta.hyper_names = {"K[0]"};
  Trace t(meta);
  std::mt19937 gen(seed);
  std::vector<std::vector<Partition>> per_layer;
  for (int l = 0; l < layers; ++l) per_layer.push_back(random_draws(gen, n, draws, 3));
  for (std::size_t d = 0; d < draws; ++d) {
    Draw draw;
    draw.iteration = static_cast<long>(d + 1);
    for (int l = 0; l < layers; ++l) draw.layers.push_back(per_layer[static_cast<std::size_t>(l)][d]);
    draw.hyper = {static_cast<double>(draw.layers[0].num_clusters())};
    t.append(std::move(draw));
  }
  return t;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_SUITE("point_estimation") {
  TEST_CASE("min_vi matches a brute-force search over visited partitions") {
    std::mt19937 gen(5);
    for (int rep = 0; rep < 20; ++rep) {
      const auto draws = random_draws(gen, 7, 60, 4);
      double best = 1e300;
      for (const auto& c : draws) {
        double loss = 0.0;
        for (const auto& d : draws) loss += variation_of_information(c, d);
        best = std::min(best, loss / static_cast<double>(draws.size()));
      }
      const PointEstimate est = min_vi(draws);
      CHECK(est.expected_loss == doctest::Approx(best).epsilon(1e-12));
      double own = 0.0;
      for (const auto& d : draws) own += variation_of_information(est.partition, d);
      CHECK(own / static_cast<double>(draws.size()) == doctest::Approx(best).epsilon(1e-12));
      CHECK(draws[est.first_draw] == est.partition);
    }
  }

  TEST_CASE("min_binder matches the mean Binder pair count") {
    std::mt19937 gen(9);
    for (int rep = 0; rep < 20; ++rep) {
      const auto draws = random_draws(gen, 8, 50, 3);
      double best = 1e300;
      for (const auto& c : draws) {
        double loss = 0.0;
        for (const auto& d : draws) loss += static_cast<double>(binder_count(c, d));
        best = std::min(best, loss / static_cast<double>(draws.size()));
      }
      const PointEstimate est = min_binder(draws);
      CHECK(est.expected_loss == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("ties prefer fewer clusters, then earlier draws") {
    const auto split = P({0, 0, 1, 1});
    const auto one = P({0, 0, 0, 0});
    CHECK(min_vi(std::vector<Partition>{split, one}).partition == one);
    CHECK(min_binder(std::vector<Partition>{split, one}).partition == one);
    const auto a = P({0, 0, 1}), b = P({0, 1, 1});
    CHECK(min_vi(std::vector<Partition>{b, a}).partition == b);
    CHECK(min_vi(std::vector<Partition>{a, b}).partition == a);
  }

  TEST_CASE("candidate cap keeps the most frequent draws") {
    const auto a = P({0, 0, 1, 1}), b = P({0, 1, 0, 1}), c = P({0, 0, 0, 1});
    const std::vector<Partition> draws{b, a, a, a, c, c};
    const PointEstimate capped = min_vi(draws, 1);
    CHECK(capped.candidates == 1);
    CHECK(capped.partition == a);
    CHECK(min_vi(draws).candidates == 3);
    CHECK_THROWS_AS(min_vi(std::vector<Partition>{}), ValidationError);
  }

  TEST_CASE("similarity is the co-clustering frequency") {
    std::mt19937 gen(2);
    const auto draws = random_draws(gen, 6, 40, 3);
    const SimilarityMatrix sim(draws);
    REQUIRE(sim.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        double f = 0.0;
        for (const auto& d : draws) f += d[i] == d[j] ? 1.0 : 0.0;
        CHECK(sim.at(i, j) == doctest::Approx(f / 40.0));
      }
    }
  }

  TEST_CASE("posterior Rand matrix and dependence summaries") {
    const Trace t = make_trace(3, 6, 30, 4);
    const auto m = posterior_rand_matrix(t);
    REQUIRE(m.size() == 3);
    for (int a = 0; a < 3; ++a) {
      CHECK(m[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] == doctest::Approx(1.0));
      for (int b = 0; b < 3; ++b) {
        double r = 0.0;
        for (const Draw& d : t.draws()) r += rand_index(d.layers[static_cast<std::size_t>(a)], d.layers[static_cast<std::size_t>(b)]);
        CHECK(m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] == doctest::Approx(r / 30.0));
      }
    }
    const DependenceSummary fixed = posterior_dependence(t, 0, 1, 0.4);
    REQUIRE(fixed.rand.size() == 30);
    for (std::size_t k = 0; k < 30; ++k) CHECK(fixed.tari[k] == doctest::Approx((fixed.rand[k] - 0.4) / 0.6));
    CHECK(fixed.rand_summary.mean == doctest::Approx(m[0][1]));

    // Baseline from tie frequencies averaged over pairs.
    auto tie = [&](int l) {
      double f = 0.0;
      for (const Draw& d : t.draws()) {
        const Partition& p = d.layers[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < 6; ++i)
          for (std::size_t j = i + 1; j < 6; ++j) f += p[i] == p[j] ? 1.0 : 0.0;
      }
      return f / (30.0 * 15.0);
    };
    const double p1 = tie(0), p2 = tie(1);
    CHECK(posterior_dependence(t, 0, 1).er_indep == doctest::Approx(p1 * p2 + (1 - p1) * (1 - p2)));
  }

  TEST_CASE("point Rand matrix") {
    const auto m = point_rand_matrix({P({0, 0, 1}), P({0, 1, 1}), P({0, 0, 0})});
    CHECK(m[0][1] == doctest::Approx(1.0 / 3.0));
    CHECK(m[0][2] == doctest::Approx(1.0 / 3.0));
    CHECK(m[2][2] == 1.0);
  }

  TEST_CASE("central intervals interpolate order statistics") {
    const Interval a = summarize_draws({5, 1, 4, 2, 3}, 0.5);
    CHECK(a.mean == doctest::Approx(3.0));
    CHECK(a.lower == doctest::Approx(2.0));
    CHECK(a.upper == doctest::Approx(4.0));
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) v.push_back(i);
    const Interval b = summarize_draws(v);
    CHECK(b.lower == doctest::Approx(2.5));
    CHECK(b.upper == doctest::Approx(97.5));
    CHECK_THROWS_AS(summarize_draws({}), ValidationError);
  }

  TEST_CASE("split R-hat") {
    // Halves {0,1},{2,3} in both chains: W = 1/2, B = 8/3, n = 2.
    const double expected = std::sqrt((0.5 * 0.5 + (8.0 / 3.0) / 2.0) / 0.5);
    CHECK(split_rhat({{0, 1, 2, 3}, {0, 1, 2, 3}}) == doctest::Approx(expected));
    std::mt19937 gen(1);
    std::normal_distribution<double> z;
    std::vector<std::vector<double>> mixed(4), shifted(4);
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < 2000; ++i) {
        mixed[static_cast<std::size_t>(c)].push_back(z(gen));
        shifted[static_cast<std::size_t>(c)].push_back(z(gen) + 3.0 * c);
      }
    }
    CHECK(split_rhat(mixed) < 1.01);
    CHECK(split_rhat(shifted) > 1.5);
    CHECK(split_rhat({{1, 1, 1, 1}, {1, 1, 1, 1}}) == 1.0);
    CHECK_THROWS_AS(split_rhat({{1, 2, 3}}), ValidationError);
  }

  TEST_CASE("summaries are written with the documented layout") {
    const fs::path dir = fs::temp_directory_path() / "teleclust_summary_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "traces");
    const Trace c0 = make_trace(2, 5, 20, 1, 0), c1 = make_trace(2, 5, 20, 2, 1);
    c1.write((dir / "traces").string(), "chain_1");
    c0.write((dir / "traces").string(), "chain_0");
    std::ofstream(dir / "traces" / "notes.txt") << "ignored\n";

    const auto chains = load_traces((dir / "traces").string());
    REQUIRE(chains.size() == 2);
    CHECK(chains[0].labels_csv() == c0.labels_csv());
    CHECK(chains[1].labels_csv() == c1.labels_csv());

    SummarizeOptions opts;
    opts.truth = {P({0, 0, 1, 1, 2}), P({0, 0, 0, 1, 1})};
    const Summary s = summarize(chains, opts);
    CHECK(s.chains == 2);
    CHECK(s.draws == 40);
    REQUIRE(s.dependence.size() == 1);
    CHECK(s.dependence[0].parent == 0);
    CHECK(s.dependence[0].child == 1);
    CHECK(s.truth_rand.size() == 2);
    CHECK(s.rhat.contains("K[0]"));

    write_summary(s, chains, (dir / "out").string());
    const fs::path out = dir / "out";
    CHECK(first_line(out / "min_vi.csv") == "layer,s0,s1,s2,s3,s4");
    CHECK(line_count(out / "min_vi.csv") == 3);
    CHECK(first_line(out / "min_binder.csv") == "layer,s0,s1,s2,s3,s4");
    CHECK(first_line(out / "similarity_layer0.csv") == "s0,s1,s2,s3,s4");
    CHECK(line_count(out / "similarity_layer0.csv") == 6);
    CHECK(line_count(out / "similarity_layer1.csv") == 6);
    CHECK(first_line(out / "rand_matrix_mean.csv") == "layer0,layer1");
    CHECK(first_line(out / "rand_matrix_point.csv") == "layer0,layer1");
    CHECK(first_line(out / "dependence.csv") == "parent,child,rand_mean,rand_lower,rand_upper,tari_mean,tari_lower,tari_upper,er_indep");
    CHECK(first_line(out / "truth_rand.csv") == "layer,rand,misallocated");
    CHECK(line_count(out / "truth_rand.csv") == 3);
    std::ifstream js(out / "summary.json");
    const auto doc = nlohmann::json::parse(js);
    CHECK(doc["format"] == "teleclust-summary");

    opts.truth.pop_back();
    CHECK_THROWS_AS(summarize(chains, opts), ValidationError);
    CHECK_THROWS_AS(load_traces((dir / "missing").string()), IoError);
    fs::remove_all(dir);
  }
}
