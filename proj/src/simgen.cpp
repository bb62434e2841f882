#include "teleclust/simgen.hpp"

#include "teleclust/error.hpp"
#include "teleclust/random.hpp"

namespace teleclust {

namespace {

// Balanced random split into two clusters labelled 0 and 1.
std::vector<int> balanced_split(std::size_t n, Rng& rng) {
  std::vector<int> labels(n, 0);
  for (std::size_t i : sample_without_replacement(n, n / 2, rng)) labels[i] = 1;
  return labels;
}

void flip(std::vector<int>& labels, int flips, Rng& rng) {
  const std::size_t n = labels.size();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> next = labels;
    for (std::size_t i : sample_without_replacement(n, static_cast<std::size_t>(flips), rng)) next[i] = 1 - next[i];
    std::size_t ones = 0;
    for (int v : next) ones += static_cast<std::size_t>(v);
    if (ones > 0 && ones < n) {
      labels = std::move(next);
      return;
    }
  }
  throw NumericalError("scenario: could not find a flip set that keeps both clusters");
}

}  // namespace

ScenarioOutput simulate_flip_scenario(const FlipScenario& config, std::uint64_t seed) {
  if (config.n < 2 || config.layers < 1 || config.flips < 0 || static_cast<std::size_t>(config.flips) > config.n) {
    throw ValidationError("scenario: invalid size parameters");
  }
  Rng rng = make_stream(seed, 0);
  std::vector<std::vector<int>> labels;
  labels.push_back(balanced_split(config.n, rng));
  for (int l = 1; l < config.layers; ++l) {
    labels.push_back(labels.back());
    flip(labels.back(), config.flips, rng);
  }
  ScenarioOutput out;
  out.data = LayerStack(config.n);
  out.scenario = config.name;
  out.seed = seed;
  out.parameters = {{"n", config.n},          {"layers", config.layers}, {"flips_per_transition", config.flips},
                    {"means", {config.mean0, config.mean1}}, {"variance", 1.0},
                    {"first_layer", "balanced random split"}, {"flip_rule", "without replacement; sets emptying a cluster are redrawn"}};
  for (int l = 0; l < config.layers; ++l) {
    Layer layer{"layer" + std::to_string(l + 1), 1, {}};
    layer.values.reserve(config.n);
    for (int c : labels[static_cast<std::size_t>(l)]) {
      layer.values.push_back((c == 0 ? config.mean0 : config.mean1) + standard_normal(rng));
    }
    out.data.add_layer(std::move(layer));
    out.truth.push_back(canonicalize(labels[static_cast<std::size_t>(l)]));
  }
  return out;
}

ScenarioOutput scenario1(std::uint64_t seed) {
  return simulate_flip_scenario({"s1", 200, 10, 10, 0.0, 4.0}, seed);
}

ScenarioOutput scenario2(std::uint64_t seed, int layers) {
  return simulate_flip_scenario({"s2", 200, layers, 4, 0.0, 3.0}, seed);
}

ScenarioOutput toy_example(std::uint64_t seed) {
  constexpr std::size_t n = 200;
  Rng rng = make_stream(seed, 0);
  const std::vector<int> labels = balanced_split(n, rng);
  ScenarioOutput out;
  out.data = LayerStack(n);
  out.scenario = "toy";
  out.seed = seed;
  out.parameters = {{"n", n}, {"dims", {1, 3}}, {"means", {1.0, -1.0}}, {"first_layer", "balanced random split"}};
  Layer first{"layer1", 1, {}};
  Layer second{"layer2", 3, {}};
  for (int c : labels) {
    const double mean = c == 0 ? 1.0 : -1.0;
    first.values.push_back(mean + standard_normal(rng));
    for (int d = 0; d < 3; ++d) second.values.push_back(mean + standard_normal(rng));
  }
  out.data.add_layer(std::move(first));
  out.data.add_layer(std::move(second));
  const Partition truth = canonicalize(labels);
  out.truth = {truth, truth};
  return out;
}

ScenarioOutput simulate_scenario(const std::string& name, std::uint64_t seed, int layers) {
  if (name == "s1" || name == "scenario1") {
    if (layers > 0 && layers != 10) {
      FlipScenario c{"s1", 200, layers, 10, 0.0, 4.0};
      return simulate_flip_scenario(c, seed);
    }
    return scenario1(seed);
  }
  if (name == "s2" || name == "scenario2") return scenario2(seed, layers > 0 ? layers : 100);
  if (name == "toy") return toy_example(seed);
  throw ValidationError("unknown scenario '" + name + "' (expected s1, s2 or toy)");
}

}  // namespace teleclust
