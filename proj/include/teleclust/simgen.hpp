#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teleclust/io.hpp"

namespace teleclust {

using ScenarioOutput = Dataset;

/// Two Gaussian clusters tracked over layers; between consecutive layers
/// `flips` subjects, drawn without replacement, switch cluster. Flip sets
/// that would empty a cluster are redrawn.
struct FlipScenario {
  std::string name;
  std::size_t n = 200;
  int layers = 10;
  int flips = 10;
  double mean0 = 0.0;
  double mean1 = 4.0;
};

ScenarioOutput simulate_flip_scenario(const FlipScenario& config, std::uint64_t seed);

/// n = 200, 10 layers, means 0 and 4, 10 flips per transition, balanced
/// random first layer.
ScenarioOutput scenario1(std::uint64_t seed);
/// n = 200, two clusters of 100 at the first layer, means 0 and 3, 4 flips
/// per transition.
ScenarioOutput scenario2(std::uint64_t seed, int layers = 100);
/// Two layers sharing one partition: univariate N(+-1, 1) and trivariate
/// N(+-(1,1,1), I).
ScenarioOutput toy_example(std::uint64_t seed);

/// Dispatch by name: "s1", "s2", "toy" (also "scenario1", "scenario2").
ScenarioOutput simulate_scenario(const std::string& name, std::uint64_t seed, int layers = 0);

}  // namespace teleclust
