#include "teleclust/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "teleclust/error.hpp"

namespace teleclust {

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw ValidationError("split_rhat: no chains");
  std::size_t len = chains.front().size();
  for (const auto& c : chains) len = std::min(len, c.size());
  const std::size_t half = len / 2;
  if (half < 2) throw ValidationError("split_rhat: every chain needs at least four draws");

  std::vector<double> means, vars;
  for (const auto& c : chains) {
    for (int part = 0; part < 2; ++part) {
      // Second half starts after an odd middle draw, as in the usual recipe.
      const std::size_t begin = part == 0 ? 0 : len - half;
      double mean = 0.0;
      for (std::size_t i = 0; i < half; ++i) mean += c[begin + i];
      mean /= static_cast<double>(half);
      double ss = 0.0;
      for (std::size_t i = 0; i < half; ++i) ss += (c[begin + i] - mean) * (c[begin + i] - mean);
      means.push_back(mean);
      vars.push_back(ss / static_cast<double>(half - 1));
    }
  }
  const double m = static_cast<double>(means.size());
  const double nd = static_cast<double>(half);
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= m;
  double b = 0.0;
  for (double v : means) b += (v - grand) * (v - grand);
  b *= nd / (m - 1.0);
  double w = 0.0;
  for (double v : vars) w += v;
  w /= m;
  if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(var_plus / w);
}

}  // namespace teleclust
