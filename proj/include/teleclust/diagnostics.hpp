#pragma once

#include <vector>

namespace teleclust {

/// Split potential scale reduction factor of a scalar summary. Each chain is
/// halved, so every chain needs at least four draws.
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace teleclust
