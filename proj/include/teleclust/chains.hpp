#pragma once

#include <utility>
#include <vector>

#include "teleclust/eppf.hpp"
#include "teleclust/layers.hpp"
#include "teleclust/model_spec.hpp"
#include "teleclust/partition.hpp"
#include "teleclust/random.hpp"
#include "teleclust/samplers.hpp"
#include "teleclust/trace.hpp"

namespace teleclust {

/// Worker count from TELECLUST_THREADS, else the hardware concurrency.
int default_thread_count();

/// Independent chains; chain c uses the stream (spec.seed, c), so results do
/// not depend on scheduling. threads <= 0 selects default_thread_count().
std::vector<Trace> run_chains(const ModelSpec& spec, const LayerStack& data, int num_chains, int threads = 0);

using PartitionPair = std::pair<Partition, Partition>;

/// Two-layer prior draws by the layered construction: the first layer from
/// its own law, then the second given the first (Chinese restaurant
/// franchise seating for the hierarchical Dirichlet processes).
PartitionPair simulate_thdp_layered(int n, const HdpParams& params, Rng& rng);
/// Two-layer prior draws through the joint mixture: subjects draw a pair of
/// component labels from the truncated weights w_m q_ms.
PartitionPair simulate_thdp_joint(int n, const HdpParams& params, int truncation, Rng& rng);

PartitionPair simulate_ua_layered(int n, const MfmParams& params, Rng& rng);
PartitionPair simulate_ua_joint(int n, const MfmParams& params, Rng& rng);

}  // namespace teleclust
