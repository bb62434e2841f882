#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace teleclust {

// All variates are generated by the routines below rather than by the
// <random> distributions, whose algorithms are implementation-defined. This
// keeps seeded runs bit-identical across standard libraries.
using Rng = std::mt19937_64;

/// Deterministic, decorrelated stream for a (seed, stream) pair.
Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform on the open interval (0, 1).
double uniform01(Rng& rng);
double standard_normal(Rng& rng);

/// log of a Gamma(shape, 1) draw. Stays finite for shapes far below 1, where
/// the draw itself underflows.
double log_gamma_variate(double shape, Rng& rng);

/// Same as log_gamma_variate but takes log(shape); used when the shape is a
/// product of a concentration and a possibly tiny stick weight.
double log_gamma_variate_log_shape(double log_shape, Rng& rng);

double gamma_variate(double shape, Rng& rng);
bool bernoulli(double p, Rng& rng);
long poisson(double lambda, Rng& rng);

/// Dirichlet draw with parameters given on the log scale; returns log weights.
std::vector<double> log_dirichlet(std::span<const double> log_params, Rng& rng);

/// Index drawn proportionally to exp(log_weights).
std::size_t categorical_from_log(std::span<const double> log_weights, Rng& rng);

/// k distinct indices from {0, ..., n-1}, in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

/// log(exp(a) + exp(b)) without overflow; handles -inf operands.
double log_add_exp(double a, double b);
double log_sum_exp(std::span<const double> values);

}  // namespace teleclust
