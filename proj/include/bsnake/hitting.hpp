#pragma once

// Monte-Carlo hitting function u_{x,r}(y) = N_y(range meets the closed ball
// B(x, r)), restricted to excursions of duration at least s_min.

#include <cstddef>
#include <cstdint>
#include <span>

#include "bsnake/kernel.hpp"
#include "bsnake/rng.hpp"

namespace bsnake {

struct HittingOptions {
  double dt = 0.0;  // snake time step; 0 means s_min / 100
  std::size_t max_steps = std::size_t{1} << 14;
  std::uint64_t first_stream = 0;
};

struct HittingEstimate {
  double value = 0.0;  // mass * hits / n
  double se = 0.0;
  std::size_t hits = 0;
  std::size_t n = 0;
  double mass = 0.0;  // N(sigma >= s_min)
  double s_min = 0.0;
};

/// One truncated Ito snake rooted at y; true iff its head visits the closed ball.
bool truncated_snake_hits(std::span<const double> y, std::span<const double> x, double r, double s_min,
                          Rng& rng, const HittingOptions& options = {});

/// Replica i draws from stream first_stream + i of `seed`. No truncation
/// correction is applied; the estimate is biased low by N(hit, sigma < s_min).
HittingEstimate estimate_hitting(std::span<const double> y, std::span<const double> x, double r, double s_min,
                                 std::size_t n_replicas, std::uint64_t seed, const HittingOptions& options = {});

/// Combine per-replica hit flags into an estimate (mass * mean, binomial SE).
HittingEstimate hitting_from_counts(std::size_t hits, std::size_t n, double s_min);

}  // namespace bsnake
