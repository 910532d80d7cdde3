#include "bsnake/hitting.hpp"

#include <cmath>
#include <stdexcept>

#include "bsnake/snake.hpp"

namespace bsnake {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void check_config(std::span<const double> y, std::span<const double> x, double r, double s_min) {
  if (y.empty() || y.size() != x.size()) throw std::invalid_argument("hitting: points must share a dimension >= 1");
  if (!(r >= 0.0)) throw std::invalid_argument("hitting: radius must be nonnegative");
  if (!(s_min > 0.0)) throw std::invalid_argument("hitting: s_min must be positive");
  if (squared_distance(y, x) <= r * r) throw std::invalid_argument("hitting: root lies inside the closed ball");
}

}  // namespace

bool truncated_snake_hits(std::span<const double> y, std::span<const double> x, double r, double s_min, Rng& rng,
                          const HittingOptions& options) {
  check_config(y, x, r, s_min);
  const double dt = options.dt > 0.0 ? options.dt : s_min / 100.0;
  ItoWindow window;
  window.s_min = s_min;
  window.max_steps = options.max_steps;
  const TruncatedItoSample sample = sample_ito_excursion(s_min, dt, rng, window);
  HeadWalker walker(y);
  const double r2 = r * r;
  for (double h : sample.excursion.heights) {
    walker.move_to(h, rng);
    if (squared_distance(walker.head(), x) <= r2) return true;
  }
  return false;
}

HittingEstimate hitting_from_counts(std::size_t hits, std::size_t n, double s_min) {
  if (n == 0) throw std::invalid_argument("hitting: no replicas");
  HittingEstimate est;
  est.hits = hits;
  est.n = n;
  est.s_min = s_min;
  est.mass = ito_tail_mass(s_min);
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  est.value = est.mass * p;
  est.se = est.mass * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return est;
}

HittingEstimate estimate_hitting(std::span<const double> y, std::span<const double> x, double r, double s_min,
                                 std::size_t n_replicas, std::uint64_t seed, const HittingOptions& options) {
  check_config(y, x, r, s_min);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_replicas; ++i) {
    Rng rng(seed, options.first_stream + i);
    if (truncated_snake_hits(y, x, r, s_min, rng, options)) ++hits;
  }
  return hitting_from_counts(hits, n_replicas, s_min);
}

}  // namespace bsnake
