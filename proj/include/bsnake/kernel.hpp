#pragma once

// Samplers for the one- and d-dimensional source processes: Brownian paths,
// Ito excursions, normalized excursions, Bessel(3) via Pitman's transform,
// first exit times and positive stable laws.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bsnake/rng.hpp"

namespace bsnake {

/// A d-dimensional path sampled on a regular grid, stored row-major.
struct Path {
  int dim = 1;
  double dt = 1.0;
  double t0 = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
};

/// Nonnegative lifetime path H_0..H_n with H_0 = H_n = 0.
struct Excursion {
  double dt = 1.0;
  std::vector<double> heights;

  std::size_t steps() const { return heights.empty() ? 0 : heights.size() - 1; }
  double duration() const { return dt * static_cast<double>(steps()); }
};

/// Throws std::invalid_argument unless the excursion has at least two points,
/// dt > 0, zero endpoints and nonnegative heights.
void validate_excursion(const Excursion& e);

enum class ExcursionMethod {
  bessel_bridge,  // norm of a 3-d Brownian bridge; exact at grid times
  vervaat,        // discrete bridge re-rooted at its grid argmin
};

/// Restriction of the Ito measure N to {s_min <= sigma < s_max}.
struct ItoWindow {
  double s_min = 1.0;
  double s_max = std::numeric_limits<double>::infinity();
  /// Excursions longer than max_steps * dt are sampled on a coarser grid.
  std::size_t max_steps = std::size_t{1} << 16;
};

struct TruncatedItoSample {
  Excursion excursion;
  double s_min = 0.0;
  double s_max = std::numeric_limits<double>::infinity();
  double mass = 0.0;  // N(s_min <= sigma < s_max)
};

struct StableSample {
  double alpha = 0.5;
  double scale = 1.0;
  double value = 0.0;
};

// Ito measure under the normalization N(sup H > a) = 1/(2a).

/// N(sigma > t) = (2 pi t)^{-1/2}.
double ito_tail_mass(double t);
/// N(s_min <= sigma < s_max).
double ito_window_mass(double s_min, double s_max);
/// Density of sigma under N: t^{-3/2} / (2 sqrt(2 pi)).
double ito_duration_density(double t);
/// Draw sigma from N restricted to [s_min, s_max), normalized.
double sample_ito_duration(double s_min, double s_max, Rng& rng);

Path sample_brownian_path(int dim, double horizon, double dt, Rng& rng,
                          std::span<const double> start = {});

Excursion sample_normalized_excursion(std::size_t n_steps, Rng& rng,
                                      ExcursionMethod method = ExcursionMethod::bessel_bridge);

/// Excursion of duration sigma on n_steps grid steps (Brownian scaling of a
/// normalized excursion).
Excursion sample_excursion_of_duration(double sigma, std::size_t n_steps, Rng& rng,
                                       ExcursionMethod method = ExcursionMethod::bessel_bridge);

TruncatedItoSample sample_ito_excursion(double s_min, double dt, Rng& rng, const ItoWindow& window);
TruncatedItoSample sample_ito_excursion(double s_min, double dt, Rng& rng);

/// Exit time of linear BM from [-r, r], with a Brownian-bridge crossing
/// correction on every step.
double first_exit_time(double r, double dt, Rng& rng);

/// Minimum of a Brownian bridge from a to b over a step of length dt.
double sample_bridge_minimum(double a, double b, double dt, Rng& rng);

/// t -> B_t - 2 inf_{s<=t} B_s on [0, horizon]; the running infimum includes
/// the exact bridge minimum of every step.
Path sample_bessel3(double horizon, double dt, Rng& rng);

/// Total time B - 2I spends in [0, r] for every r in r_grid (infinite horizon).
/// The occupation ends at the hitting time of -r_max by B; excursions above
/// r_max are excised by reflection, so the cost is O(r_max^2 / dt).
std::vector<double> bessel3_occupations(std::span<const double> r_grid, double dt, Rng& rng);
double bessel3_occupation(double r, double dt, Rng& rng);

/// Exact draw with Laplace transform exp(-scale * lambda^alpha), alpha in (0,1).
StableSample sample_stable(double alpha, double scale, Rng& rng);

/// Small-ball asymptotic of P(S_1 <= x) for the stable(1/4) subordinator with
/// Laplace transform exp(-(128 lambda)^{1/4}).
double shorokhod_tail(double x);

inline constexpr double kShorokhodC12 = 27.0 / 2.0;
double shorokhod_c11();

}  // namespace bsnake
