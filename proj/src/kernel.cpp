#include "bsnake/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bsnake {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate_excursion(const Excursion& e) {
  require(e.heights.size() >= 2, "excursion needs at least two grid points");
  require(e.dt > 0.0, "excursion dt must be positive");
  require(e.heights.front() == 0.0 && e.heights.back() == 0.0, "excursion endpoints must be zero");
  for (double h : e.heights) require(h >= 0.0, "excursion heights must be nonnegative");
}

double ito_tail_mass(double t) {
  require(t > 0.0, "ito_tail_mass: t must be positive");
  if (std::isinf(t)) return 0.0;
  return 1.0 / std::sqrt(2.0 * kPi * t);
}

double ito_window_mass(double s_min, double s_max) {
  require(s_min > 0.0 && s_max > s_min, "ito_window_mass: need 0 < s_min < s_max");
  return ito_tail_mass(s_min) - ito_tail_mass(s_max);
}

double ito_duration_density(double t) {
  require(t > 0.0, "ito_duration_density: t must be positive");
  return std::pow(t, -1.5) / (2.0 * std::sqrt(2.0 * kPi));
}

double sample_ito_duration(double s_min, double s_max, Rng& rng) {
  require(s_min > 0.0, "s_min must be positive");
  require(s_max > s_min, "s_max must exceed s_min");
  // P(sigma > t | window) is affine in t^{-1/2}.
  const double lo = std::isinf(s_max) ? 0.0 : 1.0 / std::sqrt(s_max);
  const double hi = 1.0 / std::sqrt(s_min);
  const double v = lo + rng.uniform() * (hi - lo);
  return std::clamp(1.0 / (v * v), s_min, s_max);
}

Path sample_brownian_path(int dim, double horizon, double dt, Rng& rng, std::span<const double> start) {
  require(dim >= 1, "dim must be >= 1");
  require(horizon > 0.0 && dt > 0.0, "horizon and dt must be positive");
  require(dt <= horizon, "dt must not exceed horizon");
  require(start.empty() || start.size() == static_cast<std::size_t>(dim), "start point has wrong dimension");

  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
  const auto d = static_cast<std::size_t>(dim);
  Path path;
  path.dim = dim;
  path.dt = dt;
  path.values.assign((steps + 1) * d, 0.0);
  if (!start.empty()) std::copy(start.begin(), start.end(), path.values.begin());
  const double sd = std::sqrt(dt);
  for (std::size_t i = 1; i <= steps; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      path.values[i * d + k] = path.values[(i - 1) * d + k] + sd * rng.normal();
    }
  }
  return path;
}

Excursion sample_normalized_excursion(std::size_t n_steps, Rng& rng, ExcursionMethod method) {
  require(n_steps >= 2, "n_steps must be >= 2");
  const double dt = 1.0 / static_cast<double>(n_steps);
  const double sd = std::sqrt(dt);
  Excursion e;
  e.dt = dt;
  e.heights.assign(n_steps + 1, 0.0);

  if (method == ExcursionMethod::bessel_bridge) {
    // Three independent random walks turned into bridges; the norm of a 3-d
    // Brownian bridge is the Bessel(3) bridge, i.e. the normalized excursion.
    std::vector<double> w(3 * (n_steps + 1), 0.0);
    for (std::size_t i = 1; i <= n_steps; ++i) {
      for (std::size_t k = 0; k < 3; ++k) w[3 * i + k] = w[3 * (i - 1) + k] + sd * rng.normal();
    }
    const double* end = &w[3 * n_steps];
    for (std::size_t i = 1; i < n_steps; ++i) {
      const double frac = static_cast<double>(i) * dt;
      double sq = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double b = w[3 * i + k] - frac * end[k];
        sq += b * b;
      }
      e.heights[i] = std::sqrt(sq);
    }
    return e;
  }

  std::vector<double> b(n_steps + 1, 0.0);
  for (std::size_t i = 1; i <= n_steps; ++i) b[i] = b[i - 1] + sd * rng.normal();
  const double last = b[n_steps];
  for (std::size_t i = 0; i <= n_steps; ++i) b[i] -= static_cast<double>(i) * dt * last;
  const auto argmin = static_cast<std::size_t>(std::min_element(b.begin(), b.end() - 1) - b.begin());
  for (std::size_t i = 1; i < n_steps; ++i) {
    e.heights[i] = b[(argmin + i) % n_steps] - b[argmin];
  }
  return e;
}

Excursion sample_excursion_of_duration(double sigma, std::size_t n_steps, Rng& rng, ExcursionMethod method) {
  require(sigma > 0.0, "excursion duration must be positive");
  Excursion e = sample_normalized_excursion(n_steps, rng, method);
  const double scale = std::sqrt(sigma);
  for (double& h : e.heights) h *= scale;
  e.dt = sigma / static_cast<double>(n_steps);
  return e;
}

TruncatedItoSample sample_ito_excursion(double s_min, double dt, Rng& rng, const ItoWindow& window) {
  require(s_min > 0.0, "s_min must be positive");
  require(dt > 0.0, "dt must be positive");
  require(dt <= s_min / 100.0, "dt must be at most s_min / 100");
  require(window.max_steps >= 2, "max_steps must be >= 2");
  TruncatedItoSample out;
  out.s_min = s_min;
  out.s_max = window.s_max;
  out.mass = ito_window_mass(s_min, window.s_max);
  const double sigma = sample_ito_duration(s_min, window.s_max, rng);
  const double wanted = std::ceil(sigma / dt);
  const auto n = static_cast<std::size_t>(std::clamp(wanted, 2.0, static_cast<double>(window.max_steps)));
  out.excursion = sample_excursion_of_duration(sigma, n, rng);
  return out;
}

TruncatedItoSample sample_ito_excursion(double s_min, double dt, Rng& rng) {
  return sample_ito_excursion(s_min, dt, rng, ItoWindow{s_min});
}

double first_exit_time(double r, double dt, Rng& rng) {
  require(r > 0.0 && dt > 0.0, "first_exit_time: r and dt must be positive");
  const double sd = std::sqrt(dt);
  double x = 0.0;
  double t = 0.0;
  for (;;) {
    const double y = x + sd * rng.normal();
    if (std::abs(y) >= r) return t + 0.5 * dt;
    // Probability that the bridge from x to y touches +r or -r inside the step.
    const double p_up = std::exp(-2.0 * (r - x) * (r - y) / dt);
    const double p_dn = std::exp(-2.0 * (r + x) * (r + y) / dt);
    if (rng.uniform() < p_up + p_dn) return t + 0.5 * dt;
    x = y;
    t += dt;
  }
}

double sample_bridge_minimum(double a, double b, double dt, Rng& rng) {
  const double diff = b - a;
  return 0.5 * (a + b - std::sqrt(diff * diff - 2.0 * dt * std::log(rng.uniform())));
}

Path sample_bessel3(double horizon, double dt, Rng& rng) {
  require(horizon > 0.0 && dt > 0.0, "sample_bessel3: horizon and dt must be positive");
  require(dt <= horizon, "dt must not exceed horizon");
  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
  Path path;
  path.dim = 1;
  path.dt = dt;
  path.values.assign(steps + 1, 0.0);
  const double sd = std::sqrt(dt);
  double b = 0.0;
  double inf = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double next = b + sd * rng.normal();
    inf = std::min(inf, sample_bridge_minimum(b, next, dt, rng));
    b = next;
    path.values[i] = b - 2.0 * inf;
  }
  return path;
}

std::vector<double> bessel3_occupations(std::span<const double> r_grid, double dt, Rng& rng) {
  require(!r_grid.empty(), "r_grid must be nonempty");
  require(dt > 0.0, "dt must be positive");
  for (double r : r_grid) require(r > 0.0, "occupation radii must be positive");
  const double r_max = *std::max_element(r_grid.begin(), r_grid.end());
  const double sd = std::sqrt(dt);

  std::vector<double> occ(r_grid.size(), 0.0);
  double b = 0.0;
  double inf = 0.0;
  // B lives in the band [I, r_max + 2I] once excursions of B - 2I above
  // r_max are cut out; the band closes when I reaches -r_max.
  while (inf > -r_max) {
    double next = b + sd * rng.normal();
    inf = std::min(inf, sample_bridge_minimum(b, next, dt, rng));
    const double top = r_max + 2.0 * inf;
    if (next > top) next = 2.0 * top - next;
    if (next < inf) inf = next;
    b = next;
    const double x = b - 2.0 * inf;
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
      if (x <= r_grid[k]) occ[k] += dt;
    }
  }
  return occ;
}

double bessel3_occupation(double r, double dt, Rng& rng) {
  const double grid[1] = {r};
  return bessel3_occupations(grid, dt, rng)[0];
}

StableSample sample_stable(double alpha, double scale, Rng& rng) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(scale > 0.0, "scale must be positive");
  // Kanter's representation: (A(U)/E)^{(1-alpha)/alpha} with Zolotarev's A.
  const double u = kPi * rng.uniform();
  const double e = rng.exponential();
  const double a = std::pow(std::sin(alpha * u), alpha / (1.0 - alpha)) * std::sin((1.0 - alpha) * u) /
                   std::pow(std::sin(u), 1.0 / (1.0 - alpha));
  const double unit = std::pow(a / e, (1.0 - alpha) / alpha);
  return {alpha, scale, std::pow(scale, 1.0 / alpha) * unit};
}

double shorokhod_c11() { return std::pow(6.0 * kPi, -0.5) * std::pow(2.0, 7.0 / 6.0); }

double shorokhod_tail(double x) {
  require(x > 0.0, "shorokhod_tail: x must be positive");
  return shorokhod_c11() * std::pow(x, 1.0 / 6.0) * std::exp(-std::cbrt(kShorokhodC12 / x));
}

}  // namespace bsnake
