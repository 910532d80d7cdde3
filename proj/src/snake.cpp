#include "bsnake/snake.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace bsnake {

HeadWalker::HeadWalker(std::span<const double> origin)
    : origin_(origin.begin(), origin.end()), head_(origin.begin(), origin.end()) {
  if (origin_.empty()) throw std::invalid_argument("snake dimension must be >= 1");
}

void HeadWalker::move_to(double to, Rng& rng) {
  if (!(to >= 0.0)) throw std::invalid_argument("lifetime must be nonnegative");
  const std::size_t d = origin_.size();
  if (to > lifetime_) {
    const double gain = to - lifetime_;
    const double sd = std::sqrt(gain);
    lengths_.push_back(gain);
    for (std::size_t k = 0; k < d; ++k) {
      const double v = sd * rng.normal();
      increments_.push_back(v);
      head_[k] += v;
    }
    lifetime_ = to;
    return;
  }
  if (to == 0.0) {
    lengths_.clear();
    increments_.clear();
    head_ = origin_;
    lifetime_ = 0.0;
    return;
  }
  double cut = lifetime_ - to;
  while (cut > 0.0 && !lengths_.empty()) {
    const double len = lengths_.back();
    double* v = increments_.data() + (lengths_.size() - 1) * d;
    if (len <= cut) {
      for (std::size_t k = 0; k < d; ++k) head_[k] -= v[k];
      cut -= len;
      lengths_.pop_back();
      increments_.resize(increments_.size() - d);
      continue;
    }
    // Keep len' = len - cut of the top segment: bridge value at len'.
    const double keep = len - cut;
    const double frac = keep / len;
    const double sd = std::sqrt(keep * cut / len);
    for (std::size_t k = 0; k < d; ++k) {
      const double nv = frac * v[k] + sd * rng.normal();
      head_[k] += nv - v[k];
      v[k] = nv;
    }
    lengths_.back() = keep;
    cut = 0.0;
  }
  if (lengths_.empty()) {
    head_ = origin_;
    lifetime_ = 0.0;
  } else {
    lifetime_ = to;
  }
}

namespace {

// Heights of a BES(3) bridge from 0 at times cell 2^-j, j = 1..kEndLevels,
// given height h at time cell: the norm of a 3-d Brownian bridge from 0,
// halving the interval each time.
std::vector<double> end_cell_heights(double h, double cell, Rng& rng) {
  std::vector<double> out(kEndLevels);
  double v[3] = {h, 0.0, 0.0};
  double t = cell;
  for (int j = 0; j < kEndLevels; ++j) {
    const double sd = 0.5 * std::sqrt(t);
    double n2 = 0.0;
    for (double& c : v) {
      c = 0.5 * c + sd * rng.normal();
      n2 += c * c;
    }
    out[static_cast<std::size_t>(j)] = std::sqrt(n2);
    t *= 0.5;
  }
  return out;
}

}  // namespace

SnakeRealization sample_snake_head(const Excursion& lifetime, std::span<const double> origin, Rng& rng) {
  validate_excursion(lifetime);
  const std::size_t n = lifetime.steps();
  if (n < 2) throw std::invalid_argument("snake lifetime needs at least two steps");
  SnakeRealization snake;
  snake.lifetime = lifetime;
  snake.dim = static_cast<int>(origin.size());
  snake.origin.assign(origin.begin(), origin.end());
  const auto& h = lifetime.heights;
  const double dt = lifetime.dt;
  const std::vector<double> left = end_cell_heights(h[1], dt, rng);
  const std::vector<double> right = end_cell_heights(h[n - 1], dt, rng);
  const double sigma = lifetime.duration();

  HeadWalker walker(origin);
  snake.head.reserve(h.size() * origin.size());
  snake.end_head.reserve(2 * kEndLevels * origin.size());
  auto visit_end = [&](double t, double height) {
    walker.move_to(height, rng);
    snake.end_times.push_back(t);
    snake.end_heights.push_back(height);
    const auto w = walker.head();
    snake.end_head.insert(snake.end_head.end(), w.begin(), w.end());
  };
  for (std::size_t i = 0; i <= n; ++i) {
    if (i == 1) {
      for (int j = kEndLevels - 1; j >= 0; --j) visit_end(std::ldexp(dt, -j - 1), left[static_cast<std::size_t>(j)]);
    }
    if (i == n) {
      for (int j = 0; j < kEndLevels; ++j) visit_end(sigma - std::ldexp(dt, -j - 1), right[static_cast<std::size_t>(j)]);
    }
    walker.move_to(h[i], rng);
    const auto w = walker.head();
    snake.head.insert(snake.head.end(), w.begin(), w.end());
  }
  return snake;
}

SnakeRealization sample_snake_head(const ContourIndex& index, int dim, std::span<const double> origin, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("snake dimension must be >= 1");
  std::vector<double> start(static_cast<std::size_t>(dim), 0.0);
  if (!origin.empty()) {
    if (origin.size() != start.size()) throw std::invalid_argument("origin has wrong dimension");
    start.assign(origin.begin(), origin.end());
  }
  return sample_snake_head(index.excursion(), start, rng);
}

SnakeRealization sample_ise(std::size_t n_steps, int dim, Rng& rng, ExcursionMethod method) {
  if (dim < 1) throw std::invalid_argument("snake dimension must be >= 1");
  const Excursion e = sample_normalized_excursion(n_steps, rng, method);
  const std::vector<double> origin(static_cast<std::size_t>(dim), 0.0);
  return sample_snake_head(e, origin, rng);
}

void for_each_occupation_atom(const SnakeRealization& snake, const AtomVisitor& visit) {
  const std::size_t n = snake.lifetime.steps();
  const std::size_t L = kEndLevels;
  if (n < 2 || snake.end_times.size() != 2 * L) throw std::invalid_argument("snake has no end-cell refinement");
  const double dt = snake.lifetime.dt;
  // Node at distance dt 2^-j from the root: half of each neighbouring cell,
  // 0.75 dt 2^-j, except the innermost one, which also takes [0, dt 2^-L].
  auto end_weight = [&](std::size_t j) { return j == L ? 1.5 * std::ldexp(dt, -static_cast<int>(L)) : 0.75 * std::ldexp(dt, -static_cast<int>(j)); };
  for (std::size_t k = 0; k < L; ++k) visit(snake.end_point(k), end_weight(L - k), snake.end_times[k]);
  for (std::size_t i = 1; i < n; ++i) {
    const double w = (i == 1 ? 0.25 * dt : 0.5 * dt) + (i + 1 == n ? 0.25 * dt : 0.5 * dt);
    visit(snake.point(i), w, dt * static_cast<double>(i));
  }
  for (std::size_t k = L; k < 2 * L; ++k) visit(snake.end_point(k), end_weight(k - L + 1), snake.end_times[k]);
}

OccupationMeasure occupation_cloud(const SnakeRealization& snake) {
  OccupationMeasure cloud;
  cloud.dim = snake.dim;
  cloud.dt = snake.lifetime.dt;
  const std::size_t atoms = snake.size() - 2 + snake.end_times.size();
  cloud.points.reserve(atoms * static_cast<std::size_t>(snake.dim));
  cloud.weights.reserve(atoms);
  cloud.times.reserve(atoms);
  for_each_occupation_atom(snake, [&](std::span<const double> x, double w, double t) {
    cloud.points.insert(cloud.points.end(), x.begin(), x.end());
    cloud.weights.push_back(w);
    cloud.times.push_back(t);
  });
  cloud.total_mass = snake.duration();
  return cloud;
}

BoxDimension range_box_dimension(const OccupationMeasure& cloud, std::span<const double> eps_grid) {
  if (eps_grid.size() < 2) throw std::invalid_argument("box dimension needs at least two scales");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw std::invalid_argument("box sizes must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) throw std::invalid_argument("box sizes must be strictly decreasing");
  }
  if (cloud.empty()) throw std::invalid_argument("box dimension of an empty cloud");
  const auto d = static_cast<std::size_t>(cloud.dim);
  BoxDimension out;
  std::vector<std::int64_t> keys;
  for (double eps : eps_grid) {
    keys.assign(cloud.size() * d, 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto x = cloud.point(i);
      for (std::size_t k = 0; k < d; ++k) keys[i * d + k] = static_cast<std::int64_t>(std::floor(x[k] / eps));
    }
    std::vector<std::size_t> order(cloud.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto row = [&](std::size_t i) { return keys.begin() + static_cast<std::ptrdiff_t>(i * d); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(d), row(b),
                                          row(b) + static_cast<std::ptrdiff_t>(d));
    });
    std::size_t count = 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (!std::equal(row(order[i]), row(order[i]) + static_cast<std::ptrdiff_t>(d), row(order[i - 1]))) ++count;
    }
    out.eps.push_back(eps);
    out.counts.push_back(static_cast<double>(count));
  }
  // Least-squares slope of log N against log(1/eps).
  const double m = static_cast<double>(out.eps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < out.eps.size(); ++i) {
    const double x = -std::log(out.eps[i]);
    const double y = std::log(out.counts[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

BoxDimension range_box_dimension(const SnakeRealization& snake, std::span<const double> eps_grid) {
  return range_box_dimension(occupation_cloud(snake), eps_grid);
}

}  // namespace bsnake
