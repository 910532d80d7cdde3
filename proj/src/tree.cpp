#include "bsnake/tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "bsnake/packing.hpp"

namespace bsnake {

ContourIndex::ContourIndex(Excursion excursion) : excursion_(std::move(excursion)) {
  if (excursion_.heights.empty()) throw std::invalid_argument("cannot index an empty excursion");
  validate_excursion(excursion_);
  const std::size_t n = excursion_.heights.size();
  table_.push_back(excursion_.heights);
  for (std::size_t width = 2; width <= n; width *= 2) {
    const auto& prev = table_.back();
    const std::size_t half = width / 2;
    std::vector<double> level(n - width + 1);
    for (std::size_t i = 0; i + width <= n; ++i) level[i] = std::min(prev[i], prev[i + half]);
    table_.push_back(std::move(level));
  }
}

double ContourIndex::range_min(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  if (j >= size()) throw std::invalid_argument("range_min: index out of range");
  const std::size_t len = j - i + 1;
  const auto k = static_cast<std::size_t>(std::bit_width(len) - 1);
  const auto& level = table_[k];
  return std::min(level[i], level[j + 1 - (std::size_t{1} << k)]);
}

std::size_t ContourIndex::snap(double t) const {
  const double sigma = duration();
  if (!(t >= 0.0 && t <= sigma)) throw std::invalid_argument("time outside [0, sigma]");
  const auto i = static_cast<std::size_t>(std::llround(t / excursion_.dt));
  return std::min(i, size() - 1);
}

double ContourIndex::tree_distance_at(std::size_t i, std::size_t j) const {
  const auto& h = excursion_.heights;
  return std::max(0.0, h[i] + h[j] - 2.0 * range_min(i, j));
}

double ContourIndex::tree_distance(double s, double t) const { return tree_distance_at(snap(s), snap(t)); }

double ContourIndex::ball_occupation_at(std::size_t i, double r) const {
  if (r < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
  if (i >= size()) throw std::invalid_argument("ball_occupation: index out of range");
  const auto& h = excursion_.heights;
  const std::size_t n = size() - 1;
  // Sweep outward from i keeping the running minimum: O(n) per query.
  std::size_t count = 0;
  double m = h[i];
  for (std::size_t s = i + 1; s-- > 0;) {
    m = std::min(m, h[s]);
    if (s < n && h[s] + h[i] - 2.0 * m <= r) ++count;
  }
  m = h[i];
  for (std::size_t s = i + 1; s < n; ++s) {
    m = std::min(m, h[s]);
    if (h[s] + h[i] - 2.0 * m <= r) ++count;
  }
  return static_cast<double>(count) * excursion_.dt;
}

double ContourIndex::ball_occupation(double t, double r) const { return ball_occupation_at(snap(t), r); }

ContourIndex build_contour_index(Excursion excursion) { return ContourIndex(std::move(excursion)); }

BismutDraw bismut_sample(double a, std::span<const double> r_grid, double dt, Rng& rng) {
  if (r_grid.empty()) throw std::invalid_argument("r_grid must be nonempty");
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  const double r_max = *std::max_element(r_grid.begin(), r_grid.end());
  if (!(a > r_max)) throw std::invalid_argument("bismut_sample requires a > max(r_grid)");
  BismutDraw draw;
  draw.a = a;
  draw.r_grid.assign(r_grid.begin(), r_grid.end());
  draw.left_occ = bessel3_occupations(r_grid, dt, rng);
  draw.right_occ = bessel3_occupations(r_grid, dt, rng);
  return draw;
}

double typical_density_fraction(const ContourIndex& index, std::span<const double> r_grid, double slack,
                                std::size_t n_points, Rng& rng) {
  if (n_points == 0) throw std::invalid_argument("n_points must be positive");
  const Gauge k = Gauge::tree_k();
  std::size_t good = 0;
  const std::size_t n = index.size() - 1;
  for (std::size_t p = 0; p < n_points; ++p) {
    const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    bool ok = true;
    for (double r : r_grid) {
      if (index.ball_occupation_at(i, r) / k(r) < 0.25 * (1.0 - slack)) {
        ok = false;
        break;
      }
    }
    if (ok) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(n_points);
}

}  // namespace bsnake
