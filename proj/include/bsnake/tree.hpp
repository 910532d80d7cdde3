#pragma once

// The Brownian-tree view of an excursion: range minima m(s,t), the tree
// distance d_H(s,t) = H_s + H_t - 2 m(s,t), tree-ball occupation times and
// the two-sided (Bismut) description of the tree seen from a typical point.

#include <cstddef>
#include <span>
#include <vector>

#include "bsnake/kernel.hpp"
#include "bsnake/rng.hpp"

namespace bsnake {

/// Excursion plus a sparse table answering range-minimum queries in O(1).
/// Immutable after construction; concurrent reads are safe.
class ContourIndex {
 public:
  explicit ContourIndex(Excursion excursion);

  const Excursion& excursion() const { return excursion_; }
  std::size_t size() const { return excursion_.heights.size(); }
  double dt() const { return excursion_.dt; }
  double duration() const { return excursion_.duration(); }
  double height(std::size_t i) const { return excursion_.heights[i]; }

  /// min(H_i..H_j) for i <= j (arguments are reordered otherwise).
  double range_min(std::size_t i, std::size_t j) const;

  /// Nearest grid index of time t; throws std::invalid_argument outside [0, sigma].
  std::size_t snap(double t) const;

  double tree_distance_at(std::size_t i, std::size_t j) const;
  double tree_distance(double s, double t) const;

  /// Grid measure of {s : d_H(s, t) <= r}; uses the n left grid points so that
  /// the whole tree has measure sigma.
  double ball_occupation(double t, double r) const;
  double ball_occupation_at(std::size_t i, double r) const;

 private:
  Excursion excursion_;
  std::vector<std::vector<double>> table_;  // table_[k][i] = min over [i, i + 2^k)
};

ContourIndex build_contour_index(Excursion excursion);

/// Occupations b(r), b'(r) of {B - 2I <= r} for two independent linear
/// Brownian motions, each read off before B first hits -a.
struct BismutDraw {
  double a = 0.0;
  std::vector<double> r_grid;
  std::vector<double> left_occ;
  std::vector<double> right_occ;
};

/// Requires a > max(r_grid). For r < a the occupations do not depend on a:
/// the occupation of [0, r] by B - 2I is complete once B passes -r.
BismutDraw bismut_sample(double a, std::span<const double> r_grid, double dt, Rng& rng);

/// Fraction of sampled grid times t for which a(t, r) / k(r) >= (1 - slack) / 4
/// holds simultaneously on every radius of r_grid (all radii < 1/e).
double typical_density_fraction(const ContourIndex& index, std::span<const double> r_grid, double slack,
                                std::size_t n_points, Rng& rng);

}  // namespace bsnake
