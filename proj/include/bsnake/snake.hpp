#pragma once

// The head process of the Brownian snake driven by a lifetime excursion, the
// normalized snake (ISE), occupation clouds and box-counting dimension.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bsnake/kernel.hpp"
#include "bsnake/occupation.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/tree.hpp"

namespace bsnake {

/// Endpoint of the current stopped path. The path is kept as a stack of
/// (lifetime, increment) segments: rising lifetime pushes an independent
/// Gaussian increment, falling lifetime pops segments and splits the top one
/// by Brownian-bridge conditioning, so grid-time laws are exact.
class HeadWalker {
 public:
  explicit HeadWalker(std::span<const double> origin);

  int dim() const { return static_cast<int>(origin_.size()); }
  double lifetime() const { return lifetime_; }
  std::span<const double> head() const { return head_; }

  /// Change the lifetime from lifetime() to `to` (>= 0).
  void move_to(double to, Rng& rng);

 private:
  std::vector<double> origin_;
  std::vector<double> head_;
  std::vector<double> lengths_;
  std::vector<double> increments_;  // row-major, one row per segment
  double lifetime_ = 0.0;
};

/// Refinement depth of the end cells. Given the grid heights the lifetime on
/// an end cell is a BES(3) bridge from 0, sampled exactly at the nodes.
inline constexpr int kEndLevels = 10;

struct SnakeRealization {
  Excursion lifetime;
  int dim = 1;
  std::vector<double> origin;
  std::vector<double> head;  // row-major, one point per lifetime grid point
  // End-cell refinement: left cell then right cell, each in time order.
  std::vector<double> end_times;
  std::vector<double> end_heights;
  std::vector<double> end_head;  // row-major

  std::size_t size() const { return lifetime.heights.size(); }
  double duration() const { return lifetime.duration(); }
  std::span<const double> point(std::size_t i) const {
    return {head.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<const double> end_point(std::size_t i) const {
    return {end_head.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

SnakeRealization sample_snake_head(const Excursion& lifetime, std::span<const double> origin, Rng& rng);
SnakeRealization sample_snake_head(const ContourIndex& index, int dim, std::span<const double> origin, Rng& rng);

/// Normalized excursion (duration 1) plus head, started at the origin of R^dim.
SnakeRealization sample_ise(std::size_t n_steps, int dim, Rng& rng,
                            ExcursionMethod method = ExcursionMethod::bessel_bridge);

/// Occupation quadrature. Trapezoid weights on the grid away from the root;
/// the end cells [0, dt] and [sigma - dt, sigma] use the refinement nodes at
/// distance dt 2^-j (j = 1..kEndLevels) from the root, and the last piece
/// [0, dt 2^-kEndLevels] goes to its inner node, so no atom sits at the root.
/// visit(point, weight, time) runs in time order; the weights sum to sigma.
using AtomVisitor = std::function<void(std::span<const double>, double, double)>;
void for_each_occupation_atom(const SnakeRealization& snake, const AtomVisitor& visit);

/// Atoms of for_each_occupation_atom; total mass sigma.
OccupationMeasure occupation_cloud(const SnakeRealization& snake);

struct BoxDimension {
  std::vector<double> eps;
  std::vector<double> counts;  // occupied grid cells of side eps
  double slope = 0.0;          // least squares of log N against log 1/eps
};

BoxDimension range_box_dimension(const OccupationMeasure& cloud, std::span<const double> eps_grid);
BoxDimension range_box_dimension(const SnakeRealization& snake, std::span<const double> eps_grid);

}  // namespace bsnake
