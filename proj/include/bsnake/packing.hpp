#pragma once

// Gauge functions, the dyadic cube decomposition used to discretize packings,
// greedy epsilon-packing lower bounds of the packing pre-measure, and the
// cube statistic U_n(A).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsnake/occupation.hpp"

namespace bsnake {

/// A positive nondecreasing function of the radius with domain (0, r_max).
/// Evaluation outside the domain throws std::domain_error.
class Gauge {
 public:
  Gauge(std::string name, std::function<double(double)> fn, double r_max);

  /// g(r) = r^4 / (log log 1/r)^3 on (0, 1/e).
  static Gauge packing_g();
  /// k(r) = r^2 / log log 1/r on (0, 1/e).
  static Gauge tree_k();
  /// r^alpha on (0, inf).
  static Gauge power(double alpha);
  /// "g", "k" or "power:<alpha>".
  static Gauge parse(std::string_view spec);

  double operator()(double r) const;
  bool in_domain(double r) const { return r > 0.0 && r < r_max_; }
  const std::string& name() const { return name_; }
  double r_max() const { return r_max_; }

 private:
  std::string name_;
  std::function<double(double)> fn_;
  double r_max_;
};

double gauge_value(const Gauge& gauge, double r);

/// p = floor(log2(4 sqrt(d))), so that 2^p > 2 sqrt(d).
int dyadic_offset(int d);

/// n(r) = floor(log2((1 + 2^-p) sqrt(d) / r)).
int cell_level(double r, int d);

/// A center y of the lattice 2^{-n-p} Z^d with its large cube D_n(y) (side
/// 2^-n) and small cube D*_n(y) (side 2^{-n-p}); both half-open.
struct DyadicCell {
  int level = 0;
  int offset = 0;
  std::vector<std::int64_t> index;  // y = index * spacing()

  int dim() const { return static_cast<int>(index.size()); }
  double spacing() const;
  double side() const;
  std::vector<double> center() const;
  bool small_cube_contains(std::span<const double> x) const;
  bool large_cube_contains(std::span<const double> x) const;
};

/// Lattice point of level `level` whose small cube contains x.
DyadicCell small_cube_of(std::span<const double> x, int level);

/// Cell at level n(r) whose small cube holds x; its large cube lies in B(x, r).
/// Requires 0 < r <= 1/(2d).
DyadicCell locate_cell(std::span<const double> x, double r);

struct PackingOptions {
  /// Radii tried: eps, eps/2, ..., eps/2^(levels-1).
  int levels = 3;
};

/// Greedy lower bound of the eps-packing pre-measure of the atoms of `index`
/// satisfying `keep`: closed balls, largest radius first, and within a radius
/// the candidates with fewest conflicts first.
double epsilon_packing(const SpatialIndex& index, const std::function<bool(std::span<const double>)>& keep,
                       double eps, const Gauge& gauge, const PackingOptions& options = {});

/// Same estimator on an explicit list of candidate centers (row-major).
double epsilon_packing(std::span<const double> centers, int dim, double eps, const Gauge& gauge,
                       const PackingOptions& options = {});

struct CubeStatistic {
  double value = 0.0;
  std::size_t hit_cells = 0;      // small cubes met by the range inside the shell
  std::size_t counted_cells = 0;  // of which light enough to count
  bool regime_warning = false;    // A <= 100
};

/// U_n(A): sum over lattice points y with 1/A <= |y| <= A of
/// g(sqrt(d)(1 + 2^-p) 2^-n) 1{M(D_n(y)) <= kappa2 g(2^-n)} 1{R meets D*_n(y)}.
/// The range R is the atom set of the cloud.
CubeStatistic cube_statistic(const SpatialIndex& index, int n, double A, double kappa2);

/// kappa2 with kappa2 g(2^-n) = kappa1 g(2^{-n-p} sqrt(d) / 2) at n = 7.
double default_kappa2(int d, double kappa1);

}  // namespace bsnake
