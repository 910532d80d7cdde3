#pragma once

// Palm-decorated backbones M*_a, Poisson superpositions of snakes (super-
// Brownian occupation), escape times, the S_r / E_r statistics, the mild
// equation check and the kappa_d experiment.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bsnake/kernel.hpp"
#include "bsnake/occupation.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/snake.hpp"

namespace bsnake {

/// A decoration W^j of the backbone, kept as a summary; the full snake is
/// handed to the visitor while it exists.
struct Decoration {
  double birth = 0.0;
  std::vector<double> root;
  double duration = 0.0;
  std::size_t steps = 0;
};

struct PalmOptions {
  double backbone_dt = 0.0;  // 0 means a / 1024
  double s_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = std::size_t{1} << 10;
  bool keep_cloud = true;
};

struct PalmCloud {
  Path backbone;
  std::vector<Decoration> decorations;
  double a = 0.0;
  double s_min = 0.0;
  OccupationMeasure cloud;
};

using DecorationVisitor = std::function<void(const Decoration&, const SnakeRealization&)>;

/// Backbone BM from 0 on [0, a]; decorations born at the points of a Poisson
/// process of rate 4 N(s_min <= sigma < s_max), each a truncated Ito snake
/// rooted at the backbone (exact BM value at its birth time).
PalmCloud sample_palm_cloud(double a, double s_min, double dt, int dim, Rng& rng, const PalmOptions& options = {},
                            const DecorationVisitor& visit = {});

struct InitialAtom {
  std::vector<double> point;
  double mass = 0.0;
};

struct SbmOptions {
  double s_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = std::size_t{1} << 14;
  bool keep_excursions = true;
};

struct SbmOccupation {
  std::vector<InitialAtom> initial;
  std::vector<SnakeRealization> excursions;
  OccupationMeasure cloud;
  double beta = 1.0;
};

/// Every initial atom (x, m) roots Poisson(m N(s_min <= sigma < s_max)) snakes.
SbmOccupation sample_sbm_occupation(std::span<const InitialAtom> initial, double s_min, double dt, Rng& rng,
                                    const SbmOptions& options = {});

/// gamma(R): positive stable(1/2) with Laplace transform exp(-R sqrt(2 lambda)).
double escape_time(double R, Rng& rng);

/// r_n = (1 / log n)^n.
double upperbound_radius(int n);

struct UpperboundOptions {
  int dim = 5;
  std::size_t max_steps = std::size_t{1} << 10;
  /// Decorations after gamma(2r) are followed for horizon_factor * (2r)^2.
  double horizon_factor = 100.0;
  /// When false only gamma and S are drawn (E = true, no post-gamma work).
  bool sample_events = true;
  /// Summation of S stops once S >= s_cap (gamma is heavy tailed, so the
  /// pre-gamma decoration count is unbounded); S is then only a lower bound.
  double s_cap = std::numeric_limits<double>::infinity();
};

struct UpperboundSample {
  int n = 0;
  double r = 0.0;
  double gamma = 0.0;
  double S = 0.0;
  bool E = true;
  bool V = true;
  double bound = 0.0;  // (27/2) g(r)
  std::size_t pre_count = 0;
  std::size_t post_count = 0;
};

/// S = total duration of decorations born before gamma(2r); E = no decoration
/// born after gamma(2r) meets the closed ball B(0, r); V = {S <= bound} and E.
/// After gamma(2r) the radial part of the first three coordinates is
/// 2r + |3-d BM|; the remaining coordinates start from N(0, gamma I).
UpperboundSample upperbound_statistic(int n, double s_min, double dt, Rng& rng, const UpperboundOptions& options = {});

/// Radial functions on R^d used by the mild equation.
struct RadialFunction {
  enum class Kind { zero, indicator, bump, constant };
  Kind kind = Kind::indicator;
  double radius = 1.0;  // support radius
  double height = 1.0;

  double operator()(double rho) const;
  /// "zero", "indicator", "bump" or "constant".
  static Kind parse_kind(const std::string& name);
};

/// Integral of G(x, y) f(|y - c|) dy at |x - c| = rho, with the Green function
/// G of BM (generator Delta / 2) in R^d, d >= 3.
double radial_green(const RadialFunction& f, double rho, int dim);

/// N_x(<M, f>; sigma < s) at |x - c| = rho for f radial about c.
double short_excursion_first_moment(const RadialFunction& f, double rho, int dim, double s);

struct MildOptions {
  int dim = 5;
  double dt = 0.0;  // 0 means s_min / 100
  std::size_t max_steps = std::size_t{1} << 12;
  std::uint64_t first_stream = 0;
  unsigned threads = 1;
};

struct MildReport {
  std::vector<double> radii;
  std::vector<double> u;          // u_f estimate
  std::vector<double> u_se;
  std::vector<double> remainder;  // linearized contribution of sigma < s_min
  std::vector<double> lhs;        // u + 2 G(u^2)
  std::vector<double> rhs;        // G f
  std::vector<double> residual;   // |lhs - rhs| / rhs
  double max_residual = 0.0;
};

/// u_f(x) = N_x(1 - exp(-<M, f>)) on a radial grid by truncated Monte Carlo
/// plus the linearized short-excursion remainder, then both sides of
/// u + 2 G(u^2) = G f. Throws std::invalid_argument for constant f.
MildReport check_mild_equation(const RadialFunction& f, std::span<const double> radii, double s_min,
                               std::size_t n_replicas, std::uint64_t seed, const MildOptions& options = {});

struct KappaConfig {
  int dim = 5;
  double a = 0.5;
  double s_min = 1e-8;
  double dt = 0.0;  // 0 means s_min / 100
  std::size_t max_steps = 64;
  std::vector<double> r_grid{0.25, 0.125, 0.0625, 0.03125};
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct KappaPoint {
  std::vector<double> masses;
  std::vector<double> ratios;
  double min_ratio = 0.0;
  bool degenerate = false;  // all mass inside the smallest ball: ratios blow up
};

/// Density ratios M(B(0, r)) / g(r) on the grid for a given cloud.
KappaPoint kappa_point(const SpatialIndex& index, std::span<const double> r_grid);

/// Masses M*_a(B(0, r)) of one Palm cloud, computed decoration by decoration.
std::vector<double> palm_ball_masses(double a, double s_min, double dt, int dim, std::span<const double> r_grid,
                                     Rng& rng, const PalmOptions& options = {});

struct KappaReport {
  KappaConfig config;
  std::vector<KappaPoint> points;
  std::vector<double> min_ratios;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lower_bracket = 0.0;  // 2^-10
  double upper_bracket = 0.0;  // 27/2
  double fraction_above_lower = 0.0;       // minima > 2^-10
  double fraction_above_half_lower = 0.0;  // minima > 2^-11
  double fraction_below_upper = 0.0;
  bool dimension_warning = false;  // d < 5
};

KappaReport kappa_experiment(const KappaConfig& config);
void write_kappa_csv(std::ostream& out, const KappaReport& report);
void write_kappa_json(std::ostream& out, const KappaReport& report);

/// Empirical quantile with linear interpolation (sorted copy).
double quantile(std::vector<double> values, double q);

}  // namespace bsnake
