#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsnake/kernel.hpp"
#include "bsnake/occupation.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/snake.hpp"
#include "bsnake/stats.hpp"
#include "bsnake/tree.hpp"
#include "approx.hpp"
#include "oracles.hpp"

using namespace bsnake;

namespace {

Excursion grid_path(std::vector<double> h, double dt = 1.0) {
  Excursion e;
  e.dt = dt;
  e.heights = std::move(h);
  return e;
}

double covariance(const std::vector<double>& a, const std::vector<double>& b, double* se = nullptr) {
  std::vector<double> prod;
  for (std::size_t i = 0; i < a.size(); ++i) prod.push_back(a[i] * b[i]);
  const Summary s = summarize(prod);
  if (se) *se = s.se;
  return s.mean;
}

}  // namespace

TEST_CASE("single branch: apex is Gaussian with variance H and the snake returns home") {
  const std::vector<double> origin{1.0, -2.0, 0.5};
  const Excursion e = grid_path({0.0, 0.7, 0.0});
  Rng rng(1);
  std::vector<double> x0;
  for (int i = 0; i < 100000; ++i) {
    const SnakeRealization s = sample_snake_head(e, origin, rng);
    CHECK(s.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(s.point(0)[k] == origin[k]);
      CHECK(s.point(2)[k] == origin[k]);
    }
    x0.push_back(s.point(1)[0] - origin[0]);
  }
  std::vector<double> sq;
  for (double v : x0) sq.push_back(v * v);
  const Summary v = summarize(sq);
  CHECK(std::abs(v.mean - 0.7) <= 3.0 * v.se);
  const Summary m = summarize(x0);
  CHECK(std::abs(m.mean) <= 3.0 * m.se);
}

TEST_CASE("partial erasure keeps the Brownian law along the branch") {
  // Up to 2, down to 1: the head at lifetime 1 is the midpoint of the first segment.
  const Excursion e = grid_path({0.0, 2.0, 1.0, 0.0});
  const std::vector<double> origin{0.0};
  Rng rng(2);
  std::vector<double> w1, w2;
  for (int i = 0; i < 100000; ++i) {
    const SnakeRealization s = sample_snake_head(e, origin, rng);
    w2.push_back(s.point(1)[0]);
    w1.push_back(s.point(2)[0]);
  }
  double se = 0.0;
  const double v1 = covariance(w1, w1, &se);
  CHECK(std::abs(v1 - 1.0) <= 3.0 * se);
  const double c12 = covariance(w1, w2, &se);
  CHECK(std::abs(c12 - 1.0) <= 3.0 * se);
}

TEST_CASE("branches decorrelate given the branch point") {
  const Excursion e = grid_path({0.0, 1.0, 2.0, 1.0, 2.0, 1.0, 0.0});
  const std::vector<double> origin{0.0, 0.0};
  Rng rng(3);
  std::vector<double> a, b, sa, sb;
  for (int i = 0; i < 50000; ++i) {
    const SnakeRealization s = sample_snake_head(e, origin, rng);
    CHECK(std::abs(s.point(3)[0] - s.point(1)[0]) <= 1e-12);
    a.push_back(s.point(2)[0] - s.point(1)[0]);
    b.push_back(s.point(4)[0] - s.point(3)[0]);
  }
  double se = 0.0;
  const double c = covariance(a, b, &se);
  CHECK(std::abs(c) <= 3.0 * se);
}

TEST_CASE("conditional covariance matches the tree distance") {
  Rng life(4);
  const Excursion H = sample_normalized_excursion(2000, life);
  const ContourIndex idx = build_contour_index(H);
  const int dim = 3;
  const std::vector<double> origin(dim, 0.0);
  Rng pick(5);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (pairs.size() < 50) {
    const auto i = static_cast<std::size_t>(pick.uniform() * 2001.0);
    const auto j = static_cast<std::size_t>(pick.uniform() * 2001.0);
    if (idx.tree_distance_at(i, j) > 1e-6) pairs.emplace_back(i, j);
  }
  std::vector<std::vector<double>> dx(pairs.size() * dim);
  Rng rng(6);
  for (int rep = 0; rep < 2000; ++rep) {
    const SnakeRealization s = sample_snake_head(idx, dim, origin, rng);
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      for (int k = 0; k < dim; ++k) dx[q * dim + k].push_back(s.point(pairs[q].first)[k] - s.point(pairs[q].second)[k]);
    }
  }
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const double dH = H.heights[pairs[q].first] + H.heights[pairs[q].second] -
                      2.0 * oracle::linear_scan_min(H.heights, pairs[q].first, pairs[q].second);
    double trace = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double var = covariance(dx[q * dim + k], dx[q * dim + k]);
      CHECK(std::abs(var - dH) / dH <= 0.15);
      trace += var;
    }
    CHECK(trace == rel(dim * dH, 0.15));
    double se = 0.0;
    const double off = covariance(dx[q * dim], dx[q * dim + 1], &se);
    CHECK(std::abs(off) <= 4.0 * se);
  }
}

TEST_CASE("ISE: unit mass, centered, bounded range") {
  Rng rng(7);
  std::vector<double> coord;
  for (int rep = 0; rep < 2000; ++rep) {
    const SnakeRealization s = sample_ise(500, 5, rng);
    CHECK(s.duration() == rel(1.0));
    const OccupationMeasure m = occupation_cloud(s);
    CHECK(m.total_mass == rel(1.0));
    double w = 0.0;
    for (double x : m.weights) w += x;
    CHECK(w == rel(1.0));
    const auto i = 1 + static_cast<std::size_t>(rng.uniform() * 499.0);
    coord.push_back(s.point(i)[2]);
    for (double x : s.head) CHECK(std::isfinite(x));
  }
  const Summary c = summarize(coord);
  CHECK(std::abs(c.mean) <= 3.0 * c.se);
}

TEST_CASE("occupation cloud") {
  Rng rng(8);
  const std::vector<double> origin{0.0, 0.0, 0.0};
  const SnakeRealization s = sample_snake_head(sample_excursion_of_duration(2.0, 1000, rng), origin, rng);
  const OccupationMeasure m = occupation_cloud(s);
  CHECK(m.total_mass == rel(2.0));
  double w = 0.0, reach = 0.0;
  for (double x : m.weights) w += x;
  CHECK(w == rel(2.0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    double n2 = 0.0;
    for (double v : s.point(i)) n2 += v * v;
    reach = std::max(reach, std::sqrt(n2));
  }
  const SpatialIndex idx = build_spatial_index(m, 0.5);
  CHECK(idx.ball_mass(origin, reach * 1.01 + 1e-9) == rel(2.0));

  // Atoms run in time order inside (0, sigma), none at the root, weights sum to sigma.
  double prev = 0.0;
  std::size_t count = 0;
  for_each_occupation_atom(s, [&](std::span<const double> x, double weight, double t) {
    CHECK(t > prev);
    CHECK(t < 2.0);
    CHECK(weight > 0.0);
    CHECK(x.size() == 3);
    prev = t;
    ++count;
  });
  CHECK(count == m.size());
  CHECK(count == 999 + 2 * kEndLevels);
  CHECK(m.times.front() == rel(2.0 / 1000.0 * std::ldexp(1.0, -kEndLevels)));
}

TEST_CASE("end cells follow the BES(3) bridge") {
  // Given H at time dt, the height at dt / 2 is the norm of a 3-d Gaussian with
  // mean (H/2, 0, 0) and variance dt / 4 per coordinate.
  Excursion e = grid_path({0.0, 0.3, 0.0}, 0.04);
  const std::vector<double> origin{0.0};
  std::vector<double> half;
  Rng rng(10);
  for (int i = 0; i < 20000; ++i) {
    const SnakeRealization s = sample_snake_head(e, origin, rng);
    CHECK(s.end_times[kEndLevels - 1] == rel(0.02));
    CHECK(s.end_times[kEndLevels] == rel(0.06));
    half.push_back(s.end_heights[kEndLevels - 1]);
  }
  std::vector<double> direct;
  Rng ref(11);
  for (int i = 0; i < 20000; ++i) {
    const double a = 0.15 + 0.1 * ref.normal(), b = 0.1 * ref.normal(), c = 0.1 * ref.normal();
    direct.push_back(std::sqrt(a * a + b * b + c * c));
  }
  CHECK(ks_statistic(half, direct).below());
  CHECK_THROWS_AS(sample_snake_head(grid_path({0.0, 0.0}), origin, rng), std::invalid_argument);
}

TEST_CASE("occupation quadrature is unbiased with the start on the sphere") {
  // x on the boundary of B(c, a): the integrand is 1/2 near both roots, where
  // dropping or lumping the end cells is most visible.
  const double sigma = 0.01, a = 0.2;
  const double exact = oracle::excursion_ball_occupation_5d(a, a, sigma);
  CHECK(exact / sigma == rel(0.02475, 0.01));
  const std::vector<double> c{a, 0.0, 0.0, 0.0, 0.0};
  const std::vector<double> origin(5, 0.0);
  for (std::size_t n : {8, 100}) {
    std::vector<double> occ;
    for (std::uint64_t i = 0; i < 20000; ++i) {
      Rng rng(12, i);
      const SnakeRealization s = sample_snake_head(sample_excursion_of_duration(sigma, n, rng), origin, rng);
      const OccupationMeasure m = occupation_cloud(s);
      occ.push_back(oracle::brute_ball_mass(m.points, m.weights, 5, c, a, false));
    }
    const Summary sm = summarize(occ);
    CHECK(std::abs(sm.mean - exact) <= 3.0 * sm.se);
  }
  // Start inside and outside the ball.
  for (double rho : {0.1, 0.3}) {
    const std::vector<double> cc{rho, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> occ;
    for (std::uint64_t i = 0; i < 20000; ++i) {
      Rng rng(13, i);
      const SnakeRealization s = sample_snake_head(sample_excursion_of_duration(sigma, 50, rng), origin, rng);
      const OccupationMeasure m = occupation_cloud(s);
      occ.push_back(oracle::brute_ball_mass(m.points, m.weights, 5, cc, a, false));
    }
    const Summary sm = summarize(occ);
    CHECK(std::abs(sm.mean - oracle::excursion_ball_occupation_5d(rho, a, sigma)) <= 3.0 * sm.se);
  }
}

TEST_CASE("box-counting dimension on fixtures") {
  OccupationMeasure point;
  point.dim = 2;
  for (int i = 0; i < 100; ++i) point.add(std::vector<double>{0.3, 0.3}, 1.0);
  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  CHECK(std::abs(range_box_dimension(point, eps).slope) <= 1e-12);

  OccupationMeasure line;
  line.dim = 3;
  for (int i = 0; i < 20000; ++i) {
    const double t = i / 20000.0;
    line.add(std::vector<double>{t, 0.5 * t + 0.1, 0.2}, 1.0);
  }
  CHECK(std::abs(range_box_dimension(line, eps).slope - 1.0) <= 0.2);

  const std::vector<double> one{0.1};
  const std::vector<double> up{0.1, 0.2};
  CHECK_THROWS_AS(range_box_dimension(line, one), std::invalid_argument);
  CHECK_THROWS_AS(range_box_dimension(line, up), std::invalid_argument);
  CHECK_THROWS_AS(range_box_dimension(OccupationMeasure{}, eps), std::invalid_argument);
}

TEST_CASE("snake samplers are reproducible") {
  Rng a(9, 1), b(9, 1);
  const SnakeRealization x = sample_ise(300, 4, a);
  const SnakeRealization y = sample_ise(300, 4, b);
  CHECK(x.head == y.head);
  CHECK(x.lifetime.heights == y.lifetime.heights);
}
