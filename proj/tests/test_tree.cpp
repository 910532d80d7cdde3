#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsnake/kernel.hpp"
#include "bsnake/packing.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/stats.hpp"
#include "bsnake/tree.hpp"
#include "approx.hpp"
#include "oracles.hpp"

using namespace bsnake;

namespace {

Excursion tent() {
  Excursion e;
  e.dt = 0.5;
  e.heights = {0.0, 1.0, 0.0};
  return e;
}

// Direct O(n^2) ball occupation: dt times the number of left grid points within r.
double scan_occupation(const Excursion& e, std::size_t i, double r) {
  double occ = 0.0;
  for (std::size_t s = 0; s + 1 < e.heights.size(); ++s) {
    const double m = oracle::linear_scan_min(e.heights, i, s);
    if (e.heights[i] + e.heights[s] - 2.0 * m <= r) occ += e.dt;
  }
  return occ;
}

}  // namespace

TEST_CASE("range minimum: small fixtures") {
  Excursion flat;
  flat.dt = 1.0;
  flat.heights = {0.0, 0.0};
  CHECK(build_contour_index(flat).range_min(0, 1) == 0.0);

  const ContourIndex idx = build_contour_index(tent());
  CHECK(idx.range_min(0, 2) == 0.0);
  CHECK(idx.range_min(1, 1) == 1.0);
  CHECK(idx.range_min(2, 0) == 0.0);
  CHECK_THROWS_AS(idx.range_min(0, 3), std::invalid_argument);
}

TEST_CASE("range minimum matches a linear scan") {
  Rng rng(1);
  const Excursion e = sample_normalized_excursion(5000, rng);
  const ContourIndex idx = build_contour_index(e);
  for (int q = 0; q < 1000; ++q) {
    const auto i = static_cast<std::size_t>(rng.uniform() * 5001.0);
    const auto j = static_cast<std::size_t>(rng.uniform() * 5001.0);
    CHECK(idx.range_min(i, j) == oracle::linear_scan_min(e.heights, i, j));
    CHECK(idx.range_min(i, i) == e.heights[i]);
  }
}

TEST_CASE("tree distance") {
  const ContourIndex tri = build_contour_index(tent());
  CHECK(tri.tree_distance(0.0, 0.5) == 1.0);
  CHECK(tri.tree_distance(0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(tri.tree_distance(0.0, 2.0), std::invalid_argument);

  Rng rng(2);
  const ContourIndex idx = build_contour_index(sample_normalized_excursion(4000, rng));
  for (int q = 0; q < 1000; ++q) {
    const double s = rng.uniform(), t = rng.uniform(), u = rng.uniform();
    const double st = idx.tree_distance(s, t), tu = idx.tree_distance(t, u), su = idx.tree_distance(s, u);
    CHECK(st >= 0.0);
    CHECK(st == idx.tree_distance(t, s));
    CHECK(su <= st + tu + 1e-12);
    CHECK(idx.tree_distance(s, s) == 0.0);
  }
}

TEST_CASE("ball occupation") {
  Rng rng(3);
  const Excursion e = sample_normalized_excursion(800, rng);
  const ContourIndex idx = build_contour_index(e);
  const double hmax = *std::max_element(e.heights.begin(), e.heights.end());
  for (int q = 0; q < 50; ++q) {
    const auto i = static_cast<std::size_t>(rng.uniform() * 800.0);
    CHECK(idx.ball_occupation_at(i, 0.0) >= e.dt);
    CHECK(idx.ball_occupation_at(i, 2.0 * hmax) == rel(1.0));
    double prev = 0.0;
    for (double r : {0.01, 0.05, 0.1, 0.3, 0.6}) {
      const double occ = idx.ball_occupation_at(i, r);
      CHECK(occ == rel(scan_occupation(e, i, r), 1e-12));
      CHECK(occ >= prev);
      prev = occ;
    }
  }
  CHECK_THROWS_AS(idx.ball_occupation(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("Bismut two-sided occupations") {
  Rng rng(4);
  const std::vector<double> grid{1e-4, 0.5, 1.0};
  for (int i = 0; i < 200; ++i) {
    const BismutDraw d = bismut_sample(2.0, grid, 1e-3, rng);
    CHECK(d.left_occ[0] < 1e-3);
    CHECK(d.left_occ[0] <= d.left_occ[1]);
    CHECK(d.right_occ[1] <= d.right_occ[2]);
  }
  CHECK_THROWS_AS(bismut_sample(0.5, grid, 1e-3, rng), std::invalid_argument);

  const std::vector<double> unit{1.0};
  std::vector<double> left, exit, lap;
  Rng a(5), b(6);
  for (int i = 0; i < 10000; ++i) {
    const BismutDraw d = bismut_sample(2.0, unit, 1e-3, a);
    left.push_back(d.left_occ[0]);
    exit.push_back(first_exit_time(1.0, 1e-3, b));
  }
  CHECK(ks_statistic(left, exit).below());
  Rng c(7);
  for (int i = 0; i < 20000; ++i) {
    const BismutDraw d = bismut_sample(2.0, unit, 1e-3, c);
    lap.push_back(std::exp(-(d.left_occ[0] + d.right_occ[0])));
  }
  const Summary s = summarize(lap);
  const double sech = oracle::exit_laplace(1.0, 1.0);
  CHECK(std::abs(s.mean - sech * sech) <= 3.0 * s.se);
}

TEST_CASE("typical density fraction is a proportion and uses the k gauge domain") {
  Rng rng(8);
  const ContourIndex idx = build_contour_index(sample_normalized_excursion(20000, rng));
  const std::vector<double> grid{0.1, 0.05, 0.025};
  const double f = typical_density_fraction(idx, grid, 0.5, 200, rng);
  CHECK((f >= 0.0 && f <= 1.0));
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(typical_density_fraction(idx, bad, 0.5, 10, rng), std::domain_error);
}
