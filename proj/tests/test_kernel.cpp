#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bsnake/kernel.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/stats.hpp"
#include "approx.hpp"
#include "oracles.hpp"

using namespace bsnake;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
std::vector<double> draws(std::size_t n, std::uint64_t stream, F f) {
  Rng rng(2024, stream);
  std::vector<double> v(n);
  for (auto& x : v) x = f(rng);
  return v;
}

std::vector<double> laplace(const std::vector<double>& v, double lambda) {
  std::vector<double> out;
  for (double x : v) out.push_back(std::exp(-lambda * x));
  return out;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.bits();
    CHECK(x == b.bits());
    CHECK(x != c.bits());
  }
  Rng u(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("brownian path: single step and unit variances") {
  Rng rng(1);
  const Path p = sample_brownian_path(1, 1.0, 1.0, rng);
  CHECK(p.size() == 2);
  CHECK(p.values[0] == 0.0);

  const auto inc = draws(100000, 1, [](Rng& r) { return sample_brownian_path(1, 1.0, 1.0, r).values[1]; });
  std::vector<double> sq;
  for (double x : inc) sq.push_back(x * x);
  const Summary s = summarize(sq);
  CHECK(std::abs(s.mean - 1.0) <= 3.0 * s.se);

  const auto norms = draws(100000, 2, [](Rng& r) {
    const Path q = sample_brownian_path(5, 1.0, 1.0, r);
    double n2 = 0.0;
    for (int k = 0; k < 5; ++k) n2 += q.point(1)[k] * q.point(1)[k];
    return n2;
  });
  const Summary t = summarize(norms);
  CHECK(std::abs(t.mean - 5.0) <= 3.0 * t.se);
  CHECK_THROWS_AS(sample_brownian_path(0, 1.0, 0.1, rng), std::invalid_argument);
}

TEST_CASE("normalized excursion: shape and functionals") {
  Rng rng(3);
  for (auto method : {ExcursionMethod::bessel_bridge, ExcursionMethod::vervaat}) {
    const Excursion e = sample_normalized_excursion(1000, rng, method);
    CHECK(e.heights.size() == 1001);
    CHECK(e.heights.front() == 0.0);
    CHECK(e.heights.back() == 0.0);
    CHECK(e.duration() == rel(1.0));
    for (std::size_t i = 1; i + 1 < e.heights.size(); ++i) CHECK(e.heights[i] > 0.0);
    CHECK_NOTHROW(validate_excursion(e));
  }

  // Oracle: Dyck paths by the cycle lemma, an independent discrete construction.
  double dyck_max = 0.0, dyck_area = 0.0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    const auto [m, a] = oracle::dyck_excursion_functionals(4000, 100 + static_cast<std::uint64_t>(i));
    dyck_max += m / reps;
    dyck_area += a / reps;
  }
  CHECK(dyck_max == rel(std::sqrt(kPi / 2.0), 0.03));
  CHECK(dyck_area == rel(std::sqrt(kPi / 8.0), 0.03));

  std::vector<double> maxima, areas;
  Rng ex(4);
  for (int i = 0; i < 10000; ++i) {
    const Excursion e = sample_normalized_excursion(10000, ex);
    double m = 0.0, a = 0.0;
    for (std::size_t k = 0; k < e.heights.size(); ++k) {
      m = std::max(m, e.heights[k]);
      if (k > 0) a += 0.5 * (e.heights[k] + e.heights[k - 1]) * e.dt;
    }
    maxima.push_back(m);
    areas.push_back(a);
  }
  CHECK(summarize(maxima).mean == rel(dyck_max, 0.04));
  CHECK(summarize(maxima).mean == rel(std::sqrt(kPi / 2.0), 0.02));
  CHECK(summarize(areas).mean == rel(std::sqrt(kPi / 8.0), 0.02));
}

TEST_CASE("vervaat excursion stays within 5% of the maximum law") {
  std::vector<double> maxima;
  Rng ex(5);
  for (int i = 0; i < 3000; ++i) {
    const Excursion e = sample_normalized_excursion(4000, ex, ExcursionMethod::vervaat);
    maxima.push_back(*std::max_element(e.heights.begin(), e.heights.end()));
  }
  CHECK(summarize(maxima).mean == rel(std::sqrt(kPi / 2.0), 0.05));
}

TEST_CASE("validate_excursion rejects malformed paths") {
  Excursion e;
  e.dt = 0.1;
  e.heights = {0.0, -0.1, 0.0};
  CHECK_THROWS_AS(validate_excursion(e), std::invalid_argument);
  e.heights = {0.0, 1.0, 0.5};
  CHECK_THROWS_AS(validate_excursion(e), std::invalid_argument);
  e.heights = {0.0};
  CHECK_THROWS_AS(validate_excursion(e), std::invalid_argument);
}

TEST_CASE("ito measure normalization against quadrature") {
  CHECK(ito_duration_density(1.0) == rel(oracle::ito_density_constant(), 1e-12));
  for (double t : {1e-4, 0.01, 1.0, 50.0}) {
    CHECK(ito_tail_mass(t) == rel(oracle::ito_tail_by_quadrature(t), 1e-8));
  }
  CHECK(ito_tail_mass(1.0 / (2.0 * kPi)) == rel(1.0, 1e-14));
  CHECK(ito_tail_mass(0.01) > ito_tail_mass(0.02));
  CHECK(oracle::fluctuation_by_quadrature(1.0, 0.0, std::numeric_limits<double>::infinity()) ==
        rel(std::sqrt(0.5), 1e-8));
  CHECK(oracle::fluctuation_by_quadrature(3.0, 0.0, std::numeric_limits<double>::infinity()) ==
        rel(std::sqrt(1.5), 1e-8));
}

TEST_CASE("truncated ito excursions") {
  Rng rng(6);
  const TruncatedItoSample s = sample_ito_excursion(0.01, 1e-4, rng);
  CHECK(s.mass == rel(std::pow(2.0 * kPi * 0.01, -0.5)));
  CHECK(s.excursion.duration() >= 0.01 * (1.0 - 1e-12));
  CHECK_NOTHROW(validate_excursion(s.excursion));
  CHECK_THROWS_AS(sample_ito_excursion(0.01, 1e-3, rng), std::invalid_argument);

  const double s_min = 0.5;
  const auto sig = draws(100000, 7, [&](Rng& r) { return sample_ito_duration(s_min, std::numeric_limits<double>::infinity(), r); });
  std::vector<double> above;
  for (double x : sig) {
    CHECK(x >= s_min);
    above.push_back(x > 2.0 * s_min ? 1.0 : 0.0);
  }
  const Summary a = summarize(above);
  CHECK(std::abs(a.mean - std::sqrt(0.5)) <= 3.0 * a.se);

  const auto win = draws(20000, 8, [&](Rng& r) { return sample_ito_duration(0.1, 1.0, r); });
  for (double x : win) CHECK((x >= 0.1 && x < 1.0));

  // N(1 - e^{-lambda sigma}; sigma >= s_min) against quadrature.
  ItoWindow w;
  w.s_min = 0.01;
  w.max_steps = 64;
  const auto fl = draws(40000, 9, [&](Rng& r) { return -std::expm1(-sample_ito_excursion(0.01, 1e-4, r, w).excursion.duration()); });
  const double mc = ito_tail_mass(0.01) * summarize(fl).mean;
  CHECK(mc == rel(oracle::fluctuation_by_quadrature(1.0, 0.01, std::numeric_limits<double>::infinity()), 0.02));
}

TEST_CASE("first exit time of [-r, r]") {
  const auto th = draws(20000, 10, [](Rng& r) { return first_exit_time(1.0, 1e-3, r); });
  CHECK(summarize(th).mean == rel(oracle::exit_mean_by_differentiation(1.0), 0.02));
  CHECK(oracle::exit_mean_by_differentiation(1.0) == rel(1.0, 1e-6));
  const Summary l = summarize(laplace(th, 1.0));
  CHECK(std::abs(l.mean - oracle::exit_laplace(1.0, 1.0)) <= 3.0 * l.se);

  const double r = 0.5;
  auto scaled = draws(10000, 11, [&](Rng& g) { return first_exit_time(r, 1e-3 * r * r, g) / (r * r); });
  auto unit = draws(10000, 12, [](Rng& g) { return first_exit_time(1.0, 1e-3, g); });
  CHECK(ks_statistic(scaled, unit).below());
}

TEST_CASE("bridge minimum lies below both endpoints") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.normal(), b = rng.normal();
    CHECK(sample_bridge_minimum(a, b, 0.1, rng) <= std::min(a, b));
  }
}

TEST_CASE("bessel(3) via Pitman's transform") {
  Rng rng(14);
  const Path p = sample_bessel3(1.0, 1e-3, rng);
  CHECK(p.values.front() == 0.0);
  for (double v : p.values) CHECK(v >= 0.0);

  const auto x = draws(10000, 15, [](Rng& r) { return sample_bessel3(1.0, 1e-3, r).values.back(); });
  CHECK(ks_statistic(x, oracle::maxwell_cdf).below());
  CHECK(summarize(x).mean == rel(oracle::maxwell_mean(), 0.02));
  CHECK(oracle::maxwell_mean() == rel(1.5958, 1e-4));
}

TEST_CASE("bessel(3) occupations and Ciesielski-Taylor") {
  Rng rng(16);
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
  for (int i = 0; i < 200; ++i) {
    const auto occ = bessel3_occupations(grid, 1e-3, rng);
    for (std::size_t k = 0; k < occ.size(); ++k) {
      CHECK(occ[k] >= 0.0);
      if (k > 0) CHECK(occ[k] >= occ[k - 1]);
    }
  }
  const auto occ = draws(10000, 17, [](Rng& r) { return bessel3_occupation(1.0, 1e-3, r); });
  const auto ext = draws(10000, 18, [](Rng& r) { return first_exit_time(1.0, 1e-3, r); });
  CHECK(ks_statistic(occ, ext).below());
}

TEST_CASE("positive stable laws") {
  const auto g = draws(100000, 19, [](Rng& r) { return sample_stable(0.5, std::sqrt(2.0), r).value; });
  for (double v : g) CHECK(v >= 0.0);
  const Summary lg = summarize(laplace(g, 1.0));
  CHECK(std::abs(lg.mean - std::exp(-std::sqrt(2.0))) <= 3.0 * lg.se);

  const double speed = std::pow(128.0, 0.25);
  const auto s = draws(100000, 20, [&](Rng& r) { return sample_stable(0.25, speed, r).value; });
  const Summary ls = summarize(laplace(s, 1.0));
  CHECK(std::abs(ls.mean - std::exp(-speed)) <= 3.0 * ls.se);
  CHECK(std::exp(-speed) == rel(0.03461, 1e-3));

  // Additivity: scales add.
  const auto sum = draws(10000, 21, [](Rng& r) {
    const double a = sample_stable(0.25, 0.7, r).value;
    return a + sample_stable(0.25, 1.3, r).value;
  });
  const auto one = draws(10000, 22, [](Rng& r) { return sample_stable(0.25, 2.0, r).value; });
  CHECK(ks_statistic(sum, one).below());

  // Scaling: stable(alpha, c) / c^{1/alpha} is stable(alpha, 1).
  const auto big = draws(10000, 23, [](Rng& r) { return sample_stable(0.5, 3.0, r).value / 9.0; });
  const auto unit = draws(10000, 24, [](Rng& r) { return sample_stable(0.5, 1.0, r).value; });
  CHECK(ks_statistic(big, unit).below());

  Rng rng(1);
  CHECK_THROWS_AS(sample_stable(1.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stable(0.5, 0.0, rng), std::invalid_argument);
}

TEST_CASE("Shorokhod tail") {
  CHECK(shorokhod_tail(1e-6) < 1e-100);
  CHECK(shorokhod_tail(kShorokhodC12) == rel(shorokhod_c11() * std::pow(13.5, 1.0 / 6.0) * std::exp(-1.0)));
  double lo = 1e-6, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    (shorokhod_tail(mid) < 1e-3 ? lo : hi) = mid;
  }
  const double x = lo;
  const double speed = std::pow(128.0, 0.25);
  const auto hits = draws(1000000, 25, [&](Rng& r) { return sample_stable(0.25, speed, r).value <= x ? 1.0 : 0.0; });
  CHECK(summarize(hits).mean / shorokhod_tail(x) == rel(1.0, 0.25));
}
