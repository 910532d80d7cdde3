#include "suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bsnake/hitting.hpp"
#include "bsnake/kernel.hpp"
#include "bsnake/occupation.hpp"
#include "bsnake/packing.hpp"
#include "bsnake/palm.hpp"
#include "bsnake/parallel.hpp"
#include "bsnake/rng.hpp"
#include "bsnake/snake.hpp"
#include "bsnake/stats.hpp"
#include "bsnake/tree.hpp"
#include "oracles.hpp"

namespace bsnake::suites {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBlock = 1024;

// FNV-1a of "suite:purpose"; streams of a purpose are base + block.
std::uint64_t stream_base(const std::string& suite, const std::string& purpose) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : suite + ":" + purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h << 16;
}

struct Ctx {
  const ParamSet& p;
  const ExperimentConfig& cfg;
  SuiteReport& report;

  std::size_t scaled(const std::string& key) const {
    const double v = std::llround(static_cast<double>(p.count(key)) * p.real("scale"));
    return static_cast<std::size_t>(std::max(2.0, v));
  }
  Rng rng(const std::string& purpose) const { return Rng(cfg.seed, stream_base(report.suite, purpose)); }

  // n draws in blocks of kBlock, each block on its own stream, merged in block order.
  template <class Draw>
  auto replicate(const std::string& purpose, std::size_t n, Draw draw) const {
    using T = std::invoke_result_t<Draw&, Rng&>;
    const std::uint64_t base = stream_base(report.suite, purpose);
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    auto parts = parallel_map(blocks, cfg.threads, [&](std::size_t b) {
      Rng rng(cfg.seed, base + b);
      std::vector<T> out;
      const std::size_t hi = std::min(n, (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < hi; ++i) out.push_back(draw(rng));
      return out;
    });
    std::vector<T> all;
    all.reserve(n);
    for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
    return all;
  }

  void add(Check c) const { report.checks.push_back(std::move(c)); }
};

std::vector<double> map_values(const std::vector<double>& v, double (*f)(double, double), double arg) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i], arg);
  return out;
}

double laplace_term(double x, double lambda) { return std::exp(-lambda * x); }

Check within_3se(std::string name, const Summary& s, double target, std::string reference) {
  return check_close(std::move(name), s.mean, target, 3.0 * s.se, std::move(reference));
}

Check ks_check(std::string name, const KsResult& ks, std::string reference) {
  return check_at_most(std::move(name), ks.distance, ks.critical, std::move(reference), true);
}

// 1
void run_exit_laplace(const Ctx& c) {
  const double r = c.p.real("r"), lambda = c.p.real("lambda"), dt = c.p.real("dt");
  const auto theta = c.replicate("theta", c.scaled("n"), [&](Rng& rng) { return first_exit_time(r, dt, rng); });
  c.add(within_3se("laplace", summarize(map_values(theta, laplace_term, lambda)), oracle::exit_laplace(r, lambda),
                   "1/cosh(r sqrt(2 lambda))"));
  const double mean_target = oracle::exit_mean_by_differentiation(r);
  c.add(check_close("mean", summarize(theta).mean, mean_target, 0.02 * mean_target, "-d/dlambda of the Laplace transform"));
}

// 2
void run_ciesielski_taylor(const Ctx& c) {
  const double r = c.p.real("r"), dt = c.p.real("dt");
  const std::size_t n = c.scaled("n");
  const auto occ = c.replicate("occupation", n, [&](Rng& rng) { return bessel3_occupation(r, dt, rng); });
  const auto exit = c.replicate("exit", n, [&](Rng& rng) { return first_exit_time(r, dt, rng); });
  c.add(ks_check("ks_occupation_vs_exit", ks_statistic(occ, exit), "two-sample KS, 5% critical value"));
}

// 3
void run_pitman(const Ctx& c) {
  const double t = c.p.real("t"), dt = c.p.real("dt");
  const auto x = c.replicate("marginal", c.scaled("n"), [&](Rng& rng) {
    return sample_bessel3(t, dt, rng).values.back() / std::sqrt(t);
  });
  c.add(ks_check("ks_vs_maxwell", ks_statistic(x, oracle::maxwell_cdf), "Maxwell CDF, 5% critical value"));
  const Summary s = summarize(x);
  c.add(within_3se("mean", s, oracle::maxwell_mean(), "2 sqrt(2/pi)"));
}

// 4
void run_bismut(const Ctx& c) {
  const double a = c.p.real("a"), r = c.p.real("r"), lambda = c.p.real("lambda"), dt = c.p.real("dt");
  const std::vector<double> grid{r};
  const auto v = c.replicate("bismut", c.scaled("n"), [&](Rng& rng) {
    const BismutDraw d = bismut_sample(a, grid, dt, rng);
    return std::exp(-lambda * (d.left_occ[0] + d.right_occ[0]));
  });
  const double e = oracle::exit_laplace(r, lambda);
  c.add(within_3se("laplace_two_sided", summarize(v), e * e, "cosh(r sqrt(2 lambda))^-2"));
}

// 5
void run_fluctuation(const Ctx& c) {
  const double s_min = c.p.real("s_min"), lambda = c.p.real("lambda");
  ItoWindow window;
  window.s_min = s_min;
  window.max_steps = c.p.count("max_steps");
  const auto v = c.replicate("durations", c.scaled("n"), [&](Rng& rng) {
    const TruncatedItoSample s = sample_ito_excursion(s_min, s_min / 100.0, rng, window);
    return -std::expm1(-lambda * s.excursion.duration());
  });
  const double mass = ito_tail_mass(s_min);
  const double truncated = mass * summarize(v).mean;
  const double quad = oracle::fluctuation_by_quadrature(lambda, s_min, kInf);
  c.add(check_close("truncated", truncated, quad, 0.02 * quad, "quadrature of (1-e^{-lambda t}) c t^-3/2 over [s_min, inf)"));
  const double total = truncated + oracle::fluctuation_by_quadrature(lambda, 0.0, s_min);
  const double target = std::sqrt(lambda / 2.0);
  c.add(check_close("total", total, target, 0.02 * target, "sqrt(lambda/2)"));
}

// 6
void run_covariance(const Ctx& c) {
  const std::size_t steps = c.p.count("n_steps"), n_pairs = c.p.count("pairs");
  const int dim = static_cast<int>(c.p.count("dim"));
  Rng life_rng = c.rng("lifetime");
  const Excursion H = sample_normalized_excursion(steps, life_rng);
  Rng pair_rng = c.rng("pairs");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> dH;
  while (pairs.size() < n_pairs) {
    const auto i = static_cast<std::size_t>(pair_rng.uniform() * static_cast<double>(H.heights.size()));
    const auto j = static_cast<std::size_t>(pair_rng.uniform() * static_cast<double>(H.heights.size()));
    const double d = H.heights[i] + H.heights[j] - 2.0 * oracle::linear_scan_min(H.heights, i, j);
    if (d < 1e-6) continue;
    pairs.emplace_back(i, j);
    dH.push_back(d);
  }
  const std::vector<double> origin(static_cast<std::size_t>(dim), 0.0);
  const auto sq = c.replicate("snakes", c.scaled("replicas"), [&](Rng& rng) {
    const SnakeRealization s = sample_snake_head(H, origin, rng);
    std::vector<double> out;
    for (const auto& [i, j] : pairs) {
      for (int k = 0; k < dim; ++k) {
        const double diff = s.point(i)[static_cast<std::size_t>(k)] - s.point(j)[static_cast<std::size_t>(k)];
        out.push_back(diff * diff);
      }
    }
    return out;
  });
  double worst = 0.0;
  const auto d = static_cast<std::size_t>(dim);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    for (std::size_t k = 0; k < d; ++k) {
      double sum = 0.0;
      for (const auto& row : sq) sum += row[q * d + k];
      const double var = sum / static_cast<double>(sq.size());
      worst = std::max(worst, std::abs(var - dH[q]) / dH[q]);
    }
  }
  c.add(check_at_most("max_relative_error", worst, c.p.real("tol"), "per-coordinate variance vs d_H(s,t)"));
}

// 7
void run_first_moment(const Ctx& c) {
  const double s_min = c.p.real("s_min"), a = c.p.real("radius"), D = c.p.real("distance");
  constexpr int dim = 5;
  ItoWindow window;
  window.s_min = s_min;
  window.max_steps = c.p.count("max_steps");
  const std::vector<double> origin(dim, 0.0);
  const auto v = c.replicate("snakes", c.scaled("n"), [&](Rng& rng) {
    const TruncatedItoSample s = sample_ito_excursion(s_min, s_min / 100.0, rng, window);
    const SnakeRealization snake = sample_snake_head(s.excursion, origin, rng);
    double total = 0.0;
    for_each_occupation_atom(snake, [&](std::span<const double> x, double w, double) {
      double r2 = (x[0] - D) * (x[0] - D);
      for (int k = 1; k < dim; ++k) r2 += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
      if (r2 < a * a) total += w;
    });
    return total;
  });
  const Summary s = summarize(v);
  const double mass = ito_tail_mass(s_min);
  RadialFunction f;
  f.kind = RadialFunction::Kind::indicator;
  f.radius = a;
  // The indicator of B(D e1, a) seen from 0 equals the centered indicator seen from D e1.
  const double estimate = mass * s.mean + short_excursion_first_moment(f, D, dim, s_min);
  const double target = oracle::green_ball_5d(D, a);
  c.add(check_close("first_moment", estimate, target, c.p.real("tol") * target, "Green integral over the ball, d = 5"));
  c.add(report_only(check_close("mc_standard_error", mass * s.se, 0.0, kInf, "")));
}

// 8
void run_stable(const Ctx& c) {
  const double alpha = c.p.real("alpha"), scale = c.p.real("speed"), lambda = c.p.real("lambda");
  const auto v = c.replicate("stable", c.scaled("n"), [&](Rng& rng) {
    return std::exp(-lambda * sample_stable(alpha, scale, rng).value);
  });
  c.add(within_3se("laplace", summarize(v), std::exp(-scale * std::pow(lambda, alpha)), "exp(-scale lambda^alpha)"));
}

// 9
void run_shorokhod(const Ctx& c) {
  const double level = c.p.real("tail_level");
  // The analytic tail is increasing; bisect in log x.
  double lo = 1e-6, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (shorokhod_tail(mid) < level ? lo : hi) = mid;
  }
  const double x = std::sqrt(lo * hi);
  const double speed = std::pow(128.0, 0.25);
  const auto v = c.replicate("stable", c.scaled("n"), [&](Rng& rng) {
    return sample_stable(0.25, speed, rng).value <= x ? 1.0 : 0.0;
  });
  const double ratio = summarize(v).mean / shorokhod_tail(x);
  c.add(check_close("tail_ratio", ratio, 1.0, c.p.real("tol"), "C11 x^{1/6} exp(-(x/C12)^{-1/3})"));
  c.add(report_only(check_close("x", x, x, 0.0, "shorokhod_tail(x) = tail_level")));
}

// 10
void run_escape(const Ctx& c) {
  const double R = c.p.real("R"), lambda = c.p.real("lambda");
  const auto v = c.replicate("laplace", c.scaled("n"), [&](Rng& rng) { return std::exp(-lambda * escape_time(R, rng)); });
  c.add(within_3se("laplace", summarize(v), std::exp(-R * std::sqrt(2.0 * lambda)), "exp(-R sqrt(2 lambda))"));
  const double r1 = c.p.real("R1"), r2 = c.p.real("R2");
  const std::size_t m = c.scaled("n_ks");
  const auto sum = c.replicate("sum", m, [&](Rng& rng) {
    const double g1 = escape_time(r1, rng);
    return g1 + escape_time(r2, rng);
  });
  const auto one = c.replicate("single", m, [&](Rng& rng) { return escape_time(r1 + r2, rng); });
  c.add(ks_check("ks_additivity", ks_statistic(sum, one), "gamma(R1) + gamma'(R2) = gamma(R1 + R2) in law"));
}

// 11
void run_dyadic(const Ctx& c) {
  const auto dims = c.p.reals("dims");
  const int max_level = static_cast<int>(c.p.integer("max_level"));
  const std::size_t samples = c.p.count("samples");
  struct Counts {
    double prop1 = 0, prop2 = 0, prop3 = 0, coincr = 0;
  };
  const auto counts = c.replicate("points", samples, [&](Rng& rng) {
    Counts v;
    const int d = static_cast<int>(dims[static_cast<std::size_t>(rng.uniform() * static_cast<double>(dims.size()))]);
    const int n = static_cast<int>(rng.uniform() * (max_level + 1));
    const auto du = static_cast<std::size_t>(d);
    std::vector<double> x(du);
    for (auto& xi : x) xi = 4.0 * rng.uniform() - 2.0;
    const int p = dyadic_offset(d);
    const DyadicCell cell = small_cube_of(x, n);
    if (!cell.small_cube_contains(x)) v.prop1 += 1;
    // Prop (1): no other small cube of the level contains x.
    std::vector<int> e(du, -1);
    for (;;) {
      bool zero = true;
      for (int k : e) zero = zero && k == 0;
      if (!zero) {
        DyadicCell other = cell;
        for (std::size_t k = 0; k < du; ++k) other.index[k] += e[k];
        if (other.small_cube_contains(x)) v.prop1 += 1;
      }
      std::size_t k = 0;
      while (k < du && e[k] == 1) e[k++] = -1;
      if (k == du) break;
      ++e[k];
    }
    // Prop (2): the small cube lies within its half-diagonal of y, and the closed
    // ball of radius sqrt(d) times the spacing around y lies in the large cube.
    const std::vector<double> y = cell.center();
    const double s = cell.spacing();
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<double> z(du), w(du);
      double zn = 0.0, gn = 0.0;
      for (std::size_t k = 0; k < du; ++k) {
        z[k] = y[k] + s * (rng.uniform() - 0.5);
        zn += (z[k] - y[k]) * (z[k] - y[k]);
        w[k] = rng.normal();
        gn += w[k] * w[k];
      }
      if (std::sqrt(zn) > 0.5 * s * std::sqrt(d) * (1.0 + 1e-12)) v.prop2 += 1;
      const double rad = s * std::sqrt(d) * std::pow(rng.uniform(), 1.0 / d);
      for (std::size_t k = 0; k < du; ++k) {
        w[k] = y[k] + rad * w[k] / std::sqrt(gn);
      }
      if (!cell.large_cube_contains(w)) v.prop2 += 1;
    }
    // Prop (3) and the coincr inequalities for locate_cell at a log-uniform r.
    const double r_max = 1.0 / (2.0 * d);
    const double r = r_max * std::exp2(-static_cast<double>(n) - rng.uniform());
    const DyadicCell located = locate_cell(x, r);
    const int m = located.level;
    if (!located.small_cube_contains(x)) v.prop3 += 1;
    const std::vector<double> yc = located.center();
    const double side = located.side();
    for (std::size_t mask = 0; mask < (std::size_t{1} << du); ++mask) {
      double dist = 0.0;
      for (std::size_t k = 0; k < du; ++k) {
        const double corner = yc[k] + ((mask >> k) & 1U ? 0.5 : -0.5) * side;
        dist += (corner - x[k]) * (corner - x[k]);
      }
      if (!(std::sqrt(dist) < r)) v.prop3 += 1;
    }
    const double upper = std::exp2(-m) * std::sqrt(d) * (1.0 + std::exp2(-p));
    if (!(0.5 * upper < r && r <= upper)) v.coincr += 1;
    return v;
  });
  Counts total;
  for (const auto& v : counts) {
    total.prop1 += v.prop1;
    total.prop2 += v.prop2;
    total.prop3 += v.prop3;
    total.coincr += v.coincr;
  }
  c.add(check_at_most("prop1_violations", total.prop1, 0.0, "small cubes of a level are disjoint and cover"));
  c.add(check_at_most("prop2_violations", total.prop2, 0.0, "D_n(y) within B(y, s sqrt(d)/2); B(y, s sqrt(d)) in large cube"));
  c.add(check_at_most("prop3_violations", total.prop3, 0.0, "x in the located small cube, large cube inside B(x, r)"));
  c.add(check_at_most("coincr_violations", total.coincr, 0.0, "(1+2^-p) sqrt(d) 2^-n / 2 < r <= (1+2^-p) sqrt(d) 2^-n"));
}

// 12
void run_packing(const Ctx& c) {
  const std::size_t max_centers = c.p.count("max_centers");
  const int levels = static_cast<int>(c.p.count("levels"));
  const std::vector<Gauge> gauges{Gauge::packing_g(), Gauge::tree_k(), Gauge::power(2.0)};
  struct Outcome {
    double greedy = 0.0, exact = 0.0;
  };
  const auto outcomes = c.replicate("instances", c.scaled("instances"), [&](Rng& rng) {
    const int dims[] = {2, 3, 5};
    const int d = dims[static_cast<std::size_t>(rng.uniform() * 3.0)];
    const auto m = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_centers));
    const Gauge& gauge = gauges[static_cast<std::size_t>(rng.uniform() * 3.0)];
    const double eps = 0.05 + 0.25 * rng.uniform();
    const double side = 3.0 * eps * std::pow(static_cast<double>(m), 1.0 / d);
    std::vector<double> centers(m * static_cast<std::size_t>(d));
    for (auto& v : centers) v = side * rng.uniform();
    PackingOptions opts;
    opts.levels = levels;
    Outcome o;
    o.greedy = epsilon_packing(centers, d, eps, gauge, opts);
    o.exact = oracle::exhaustive_packing(centers, d, eps, [&](double r) { return gauge(r); }, levels);
    return o;
  });
  double above = 0.0, below_half = 0.0, worst = kInf;
  for (const auto& o : outcomes) {
    if (o.greedy > o.exact * (1.0 + 1e-12)) above += 1;
    if (o.greedy < 0.5 * o.exact) below_half += 1;
    if (o.exact > 0.0) worst = std::min(worst, o.greedy / o.exact);
  }
  c.add(check_at_most("greedy_above_exhaustive", above, 0.0, "greedy <= exhaustive supremum"));
  c.add(check_at_most("greedy_below_half", below_half, 0.0, "greedy >= exhaustive / 2"));
  c.add(report_only(check_at_least("worst_ratio", worst, 0.5, "min greedy / exhaustive")));
}

// 13
void run_hitting_scaling(const Ctx& c) {
  const double r = c.p.real("r"), s0 = c.p.real("s0");
  const auto dim = static_cast<std::size_t>(c.p.count("dim"));
  const std::size_t n = c.scaled("n");
  HittingOptions opts;
  opts.max_steps = c.p.count("max_steps");
  auto estimate = [&](const std::string& purpose, double radius, const std::vector<double>& shift) {
    std::vector<double> x(shift), y(shift);
    y[0] += 2.0 * radius;
    const double s_min = s0 * std::pow(radius, 4);
    const auto hits = c.replicate(purpose, n, [&](Rng& rng) {
      return truncated_snake_hits(y, x, radius, s_min, rng, opts) ? 1.0 : 0.0;
    });
    double k = 0.0;
    for (double h : hits) k += h;
    return hitting_from_counts(static_cast<std::size_t>(k), n, s_min);
  };
  const std::vector<double> zero(dim, 0.0);
  const HittingEstimate small = estimate("small", r, zero);
  const HittingEstimate large = estimate("large", 2.0 * r, zero);
  const double ratio = (r * r * small.value) / (4.0 * r * r * large.value);
  c.add(check_close("scaling_ratio", ratio, 1.0, c.p.real("tol"), "u_{x,r}(y) = r^-2 u(r^-1 (y - x))"));
  std::vector<double> shift(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) shift[k] = 0.3 * std::cos(static_cast<double>(k + 1));
  const HittingEstimate moved = estimate("shifted", r, shift);
  c.add(check_close("translation", moved.value, small.value, 3.0 * std::hypot(moved.se, small.se),
                    "u_{x+v,r}(y+v) = u_{x,r}(y)"));
  c.add(report_only(check_close("u_small", small.value, small.value, small.se, "truncated estimate at r")));
  c.add(report_only(check_close("u_large", large.value, large.value, large.se, "truncated estimate at 2r")));
}

// 14
void run_mild_equation(const Ctx& c) {
  RadialFunction f;
  f.kind = RadialFunction::parse_kind(c.p.text("f"));
  f.radius = c.p.real("radius");
  f.height = c.p.real("height");
  MildOptions opts;
  opts.dim = static_cast<int>(c.p.count("dim"));
  opts.max_steps = c.p.count("max_steps");
  opts.first_stream = stream_base(c.report.suite, "replicas");
  opts.threads = c.cfg.threads;
  const auto grid = c.p.reals("grid");
  const MildReport m = check_mild_equation(f, grid, c.p.real("s_min"), c.scaled("n"), c.cfg.seed, opts);
  c.add(check_at_most("max_residual", m.max_residual, c.p.real("tol"), "|u + 2G(u^2) - Gf| / Gf"));
  for (std::size_t i = 0; i < m.radii.size(); ++i) {
    std::ostringstream name;
    name << "lhs_at_" << format_double(m.radii[i]);
    c.add(report_only(check_close(name.str(), m.lhs[i], m.rhs[i], c.p.real("tol") * m.rhs[i], "Gf")));
  }
}

// 15
void run_kappa(const Ctx& c) {
  KappaConfig k;
  k.dim = static_cast<int>(c.p.count("dim"));
  k.a = c.p.real("a");
  k.s_min = c.p.real("s_min");
  k.max_steps = c.p.count("max_steps");
  k.r_grid = c.p.reals("r_grid");
  k.replicas = c.scaled("replicas");
  k.seed = c.cfg.seed ^ stream_base(c.report.suite, "palm");
  k.threads = c.cfg.threads;
  const KappaReport rep = kappa_experiment(k);
  c.add(check_at_least("fraction_above_half_lower", rep.fraction_above_half_lower, c.p.real("gate_fraction"),
                       "share of grid minima > 2^-11"));
  c.add(report_only(check_at_least("fraction_above_lower", rep.fraction_above_lower, c.p.real("gate_fraction"), "> 2^-10")));
  c.add(report_only(check_at_least("fraction_below_upper", rep.fraction_below_upper, c.p.real("gate_fraction"), "< 27/2")));
  c.add(report_only(check_at_least("min", rep.min, rep.lower_bracket, "lower bracket 2^-10")));
  c.add(report_only(check_at_least("q1", rep.q1, rep.lower_bracket, "lower bracket 2^-10")));
  c.add(report_only(check_at_most("median", rep.median, rep.upper_bracket, "upper bracket 27/2")));
  c.add(report_only(check_at_most("q3", rep.q3, rep.upper_bracket, "upper bracket 27/2")));
}

// 16
void run_box_dimension(const Ctx& c) {
  Rng rng = c.rng("ise");
  const SnakeRealization ise = sample_ise(c.p.count("n_steps"), static_cast<int>(c.p.count("dim")), rng);
  const auto eps = c.p.reals("eps");
  const BoxDimension box = range_box_dimension(ise, eps);
  c.add(report_only(check_close("slope", box.slope, 3.75, 0.75, "dim_Box(R) <= 4; report window [3, 4.5]")));
  for (std::size_t i = 0; i < box.eps.size(); ++i) {
    c.add(report_only(check_at_least("cells_at_" + format_double(box.eps[i]), box.counts[i], 1.0, "occupied cells")));
  }
}

void run_upperbound(const Ctx& c) {
  const int n = static_cast<int>(c.p.integer("level"));
  const double r = upperbound_radius(n);
  const double s_min = c.p.real("s_min_factor") * std::pow(2.0 * r, 4);
  const double lambda = 1.0 / (32.0 * std::pow(2.0 * r, 4));
  UpperboundOptions opts;
  opts.sample_events = false;
  opts.s_cap = 50.0 / lambda;  // exp(-50) is far below the Monte Carlo error
  const auto v = c.replicate("subordinator", c.scaled("n"), [&](Rng& rng) {
    return std::exp(-lambda * upperbound_statistic(n, s_min, s_min / 100.0, rng, opts).S);
  });
  c.add(within_3se("s_laplace", summarize(v), oracle::truncated_s_laplace(r, lambda, s_min),
                   "exp(-2r sqrt(8 Phi)), Phi truncated at s_min"));
  UpperboundOptions full;
  full.max_steps = c.p.count("event_max_steps");
  full.horizon_factor = c.p.real("horizon_factor");
  full.s_cap = 2.0 * kShorokhodC12;  // above every bound (27/2) g(r), so E and V are unaffected
  for (int level = 4; level <= 6; ++level) {
    const double rl = upperbound_radius(level);
    const double sl = c.p.real("event_s_min_factor") * std::pow(rl, 4);
    const auto ev = c.replicate("events_" + std::to_string(level), c.scaled("event_n"), [&](Rng& rng) {
      return upperbound_statistic(level, sl, sl / 100.0, rng, full).E ? 1.0 : 0.0;
    });
    c.add(report_only(check_at_most("P(E)_n" + std::to_string(level), summarize(ev).mean, 1.0, "non-increasing in n")));
  }
}

void run_palm(const Ctx& c) {
  const double a = c.p.real("a"), s_min = c.p.real("s_min"), s_max = c.p.real("s_max");
  PalmOptions opts;
  opts.s_max = s_max;
  opts.keep_cloud = false;
  opts.max_steps = c.p.count("max_steps");
  struct Totals {
    double count = 0.0, mass = 0.0;
  };
  const auto t = c.replicate("palm", c.scaled("n"), [&](Rng& rng) {
    const PalmCloud pc = sample_palm_cloud(a, s_min, s_min / 100.0, 5, rng, opts);
    Totals v;
    v.count = static_cast<double>(pc.decorations.size());
    for (const auto& d : pc.decorations) v.mass += d.duration;
    return v;
  });
  std::vector<double> counts, masses;
  for (const auto& v : t) {
    counts.push_back(v.count);
    masses.push_back(v.mass);
  }
  const double c_int = oracle::ito_tail_by_quadrature(s_min) - oracle::ito_tail_by_quadrature(s_max);
  c.add(within_3se("decoration_count", summarize(counts), 4.0 * a * c_int, "4 a N(s_min <= sigma < s_max)"));
  c.add(within_3se("decoration_mass", summarize(masses), 4.0 * a * oracle::duration_mean_by_quadrature(s_min, s_max),
                   "4 a N(sigma; s_min <= sigma < s_max)"));
}

using Runner = void (*)(const Ctx&);

SuiteInfo make(std::string name, std::string summary, std::map<std::string, std::string> defaults, Runner run) {
  defaults.emplace("scale", "1");
  return SuiteInfo{std::move(name), std::move(summary), std::move(defaults),
                   [run](const ParamSet& p, const ExperimentConfig& cfg, SuiteReport& report) { run(Ctx{p, cfg, report}); }};
}

std::vector<SuiteInfo> build_registry() {
  std::vector<SuiteInfo> r;
  r.push_back(make("exit_laplace", "exit time of [-r, r]: Laplace transform and mean",
                   {{"n", "100000"}, {"dt", "0.001"}, {"r", "1"}, {"lambda", "1"}}, run_exit_laplace));
  r.push_back(make("ciesielski_taylor", "Bessel(3) ball occupation vs linear exit time",
                   {{"n", "10000"}, {"dt", "0.001"}, {"r", "1"}}, run_ciesielski_taylor));
  r.push_back(make("pitman", "B - 2I at time t vs the Maxwell law", {{"n", "10000"}, {"dt", "0.001"}, {"t", "1"}}, run_pitman));
  r.push_back(make("bismut", "two-sided Bessel occupation Laplace transform",
                   {{"n", "20000"}, {"dt", "0.001"}, {"a", "2"}, {"r", "1"}, {"lambda", "1"}}, run_bismut));
  r.push_back(make("fluctuation", "N(1 - exp(-lambda sigma)) truncated and total",
                   {{"n", "100000"}, {"s_min", "0.01"}, {"lambda", "1"}, {"max_steps", "256"}}, run_fluctuation));
  r.push_back(make("covariance", "snake head variances vs tree distance",
                   {{"n_steps", "2000"}, {"replicas", "2000"}, {"pairs", "50"}, {"dim", "3"}, {"tol", "0.15"}},
                   run_covariance));
  r.push_back(make("first_moment", "N<M, 1_B> vs the Green integral, d = 5",
                   {{"n", "200000"}, {"s_min", "0.01"}, {"radius", "0.3"}, {"distance", "1"}, {"max_steps", "4096"},
                    {"tol", "0.1"}},
                   run_first_moment));
  r.push_back(make("stable", "stable(1/4) Laplace transform",
                   {{"n", "100000"}, {"alpha", "0.25"}, {"speed", "3.3635856610148585"}, {"lambda", "1"}}, run_stable));
  r.push_back(make("shorokhod", "stable(1/4) lower tail vs the analytic tail",
                   {{"n", "1000000"}, {"tail_level", "0.001"}, {"tol", "0.25"}}, run_shorokhod));
  r.push_back(make("escape", "escape process Laplace transform and additivity",
                   {{"n", "100000"}, {"R", "1"}, {"lambda", "1"}, {"n_ks", "10000"}, {"R1", "0.4"}, {"R2", "1"}},
                   run_escape));
  r.push_back(make("dyadic", "dyadic cube decomposition checks",
                   {{"samples", "10000"}, {"dims", "5,6,7"}, {"max_level", "10"}}, run_dyadic));
  r.push_back(make("packing", "greedy packing vs exhaustive supremum",
                   {{"instances", "2000"}, {"max_centers", "12"}, {"levels", "3"}}, run_packing));
  r.push_back(make("hitting_scaling", "hitting probability scaling and translation",
                   {{"n", "20000"}, {"r", "0.5"}, {"s0", "0.01"}, {"dim", "5"}, {"max_steps", "16384"}, {"tol", "0.15"}},
                   run_hitting_scaling));
  r.push_back(make("mild_equation", "residual of u + 2G(u^2) = Gf on a radial grid",
                   {{"n", "10000"}, {"s_min", "0.01"}, {"f", "indicator"}, {"radius", "0.3"}, {"height", "1"},
                    {"grid", "0,0.1,0.2,0.35,0.5"}, {"dim", "5"}, {"max_steps", "4096"}, {"tol", "0.15"}},
                   run_mild_equation));
  r.push_back(make("kappa", "grid-minimum density ratios at Palm origins",
                   {{"replicas", "200"}, {"a", "0.5"}, {"s_min", "1e-8"}, {"max_steps", "64"},
                    {"r_grid", "0.25,0.125,0.0625,0.03125"}, {"dim", "5"}, {"gate_fraction", "0.9"}},
                   run_kappa));
  r.push_back(make("box_dimension", "box-counting slope of an ISE range, d = 5",
                   {{"n_steps", "1000000"}, {"dim", "5"}, {"eps", "0.4,0.283,0.2"}}, run_box_dimension));
  r.push_back(make("upperbound", "subordinator S and the events E along r_n",
                   {{"n", "20000"}, {"level", "5"}, {"s_min_factor", "0.001"}, {"event_n", "100"},
                    {"event_s_min_factor", "0.01"}, {"event_max_steps", "128"}, {"horizon_factor", "25"}},
                   run_upperbound));
  r.push_back(make("palm", "Palm decoration counts and masses",
                   {{"n", "2000"}, {"a", "1"}, {"s_min", "0.01"}, {"s_max", "1"}, {"max_steps", "64"}}, run_palm));
  return r;
}

}  // namespace

const std::vector<SuiteInfo>& registry() {
  static const std::vector<SuiteInfo> suites = build_registry();
  return suites;
}

const SuiteInfo& find_suite(const std::string& name) {
  for (const auto& s : registry()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown suite '" + name + "'");
}

SuiteReport run_suite(const ExperimentConfig& config) {
  const SuiteInfo& info = find_suite(config.suite);
  const ParamSet params(info.name, info.defaults, config.params);
  SuiteReport report;
  report.suite = info.name;
  report.seed = config.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    info.run(params, config, report);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(info.name + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(info.name + ": " + e.what());
  }
  report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace bsnake::suites
