#include "bsnake/palm.hpp"

#include <algorithm>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "bsnake/packing.hpp"
#include "bsnake/parallel.hpp"

namespace bsnake {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t poisson_count(double mean, Rng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::poisson_distribution<long long> law(mean);
  return static_cast<std::size_t>(law(rng.engine()));
}

std::vector<double> sorted_uniform_times(std::size_t k, double horizon, Rng& rng) {
  std::vector<double> t(k);
  for (auto& v : t) v = horizon * rng.uniform();
  std::sort(t.begin(), t.end());
  return t;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-10);
}

}  // namespace

PalmCloud sample_palm_cloud(double a, double s_min, double dt, int dim, Rng& rng, const PalmOptions& options,
                            const DecorationVisitor& visit) {
  if (!(a > 0.0)) throw std::invalid_argument("Palm horizon a must be positive");
  if (!(s_min > 0.0)) throw std::invalid_argument("s_min must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  const auto d = static_cast<std::size_t>(dim);

  PalmCloud out;
  out.a = a;
  out.s_min = s_min;
  out.cloud.dim = dim;
  out.cloud.dt = dt;

  const double rate = 4.0 * ito_window_mass(s_min, options.s_max);
  const std::vector<double> births = sorted_uniform_times(poisson_count(rate * a, rng), a, rng);

  // Backbone on its grid merged with the birth times, so roots are exact BM values.
  const double want = options.backbone_dt > 0.0 ? options.backbone_dt : a / 1024.0;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(a / want)));
  const double step = a / static_cast<double>(steps);
  out.backbone.dim = dim;
  out.backbone.dt = step;
  out.backbone.values.assign(d, 0.0);
  std::vector<double> pos(d, 0.0);
  std::vector<std::vector<double>> roots;
  roots.reserve(births.size());
  double now = 0.0;
  std::size_t next_grid = 1;
  std::size_t next_birth = 0;
  while (next_grid <= steps || next_birth < births.size()) {
    const double grid_t = next_grid <= steps ? step * static_cast<double>(next_grid) : a;
    const bool birth_first = next_birth < births.size() && (next_grid > steps || births[next_birth] < grid_t);
    const double t = birth_first ? births[next_birth] : grid_t;
    const double sd = std::sqrt(std::max(0.0, t - now));
    for (auto& c : pos) c += sd * rng.normal();
    now = t;
    if (birth_first) {
      roots.push_back(pos);
      ++next_birth;
    } else {
      out.backbone.values.insert(out.backbone.values.end(), pos.begin(), pos.end());
      ++next_grid;
    }
  }

  ItoWindow window;
  window.s_min = s_min;
  window.s_max = options.s_max;
  window.max_steps = options.max_steps;
  out.decorations.reserve(births.size());
  for (std::size_t j = 0; j < births.size(); ++j) {
    const TruncatedItoSample sample = sample_ito_excursion(s_min, dt, rng, window);
    const SnakeRealization snake = sample_snake_head(sample.excursion, roots[j], rng);
    Decoration deco;
    deco.birth = births[j];
    deco.root = roots[j];
    deco.duration = sample.excursion.duration();
    deco.steps = sample.excursion.steps();
    if (visit) visit(deco, snake);
    if (options.keep_cloud) out.cloud.append(occupation_cloud(snake));
    out.decorations.push_back(std::move(deco));
  }
  return out;
}

SbmOccupation sample_sbm_occupation(std::span<const InitialAtom> initial, double s_min, double dt, Rng& rng,
                                    const SbmOptions& options) {
  if (!(s_min > 0.0)) throw std::invalid_argument("s_min must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  SbmOccupation out;
  out.initial.assign(initial.begin(), initial.end());
  if (initial.empty()) return out;
  const int dim = static_cast<int>(initial.front().point.size());
  out.cloud.dim = dim;
  out.cloud.dt = dt;
  const double rate = ito_window_mass(s_min, options.s_max);
  ItoWindow window;
  window.s_min = s_min;
  window.s_max = options.s_max;
  window.max_steps = options.max_steps;
  for (const auto& atom : initial) {
    if (static_cast<int>(atom.point.size()) != dim || dim < 1) throw std::invalid_argument("initial atoms must share a dimension");
    if (!(atom.mass > 0.0)) throw std::invalid_argument("initial masses must be positive");
    const std::size_t k = poisson_count(atom.mass * rate, rng);
    for (std::size_t j = 0; j < k; ++j) {
      const TruncatedItoSample sample = sample_ito_excursion(s_min, dt, rng, window);
      SnakeRealization snake = sample_snake_head(sample.excursion, atom.point, rng);
      out.cloud.append(occupation_cloud(snake));
      if (options.keep_excursions) out.excursions.push_back(std::move(snake));
    }
  }
  return out;
}

double escape_time(double R, Rng& rng) {
  if (!(R >= 0.0)) throw std::invalid_argument("escape_time: R must be >= 0");
  if (R == 0.0) return 0.0;
  return sample_stable(0.5, R * std::sqrt(2.0), rng).value;
}

double upperbound_radius(int n) {
  if (n < 2) throw std::invalid_argument("upperbound_radius: n must be >= 2");
  return std::pow(1.0 / std::log(static_cast<double>(n)), n);
}

UpperboundSample upperbound_statistic(int n, double s_min, double dt, Rng& rng, const UpperboundOptions& options) {
  if (n < 4) throw std::invalid_argument("upperbound_statistic: n must be >= 4 so that r_n < 1/e");
  if (options.dim < 3) throw std::invalid_argument("upperbound_statistic: dimension must be >= 3");
  if (!(s_min > 0.0) || !(dt > 0.0)) throw std::invalid_argument("s_min and dt must be positive");
  UpperboundSample out;
  out.n = n;
  out.r = upperbound_radius(n);
  out.bound = kShorokhodC12 * Gauge::packing_g()(out.r);
  const double r = out.r;
  out.gamma = escape_time(2.0 * r, rng);

  const double rate = 4.0 * ito_tail_mass(s_min);
  out.pre_count = poisson_count(rate * out.gamma, rng);
  for (std::size_t j = 0; j < out.pre_count && out.S < options.s_cap; ++j) {
    out.S += sample_ito_duration(s_min, std::numeric_limits<double>::infinity(), rng);
  }

  if (!options.sample_events) {
    out.V = out.S <= out.bound;
    return out;
  }
  const double horizon = options.horizon_factor * 4.0 * r * r;
  const std::vector<double> births = sorted_uniform_times(poisson_count(rate * horizon, rng), horizon, rng);
  out.post_count = births.size();
  const auto d = static_cast<std::size_t>(options.dim);
  std::vector<double> bm3(3, 0.0);
  std::vector<double> rest(d - 3);
  const double sg = std::sqrt(out.gamma);
  for (auto& c : rest) c = sg * rng.normal();

  ItoWindow window;
  window.s_min = s_min;
  window.max_steps = options.max_steps;
  std::vector<double> root(d, 0.0);
  const double r2 = r * r;
  double now = 0.0;
  for (double t : births) {
    const double sd = std::sqrt(t - now);
    now = t;
    for (auto& c : bm3) c += sd * rng.normal();
    for (auto& c : rest) c += sd * rng.normal();
    root[0] = 2.0 * r + std::sqrt(norm2(bm3));
    std::copy(rest.begin(), rest.end(), root.begin() + 3);
    const TruncatedItoSample sample = sample_ito_excursion(s_min, dt, rng, window);
    HeadWalker walker(root);
    for (double h : sample.excursion.heights) {
      walker.move_to(h, rng);
      if (norm2(walker.head()) <= r2) {
        out.E = false;
        break;
      }
    }
    if (!out.E) break;
  }
  out.V = out.E && out.S <= out.bound;
  return out;
}

double RadialFunction::operator()(double rho) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::indicator:
      return rho < radius ? height : 0.0;
    case Kind::bump: {
      if (rho >= radius) return 0.0;
      const double u = 1.0 - (rho / radius) * (rho / radius);
      return height * u * u;
    }
    case Kind::constant:
      return height;
  }
  return 0.0;
}

RadialFunction::Kind RadialFunction::parse_kind(const std::string& name) {
  if (name == "zero") return Kind::zero;
  if (name == "indicator") return Kind::indicator;
  if (name == "bump") return Kind::bump;
  if (name == "constant") return Kind::constant;
  throw std::invalid_argument("unknown radial function: " + name);
}

double radial_green(const RadialFunction& f, double rho, int dim) {
  if (dim < 3) throw std::invalid_argument("Green function needs d >= 3");
  if (!(rho >= 0.0)) throw std::invalid_argument("radius must be >= 0");
  const double dd = dim;
  const double coef = 2.0 / (dd - 2.0);
  const double a = f.radius;
  switch (f.kind) {
    case RadialFunction::Kind::zero:
      return 0.0;
    case RadialFunction::Kind::constant:
      throw std::invalid_argument("constant f is not integrable against the Green function");
    case RadialFunction::Kind::indicator:
      if (rho >= a) return coef * f.height * std::pow(a, dd) / dd * std::pow(rho, 2.0 - dd);
      return coef * f.height * (rho * rho / dd + 0.5 * (a * a - rho * rho));
    case RadialFunction::Kind::bump: {
      auto inner = [&](double s) { return f(s) * std::pow(s, dd - 1.0); };
      auto outer = [&](double s) { return f(s) * s; };
      const double split = std::min(rho, a);
      const double near = rho > 0.0 ? integrate(inner, 0.0, split) * std::pow(rho, 2.0 - dd) : 0.0;
      return coef * (near + integrate(outer, split, a));
    }
  }
  return 0.0;
}

double short_excursion_first_moment(const RadialFunction& f, double rho, int dim, double s) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(s >= 0.0)) throw std::invalid_argument("truncation must be >= 0");
  if (f.kind == RadialFunction::Kind::zero || s == 0.0) return 0.0;
  const double dd = dim;
  const double c = 1.0 / (2.0 * std::sqrt(2.0 * kPi));
  const double a = f.radius;
  // phi(h) = E f(|x + sqrt(h) Z|) with |x - c| = rho and Z standard in R^d.
  auto phi = [&](double h) {
    if (f.kind == RadialFunction::Kind::constant) return f.height;
    const double spread = std::sqrt(h) * (std::sqrt(dd) + 10.0);
    if (h <= 0.0 || spread < std::abs(rho - a)) return f(rho);
    const double nc = rho * rho / h;
    if (nc > 1e5) {
      // |x + sqrt(h) Z| is close to normal with mean rho + (d-1) h / (2 rho) and variance h.
      const double mean = rho + (dd - 1.0) * h / (2.0 * rho);
      if (f.kind == RadialFunction::Kind::indicator) {
        return f.height * 0.5 * std::erfc((mean - a) / std::sqrt(2.0 * h));
      }
      return f(mean);
    }
    const boost::math::non_central_chi_squared law(dd, nc);
    if (f.kind == RadialFunction::Kind::indicator) return f.height * boost::math::cdf(law, a * a / h);
    auto g = [&](double q) { return f(std::sqrt(h * q)) * boost::math::pdf(law, q); };
    return integrate(g, 0.0, a * a / h);
  };
  // Height at a uniform time of an excursion of duration w is sqrt(w) times a
  // Rayleigh variable with density 4z exp(-2z^2); with w = v^2 the measure
  // c w^{-3/2} w dw becomes 2c dv.
  auto over_z = [&](double v) {
    auto g = [&](double z) { return 4.0 * z * std::exp(-2.0 * z * z) * phi(v * z); };
    return integrate(g, 0.0, 6.0);
  };
  return 2.0 * c * integrate(over_z, 0.0, std::sqrt(s));
}

namespace {

/// Piecewise-linear u on the grid, constant below the first node and
/// decaying like rho^{2-d} beyond the last.
struct RadialTable {
  std::vector<double> nodes;
  std::vector<double> values;
  int dim = 5;

  double operator()(double rho) const {
    if (rho <= nodes.front()) return values.front();
    if (rho >= nodes.back()) return values.back() * std::pow(nodes.back() / rho, dim - 2.0);
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), rho);
    const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
    const double w = (rho - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
  }
};

/// G(u^2) at rho <= last node.
double green_of_square(const RadialTable& u, double rho) {
  const double dd = u.dim;
  const double coef = 2.0 / (dd - 2.0);
  std::vector<double> cuts{0.0};
  for (double x : u.nodes) if (x > 0.0) cuts.push_back(x);
  if (rho > 0.0) cuts.push_back(rho);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto g = [&](double s) {
      const double v = u(s);
      return v * v * std::pow(s, dd - 1.0) * std::pow(std::max(rho, s), 2.0 - dd);
    };
    total += integrate(g, cuts[k], cuts[k + 1]);
  }
  const double R = u.nodes.back();
  const double uR = u.values.back();
  total += uR * uR * std::pow(R, 2.0 * dd - 4.0) * std::pow(R, 6.0 - 2.0 * dd) / (2.0 * dd - 6.0);
  return coef * total;
}

}  // namespace

MildReport check_mild_equation(const RadialFunction& f, std::span<const double> radii, double s_min,
                               std::size_t n_replicas, std::uint64_t seed, const MildOptions& options) {
  if (f.kind == RadialFunction::Kind::constant) {
    throw std::invalid_argument("constant f is not integrable: the time-integrated equation is undefined");
  }
  if (options.dim < 4) throw std::invalid_argument("mild equation check needs d >= 4");
  if (radii.empty()) throw std::invalid_argument("radial grid must be nonempty");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= 0.0) || (k > 0 && !(radii[k] > radii[k - 1]))) {
      throw std::invalid_argument("radial grid must be nonnegative and strictly increasing");
    }
  }
  if (!(s_min > 0.0)) throw std::invalid_argument("s_min must be positive");
  if (n_replicas < 2) throw std::invalid_argument("need at least two replicas");
  if (f.kind != RadialFunction::Kind::zero && !(f.radius > 0.0)) throw std::invalid_argument("support radius must be positive");

  const std::size_t m = radii.size();
  MildReport out;
  out.radii.assign(radii.begin(), radii.end());
  out.u.assign(m, 0.0);
  out.u_se.assign(m, 0.0);
  out.remainder.assign(m, 0.0);
  out.lhs.assign(m, 0.0);
  out.rhs.assign(m, 0.0);
  out.residual.assign(m, 0.0);
  if (f.kind == RadialFunction::Kind::zero) return out;

  const int dim = options.dim;
  const double dt = options.dt > 0.0 ? options.dt : s_min / 100.0;
  ItoWindow window;
  window.s_min = s_min;
  window.max_steps = options.max_steps;
  const double mass = ito_tail_mass(s_min);

  const auto values = parallel_map(m * n_replicas, options.threads, [&](std::size_t id) {
    const std::size_t node = id / n_replicas;
    Rng rng(seed, options.first_stream + id);
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    x[0] = radii[node];
    const TruncatedItoSample sample = sample_ito_excursion(s_min, dt, rng, window);
    const SnakeRealization snake = sample_snake_head(sample.excursion, x, rng);
    double occ = 0.0;
    for_each_occupation_atom(snake, [&](std::span<const double> p, double w, double) { occ += w * f(std::sqrt(norm2(p))); });
    return -std::expm1(-occ);
  });

  for (std::size_t k = 0; k < m; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_replicas; ++i) mean += values[k * n_replicas + i];
    mean /= static_cast<double>(n_replicas);
    double var = 0.0;
    for (std::size_t i = 0; i < n_replicas; ++i) {
      const double e = values[k * n_replicas + i] - mean;
      var += e * e;
    }
    var /= static_cast<double>(n_replicas - 1);
    out.remainder[k] = short_excursion_first_moment(f, radii[k], dim, s_min);
    out.u[k] = mass * mean + out.remainder[k];
    out.u_se[k] = mass * std::sqrt(var / static_cast<double>(n_replicas));
    out.rhs[k] = radial_green(f, radii[k], dim);
  }
  const RadialTable table{out.radii, out.u, dim};
  for (std::size_t k = 0; k < m; ++k) {
    out.lhs[k] = out.u[k] + 2.0 * green_of_square(table, radii[k]);
    out.residual[k] = out.rhs[k] > 0.0 ? std::abs(out.lhs[k] - out.rhs[k]) / out.rhs[k]
                                       : (out.lhs[k] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    out.max_residual = std::max(out.max_residual, out.residual[k]);
  }
  return out;
}

KappaPoint kappa_point(const SpatialIndex& index, std::span<const double> r_grid) {
  const Gauge g = Gauge::packing_g();
  const std::vector<double> origin(static_cast<std::size_t>(index.cloud().dim), 0.0);
  const DensityProfile profile = density_profile(index, origin, r_grid, g);
  KappaPoint point;
  point.ratios = profile.ratios;
  point.min_ratio = profile.min_ratio;
  for (double r : r_grid) point.masses.push_back(index.ball_mass(origin, r));
  point.degenerate = !point.masses.empty() && point.masses.front() > 0.0 &&
                     std::all_of(point.masses.begin(), point.masses.end(),
                                 [&](double v) { return v == point.masses.front(); });
  return point;
}

std::vector<double> palm_ball_masses(double a, double s_min, double dt, int dim, std::span<const double> r_grid,
                                     Rng& rng, const PalmOptions& options) {
  std::vector<double> r2(r_grid.begin(), r_grid.end());
  for (auto& v : r2) v *= v;
  std::vector<double> masses(r_grid.size(), 0.0);
  PalmOptions opts = options;
  opts.keep_cloud = false;
  (void)sample_palm_cloud(a, s_min, dt, dim, rng, opts, [&](const Decoration&, const SnakeRealization& snake) {
    for_each_occupation_atom(snake, [&](std::span<const double> p, double w, double) {
      const double q = norm2(p);
      for (std::size_t k = 0; k < r2.size(); ++k) {
        if (q < r2[k]) masses[k] += w;
      }
    });
  });
  return masses;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * values[lo] + w * values[hi];
}

KappaReport kappa_experiment(const KappaConfig& config) {
  if (config.r_grid.empty()) throw std::invalid_argument("kappa: r_grid must be nonempty");
  if (config.replicas == 0) throw std::invalid_argument("kappa: replicas must be positive");
  const Gauge g = Gauge::packing_g();
  for (double r : config.r_grid) (void)g(r);  // every radius must lie in (0, 1/e)
  KappaReport report;
  report.config = config;
  report.dimension_warning = config.dim < 5;
  report.lower_bracket = std::ldexp(1.0, -10);
  report.upper_bracket = kShorokhodC12;
  const double dt = config.dt > 0.0 ? config.dt : config.s_min / 100.0;
  PalmOptions options;
  options.max_steps = config.max_steps;
  const auto all = parallel_map(config.replicas, config.threads, [&](std::size_t i) {
    Rng rng(config.seed, i);
    return palm_ball_masses(config.a, config.s_min, dt, config.dim, config.r_grid, rng, options);
  });
  for (const auto& masses : all) {
    KappaPoint point;
    point.masses = masses;
    for (std::size_t k = 0; k < masses.size(); ++k) point.ratios.push_back(masses[k] / g(config.r_grid[k]));
    point.min_ratio = *std::min_element(point.ratios.begin(), point.ratios.end());
    point.degenerate = masses.front() > 0.0 &&
                       std::all_of(masses.begin(), masses.end(), [&](double v) { return v == masses.front(); });
    report.min_ratios.push_back(point.min_ratio);
    report.points.push_back(std::move(point));
  }
  report.min = *std::min_element(report.min_ratios.begin(), report.min_ratios.end());
  report.q1 = quantile(report.min_ratios, 0.25);
  report.median = quantile(report.min_ratios, 0.5);
  report.q3 = quantile(report.min_ratios, 0.75);
  const double n = static_cast<double>(report.min_ratios.size());
  auto frac = [&](auto pred) {
    return static_cast<double>(std::count_if(report.min_ratios.begin(), report.min_ratios.end(), pred)) / n;
  };
  report.fraction_above_lower = frac([&](double v) { return v > report.lower_bracket; });
  report.fraction_above_half_lower = frac([&](double v) { return v > 0.5 * report.lower_bracket; });
  report.fraction_below_upper = frac([&](double v) { return v < report.upper_bracket; });
  return report;
}

void write_kappa_csv(std::ostream& out, const KappaReport& report) {
  out << "point_id,r,ratio\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    for (std::size_t k = 0; k < report.config.r_grid.size(); ++k) {
      out << i << ',' << format_double(report.config.r_grid[k]) << ',' << format_double(report.points[i].ratios[k])
          << '\n';
    }
  }
}

void write_kappa_json(std::ostream& out, const KappaReport& report) {
  const auto& c = report.config;
  out << "{\n";
  out << "  \"dim\": " << c.dim << ",\n";
  out << "  \"a\": " << format_double(c.a) << ",\n";
  out << "  \"s_min\": " << format_double(c.s_min) << ",\n";
  out << "  \"replicas\": " << c.replicas << ",\n";
  out << "  \"seed\": " << c.seed << ",\n";
  out << "  \"r_grid\": [";
  for (std::size_t k = 0; k < c.r_grid.size(); ++k) out << (k ? ", " : "") << format_double(c.r_grid[k]);
  out << "],\n";
  out << "  \"min\": " << format_double(report.min) << ",\n";
  out << "  \"q1\": " << format_double(report.q1) << ",\n";
  out << "  \"median\": " << format_double(report.median) << ",\n";
  out << "  \"q3\": " << format_double(report.q3) << ",\n";
  out << "  \"lower_bracket\": " << format_double(report.lower_bracket) << ",\n";
  out << "  \"upper_bracket\": " << format_double(report.upper_bracket) << ",\n";
  out << "  \"fraction_above_lower\": " << format_double(report.fraction_above_lower) << ",\n";
  out << "  \"fraction_above_half_lower\": " << format_double(report.fraction_above_half_lower) << ",\n";
  out << "  \"fraction_below_upper\": " << format_double(report.fraction_below_upper) << ",\n";
  out << "  \"dimension_warning\": " << (report.dimension_warning ? "true" : "false") << "\n";
  out << "}\n";
}

}  // namespace bsnake
