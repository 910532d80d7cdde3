#include "bsnake/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace bsnake {

Gauge::Gauge(std::string name, std::function<double(double)> fn, double r_max)
    : name_(std::move(name)), fn_(std::move(fn)), r_max_(r_max) {}

Gauge Gauge::packing_g() {
  return Gauge("g",
               [](double r) {
                 const double ll = std::log(std::log(1.0 / r));
                 return std::pow(r, 4) / (ll * ll * ll);
               },
               std::exp(-1.0));
}

Gauge Gauge::tree_k() {
  return Gauge("k", [](double r) { return r * r / std::log(std::log(1.0 / r)); }, std::exp(-1.0));
}

Gauge Gauge::power(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("power gauge exponent must be positive");
  return Gauge("power:" + format_double(alpha), [alpha](double r) { return std::pow(r, alpha); },
               std::numeric_limits<double>::infinity());
}

Gauge Gauge::parse(std::string_view spec) {
  if (spec == "g") return packing_g();
  if (spec == "k") return tree_k();
  if (spec.rfind("power:", 0) == 0) {
    const std::string tail(spec.substr(6));
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tail.size() || tail.empty()) throw std::invalid_argument("bad power gauge: " + std::string(spec));
    return power(alpha);
  }
  throw std::invalid_argument("unknown gauge: " + std::string(spec));
}

double Gauge::operator()(double r) const {
  if (!in_domain(r)) {
    throw std::domain_error("gauge " + name_ + " evaluated outside (0, " + format_double(r_max_) +
                            "): r = " + format_double(r));
  }
  return fn_(r);
}

double gauge_value(const Gauge& gauge, double r) { return gauge(r); }

int dyadic_offset(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return static_cast<int>(std::floor(std::log2(4.0 * std::sqrt(static_cast<double>(d)))));
}

int cell_level(double r, int d) {
  if (!(r > 0.0)) throw std::invalid_argument("cell_level: r must be positive");
  const int p = dyadic_offset(d);
  const double v = (1.0 + std::ldexp(1.0, -p)) * std::sqrt(static_cast<double>(d)) / r;
  int n = static_cast<int>(std::floor(std::log2(v)));
  // Guard the floor against rounding in log2 so that the bracketing holds exactly.
  while (std::ldexp(1.0, n + 1) <= v) ++n;
  while (std::ldexp(1.0, n) > v) --n;
  return n;
}

double DyadicCell::spacing() const { return std::ldexp(1.0, -level - offset); }
double DyadicCell::side() const { return std::ldexp(1.0, -level); }

std::vector<double> DyadicCell::center() const {
  std::vector<double> y(index.size());
  const double s = spacing();
  for (std::size_t j = 0; j < index.size(); ++j) y[j] = static_cast<double>(index[j]) * s;
  return y;
}

namespace {

bool in_half_open_cube(std::span<const double> x, const std::vector<double>& center, double half) {
  if (x.size() != center.size()) throw std::invalid_argument("point has wrong dimension");
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < center[j] - half || x[j] >= center[j] + half) return false;
  }
  return true;
}

}  // namespace

bool DyadicCell::small_cube_contains(std::span<const double> x) const {
  return in_half_open_cube(x, center(), 0.5 * spacing());
}

bool DyadicCell::large_cube_contains(std::span<const double> x) const {
  return in_half_open_cube(x, center(), 0.5 * side());
}

DyadicCell small_cube_of(std::span<const double> x, int level) {
  DyadicCell cell;
  cell.level = level;
  cell.offset = dyadic_offset(static_cast<int>(x.size()));
  const double inv = std::ldexp(1.0, level + cell.offset);
  cell.index.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) cell.index[j] = static_cast<std::int64_t>(std::floor(x[j] * inv + 0.5));
  return cell;
}

DyadicCell locate_cell(std::span<const double> x, double r) {
  const int d = static_cast<int>(x.size());
  if (d < 1) throw std::invalid_argument("locate_cell: empty point");
  if (!(r > 0.0 && r <= 1.0 / (2.0 * d))) throw std::invalid_argument("locate_cell: need 0 < r <= 1/(2d)");
  return small_cube_of(x, cell_level(r, d));
}

namespace {

/// Hash grid over chosen balls; any two balls of radius <= eps that can
/// intersect have centers in adjacent cells of side 2 eps.
class BallGrid {
 public:
  explicit BallGrid(double cell) : cell_(cell) {}

  bool disjoint_from_all(std::span<const double> c, double r) const {
    std::vector<std::int64_t> key = key_of(c);
    std::vector<std::int64_t> probe(key.size());
    const std::size_t d = key.size();
    std::vector<int> off(d, -1);
    for (;;) {
      for (std::size_t k = 0; k < d; ++k) probe[k] = key[k] + off[k];
      if (auto it = cells_.find(probe); it != cells_.end()) {
        for (std::size_t id : it->second) {
          double s = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double diff = centers_[id * d + k] - c[k];
            s += diff * diff;
          }
          const double reach = radii_[id] + r;
          if (s <= reach * reach) return false;
        }
      }
      std::size_t k = 0;
      for (; k < d; ++k) {
        if (off[k] < 1) {
          ++off[k];
          break;
        }
        off[k] = -1;
      }
      if (k == d) return true;
    }
  }

  void add(std::span<const double> c, double r) {
    const std::size_t id = radii_.size();
    centers_.insert(centers_.end(), c.begin(), c.end());
    radii_.push_back(r);
    cells_[key_of(c)].push_back(id);
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
      std::uint64_t h = 1469598103934665603ULL;
      for (auto v : key) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ULL;
      return static_cast<std::size_t>(h);
    }
  };

  std::vector<std::int64_t> key_of(std::span<const double> c) const {
    std::vector<std::int64_t> key(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) key[k] = static_cast<std::int64_t>(std::floor(c[k] / cell_));
    return key;
  }

  double cell_;
  std::vector<double> centers_;
  std::vector<double> radii_;
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> cells_;
};

}  // namespace

double epsilon_packing(std::span<const double> centers, int dim, double eps, const Gauge& gauge,
                       const PackingOptions& options) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (options.levels < 1) throw std::invalid_argument("packing needs at least one radius level");
  const auto d = static_cast<std::size_t>(dim);
  if (centers.size() % d != 0) throw std::invalid_argument("center list is not a multiple of dim");
  (void)gauge(eps);  // domain check
  const std::size_t n = centers.size() / d;
  if (n == 0) return 0.0;

  auto center = [&](std::size_t i) { return centers.subspan(i * d, d); };
  BallGrid chosen(2.0 * eps);
  std::vector<char> used(n, 0);
  double total = 0.0;

  for (int j = 0; j < options.levels; ++j) {
    const double r = std::ldexp(eps, -j);
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i] && chosen.disjoint_from_all(center(i), r)) open.push_back(i);
    }
    if (open.empty()) continue;
    // Conflict degree among the open candidates at this radius.
    std::vector<std::size_t> degree(open.size(), 0);
    {
      OccupationMeasure pts;
      pts.dim = dim;
      for (std::size_t i : open) pts.add(center(i), 1.0);
      const SpatialIndex grid(std::move(pts), 2.0 * r);
      for (std::size_t q = 0; q < open.size(); ++q) {
        // Atoms within distance <= 2r conflict; subtract the candidate itself.
        const double m = grid.closed_ball_mass(center(open[q]), 2.0 * r);
        degree[q] = static_cast<std::size_t>(std::llround(m)) - 1;
      }
    }
    std::vector<std::size_t> order(open.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return degree[a] < degree[b]; });
    const double value = gauge(r);
    for (std::size_t q : order) {
      const std::size_t i = open[q];
      if (chosen.disjoint_from_all(center(i), r)) {
        chosen.add(center(i), r);
        used[i] = 1;
        total += value;
      }
    }
  }
  return total;
}

double epsilon_packing(const SpatialIndex& index, const std::function<bool(std::span<const double>)>& keep, double eps,
                       const Gauge& gauge, const PackingOptions& options) {
  const auto& cloud = index.cloud();
  std::vector<double> centers;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto x = cloud.point(i);
    if (!keep || keep(x)) centers.insert(centers.end(), x.begin(), x.end());
  }
  return epsilon_packing(centers, cloud.dim, eps, gauge, options);
}

CubeStatistic cube_statistic(const SpatialIndex& index, int n, double A, double kappa2) {
  if (!(A > 0.0)) throw std::invalid_argument("cube_statistic: A must be positive");
  if (n < 0) throw std::invalid_argument("cube_statistic: level must be >= 0");
  if (std::ldexp(1.0, -n) > 1.0 / (2.0 * A)) throw std::invalid_argument("cube_statistic: need 2^-n <= 1/(2A)");
  const auto& cloud = index.cloud();
  const int d = cloud.dim;
  const int p = dyadic_offset(d);
  const Gauge g = Gauge::packing_g();
  const double side = std::ldexp(1.0, -n);
  const double term = g(std::sqrt(static_cast<double>(d)) * (1.0 + std::ldexp(1.0, -p)) * side);
  const double threshold = kappa2 * g(side);

  CubeStatistic out;
  out.regime_warning = !(A > 100.0);
  // Small cubes tile space, so the range meets D*_n(y) iff an atom rounds to y.
  std::vector<std::vector<std::int64_t>> hit;
  hit.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) hit.push_back(small_cube_of(cloud.point(i), n).index);
  std::sort(hit.begin(), hit.end());
  hit.erase(std::unique(hit.begin(), hit.end()), hit.end());

  for (auto& idx : hit) {
    DyadicCell cell{n, p, std::move(idx)};
    const auto y = cell.center();
    double norm2 = 0.0;
    for (double c : y) norm2 += c * c;
    const double norm = std::sqrt(norm2);
    if (norm < 1.0 / A || norm > A) continue;
    ++out.hit_cells;
    if (index.box_mass(y, 0.5 * side) <= threshold) {
      ++out.counted_cells;
      out.value += term;
    }
  }
  return out;
}

double default_kappa2(int d, double kappa1) {
  const Gauge g = Gauge::packing_g();
  const int p = dyadic_offset(d);
  const double small = 0.5 * std::ldexp(1.0, -7 - p) * std::sqrt(static_cast<double>(d));
  return kappa1 * g(small) / g(std::ldexp(1.0, -7));
}

}  // namespace bsnake
