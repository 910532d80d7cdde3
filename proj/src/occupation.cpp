#include "bsnake/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bsnake/packing.hpp"

namespace bsnake {

void OccupationMeasure::add(std::span<const double> x, double weight, double time) {
  if (x.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("atom has wrong dimension");
  if (!(weight > 0.0)) throw std::invalid_argument("atom weight must be positive");
  points.insert(points.end(), x.begin(), x.end());
  weights.push_back(weight);
  times.push_back(time);
  total_mass += weight;
}

void OccupationMeasure::append(const OccupationMeasure& other) {
  if (other.empty()) return;
  if (other.dim != dim) throw std::invalid_argument("cannot merge clouds of different dimension");
  points.insert(points.end(), other.points.begin(), other.points.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  if (other.times.size() == other.weights.size()) {
    times.resize(weights.size() - other.weights.size(), 0.0);
    times.insert(times.end(), other.times.begin(), other.times.end());
  }
  total_mass += other.total_mass;
}

std::size_t SpatialIndex::KeyHash::operator()(const std::vector<std::int64_t>& key) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::int64_t v : key) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

SpatialIndex::SpatialIndex(OccupationMeasure cloud, double cell) : cloud_(std::move(cloud)), cell_(cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("cell size must be positive");
  const std::size_t n = cloud_.size();
  std::vector<std::vector<std::int64_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = cell_of(cloud_.point(i));
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && keys[order_[j]] == keys[order_[i]]) ++j;
    buckets_.emplace(keys[order_[i]], Range{i, j});
    i = j;
  }
}

std::vector<std::int64_t> SpatialIndex::cell_of(std::span<const double> x) const {
  std::vector<std::int64_t> key(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) key[k] = static_cast<std::int64_t>(std::floor(x[k] / cell_));
  return key;
}

template <class Visit>
void SpatialIndex::visit_candidates(std::span<const double> lo, std::span<const double> hi, Visit&& visit) const {
  if (buckets_.empty()) return;
  const std::size_t d = lo.size();
  auto visit_range = [&](const Range& range) {
    for (std::size_t p = range.begin; p < range.end; ++p) {
      if (!visit(order_[p])) return false;
    }
    return true;
  };
  const double reach = std::max(*std::max_element(hi.begin(), hi.end()), -*std::min_element(lo.begin(), lo.end()));
  if (!std::isfinite(reach) || reach / cell_ > 1e15) {
    for (const auto& entry : buckets_) {
      if (!visit_range(entry.second)) return;
    }
    return;
  }
  const auto first = cell_of(lo);
  const auto last = cell_of(hi);
  double cells = 1.0;
  for (std::size_t k = 0; k < d; ++k) cells *= static_cast<double>(last[k] - first[k] + 1);

  if (cells > static_cast<double>(buckets_.size())) {
    // Query box covers more cells than exist: scan the occupied buckets.
    for (const auto& [key, range] : buckets_) {
      bool inside = true;
      for (std::size_t k = 0; k < d && inside; ++k) inside = key[k] >= first[k] && key[k] <= last[k];
      if (inside && !visit_range(range)) return;
    }
    return;
  }
  std::vector<std::int64_t> key = first;
  for (;;) {
    if (auto it = buckets_.find(key); it != buckets_.end()) {
      if (!visit_range(it->second)) return;
    }
    std::size_t k = 0;
    for (; k < d; ++k) {
      if (key[k] < last[k]) {
        ++key[k];
        break;
      }
      key[k] = first[k];
    }
    if (k == d) return;
  }
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void check_query(const OccupationMeasure& cloud, std::span<const double> x, double r) {
  if (x.size() != static_cast<std::size_t>(cloud.dim)) throw std::invalid_argument("query point has wrong dimension");
  if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
}

}  // namespace

double SpatialIndex::ball_mass(std::span<const double> x, double r) const {
  check_query(cloud_, x, r);
  if (r == 0.0 || cloud_.empty()) return 0.0;
  std::vector<double> lo(x.begin(), x.end()), hi(x.begin(), x.end());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= r;
    hi[k] += r;
  }
  const double r2 = r * r;
  double mass = 0.0;
  visit_candidates(lo, hi, [&](std::size_t i) {
    if (squared_distance(cloud_.point(i), x) < r2) mass += cloud_.weights[i];
    return true;
  });
  return mass;
}

double SpatialIndex::closed_ball_mass(std::span<const double> x, double r) const {
  check_query(cloud_, x, r);
  if (cloud_.empty()) return 0.0;
  std::vector<double> lo(x.begin(), x.end()), hi(x.begin(), x.end());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= r;
    hi[k] += r;
  }
  const double r2 = r * r;
  double mass = 0.0;
  visit_candidates(lo, hi, [&](std::size_t i) {
    if (squared_distance(cloud_.point(i), x) <= r2) mass += cloud_.weights[i];
    return true;
  });
  return mass;
}

double SpatialIndex::box_mass(std::span<const double> center, double half_width) const {
  check_query(cloud_, center, half_width);
  if (cloud_.empty()) return 0.0;
  std::vector<double> lo(center.begin(), center.end()), hi(center.begin(), center.end());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= half_width;
    hi[k] += half_width;
  }
  double mass = 0.0;
  visit_candidates(lo, hi, [&](std::size_t i) {
    const auto p = cloud_.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] < lo[k] || p[k] >= hi[k]) return true;
    }
    mass += cloud_.weights[i];
    return true;
  });
  return mass;
}

bool SpatialIndex::hits_closed_ball(std::span<const double> x, double r) const {
  check_query(cloud_, x, r);
  if (cloud_.empty()) return false;
  std::vector<double> lo(x.begin(), x.end()), hi(x.begin(), x.end());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    lo[k] -= r;
    hi[k] += r;
  }
  const double r2 = r * r;
  bool hit = false;
  visit_candidates(lo, hi, [&](std::size_t i) {
    hit = squared_distance(cloud_.point(i), x) <= r2;
    return !hit;
  });
  return hit;
}

SpatialIndex build_spatial_index(OccupationMeasure cloud, double cell) {
  return SpatialIndex(std::move(cloud), cell);
}

bool range_hits_ball(const SpatialIndex& index, std::span<const double> x, double r) {
  return index.hits_closed_ball(x, r);
}

DensityProfile density_profile(const SpatialIndex& index, std::span<const double> x, std::span<const double> r_grid,
                               const Gauge& gauge) {
  if (r_grid.empty()) throw std::invalid_argument("r_grid must be nonempty");
  for (std::size_t i = 1; i < r_grid.size(); ++i) {
    if (!(r_grid[i] < r_grid[i - 1])) throw std::invalid_argument("r_grid must be strictly decreasing");
  }
  DensityProfile profile;
  profile.radii.assign(r_grid.begin(), r_grid.end());
  for (double r : r_grid) {
    const double gr = gauge(r);  // throws std::domain_error outside the gauge domain
    profile.ratios.push_back(index.ball_mass(x, r) / gr);
  }
  profile.min_ratio = *std::min_element(profile.ratios.begin(), profile.ratios.end());
  return profile;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_cloud_csv(std::ostream& out, const OccupationMeasure& cloud) {
  out << "# dim=" << cloud.dim << " dt=" << format_double(cloud.dt) << '\n';
  out << 't';
  for (int k = 1; k <= cloud.dim; ++k) out << ",x" << k;
  out << ",weight\n";
  const bool has_times = cloud.times.size() == cloud.size();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out << format_double(has_times ? cloud.times[i] : 0.0);
    for (double c : cloud.point(i)) out << ',' << format_double(c);
    out << ',' << format_double(cloud.weights[i]) << '\n';
  }
}

OccupationMeasure read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# dim=", 0) != 0) {
    throw std::runtime_error("cloud CSV: missing '# dim=<d> dt=<dt>' header line");
  }
  OccupationMeasure cloud;
  {
    std::istringstream head(line.substr(2));
    std::string field;
    while (head >> field) {
      if (field.rfind("dim=", 0) == 0) cloud.dim = std::stoi(field.substr(4));
      else if (field.rfind("dt=", 0) == 0) cloud.dt = std::stod(field.substr(3));
    }
  }
  if (cloud.dim < 1) throw std::runtime_error("cloud CSV: dim must be >= 1");
  if (!std::getline(in, line)) throw std::runtime_error("cloud CSV: missing column header");
  std::vector<double> row;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    row.clear();
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != static_cast<std::size_t>(cloud.dim) + 2) {
      throw std::runtime_error("cloud CSV: wrong column count on line " + std::to_string(lineno));
    }
    cloud.add(std::span<const double>(row).subspan(1, static_cast<std::size_t>(cloud.dim)), row.back(), row.front());
  }
  return cloud;
}

void write_cloud_csv_file(const std::string& path, const OccupationMeasure& cloud) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_cloud_csv(out, cloud);
}

OccupationMeasure read_cloud_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_cloud_csv(in);
}

}  // namespace bsnake
