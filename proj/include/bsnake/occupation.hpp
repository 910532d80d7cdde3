#pragma once

// Weighted point clouds in R^d, a hash-grid spatial index, ball and box
// masses, range hitting queries and density-ratio profiles against gauges.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bsnake {

class Gauge;

/// Atoms (point, weight > 0) stored row-major; `times` optionally carries the
/// snake time of each atom for CSV export.
struct OccupationMeasure {
  int dim = 1;
  std::vector<double> points;
  std::vector<double> weights;
  std::vector<double> times;
  double total_mass = 0.0;
  double dt = 0.0;  // informational, written to the CSV header

  std::size_t size() const { return weights.size(); }
  bool empty() const { return weights.empty(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void add(std::span<const double> x, double weight, double time = 0.0);
  void append(const OccupationMeasure& other);
};

/// Hash grid over the atoms of a cloud. Every atom lives in exactly one bucket.
class SpatialIndex {
 public:
  SpatialIndex(OccupationMeasure cloud, double cell);

  const OccupationMeasure& cloud() const { return cloud_; }
  double cell() const { return cell_; }
  std::size_t bucket_count() const { return buckets_.size(); }

  /// Mass of the open ball B(x, r).
  double ball_mass(std::span<const double> x, double r) const;
  /// Mass of the closed ball.
  double closed_ball_mass(std::span<const double> x, double r) const;
  /// Mass of the half-open box prod [c_j - h, c_j + h).
  double box_mass(std::span<const double> center, double half_width) const;
  /// True iff some atom lies in the closed ball.
  bool hits_closed_ball(std::span<const double> x, double r) const;
  /// Cell coordinates of a point.
  std::vector<std::int64_t> cell_of(std::span<const double> x) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept;
  };
  struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  template <class Visit>
  void visit_candidates(std::span<const double> lo, std::span<const double> hi, Visit&& visit) const;

  OccupationMeasure cloud_;
  double cell_;
  std::vector<std::size_t> order_;  // atom ids grouped by bucket
  std::unordered_map<std::vector<std::int64_t>, Range, KeyHash> buckets_;
};

SpatialIndex build_spatial_index(OccupationMeasure cloud, double cell);

/// True iff the range (the atom set) meets the closed ball.
bool range_hits_ball(const SpatialIndex& index, std::span<const double> x, double r);

struct DensityProfile {
  std::vector<double> radii;
  std::vector<double> ratios;  // M(B(x, r)) / gauge(r)
  double min_ratio = 0.0;      // liminf proxy over the grid
};

/// Requires a strictly decreasing r_grid inside the gauge domain
/// (std::domain_error otherwise).
DensityProfile density_profile(const SpatialIndex& index, std::span<const double> x,
                               std::span<const double> r_grid, const Gauge& gauge);

// Cloud CSV: "# dim=<d> dt=<dt>" line, a header row t,x1..xd,weight, then rows.
void write_cloud_csv(std::ostream& out, const OccupationMeasure& cloud);
OccupationMeasure read_cloud_csv(std::istream& in);
void write_cloud_csv_file(const std::string& path, const OccupationMeasure& cloud);
OccupationMeasure read_cloud_csv_file(const std::string& path);

/// 17 significant digits; round-trips bit-exactly.
std::string format_double(double v);

}  // namespace bsnake
