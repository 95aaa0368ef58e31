#include "revisit/partial_map.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "revisit/errors.hpp"

namespace revisit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinRange = 1e-6;

constexpr double kFar = 1e20;

// One-dimensional squared distance transform of sampled function f
// (Felzenszwalb & Huttenlocher lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d,
                           std::vector<long>& v, std::vector<double>& z) {
  const long n = static_cast<long>(f.size());
  if (n == 0) {
    return;
  }
  auto sq = [](long q) { return static_cast<double>(q) * static_cast<double>(q); };
  long k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (long q = 1; q < n; ++q) {
    double s = ((f[q] + sq(q)) - (f[v[k]] + sq(v[k]))) / static_cast<double>(2 * q - 2 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + sq(q)) - (f[v[k]] + sq(v[k]))) / static_cast<double>(2 * q - 2 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (long q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) {
      ++k;
    }
    d[q] = sq(q - v[k]) + f[v[k]];
  }
}

}  // namespace

bool is_inside(const OccupancyGrid& map, const Pose& pose) {
  const auto cell = map.cell_of(pose.x, pose.y);
  return cell && map.at(cell->col, cell->row) == Cell::kFree;
}

RayHit trace_ray(const OccupancyGrid& map, double x, double y, double angle, double max_range,
                 const std::function<bool(const CellIndex&, double)>& visit) {
  const double res = map.resolution();
  const double gx = (x - map.origin_x()) / res;
  const double gy = (y - map.origin_y()) / res;
  long col = static_cast<long>(std::floor(gx));
  long row = static_cast<long>(std::floor(gy));
  if (!map.in_bounds(col, row)) {
    throw DomainError("ray origin lies outside the grid");
  }

  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const long step_col = dx > 0.0 ? 1 : -1;
  const long step_row = dy > 0.0 ? 1 : -1;
  double t_max_x = dx > 0.0   ? (static_cast<double>(col + 1) - gx) / dx
                   : dx < 0.0 ? (gx - static_cast<double>(col)) / -dx
                              : kInf;
  double t_max_y = dy > 0.0   ? (static_cast<double>(row + 1) - gy) / dy
                   : dy < 0.0 ? (gy - static_cast<double>(row)) / -dy
                              : kInf;
  const double t_delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : kInf;
  const double t_delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : kInf;

  RayHit result;
  double t = 0.0;
  while (true) {
    const double distance = t * res;
    if (distance >= max_range) {
      result.range = max_range;
      return result;
    }
    const Cell cell = map.at(col, row);
    if (visit && !visit(CellIndex{col, row}, distance)) {
      result.range = std::max(distance, kMinRange);
      return result;
    }
    if (cell == Cell::kOccupied) {
      result.range = std::max(distance, kMinRange);
      result.hit = true;
      return result;
    }
    if (cell == Cell::kUnknown) {
      result.through_unknown = true;
    }
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      col += step_col;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      row += step_row;
    }
    if (!map.in_bounds(col, row)) {
      result.range = max_range;
      return result;
    }
  }
}

std::vector<RayHit> raycast_detailed(const OccupancyGrid& map, const Pose& pose,
                                     std::span<const double> bearings, double max_range) {
  if (!map.cell_of(pose.x, pose.y)) {
    throw DomainError("raycast pose lies outside the grid");
  }
  std::vector<RayHit> hits;
  hits.reserve(bearings.size());
  for (double bearing : bearings) {
    hits.push_back(trace_ray(map, pose.x, pose.y, pose.theta + bearing, max_range));
  }
  return hits;
}

RangeScan raycast(const OccupancyGrid& map, const Pose& pose, std::span<const double> bearings,
                  double max_range) {
  const auto hits = raycast_detailed(map, pose, bearings, max_range);
  RangeScan scan;
  scan.angles.assign(bearings.begin(), bearings.end());
  scan.max_range = max_range;
  scan.ranges.reserve(hits.size());
  for (const auto& h : hits) {
    scan.ranges.push_back(h.range);
  }
  return scan;
}

ScanString expected_scan_string(const OccupancyGrid& map, const Pose& pose,
                                const ExtractionParams& params, const ScanGeometry& geometry) {
  if (!is_inside(map, pose)) {
    throw DomainError("expected view requested for a pose outside the map");
  }
  const auto hits = raycast_detailed(map, pose, geometry.bearings, geometry.max_range);
  RangeScan scan;
  scan.angles = geometry.bearings;
  scan.max_range = geometry.max_range;
  scan.ranges.reserve(hits.size());
  for (const auto& h : hits) {
    scan.ranges.push_back(h.through_unknown ? geometry.max_range : h.range);
  }
  return extract_scan_string(scan, params);
}

ViewId expected_view(const OccupancyGrid& map, const Pose& pose, const ViewAlphabet& alphabet,
                     const ExtractionParams& params, const ScanGeometry& geometry) {
  return alphabet.lookup(expected_scan_string(map, pose, params, geometry));
}

void ScanLikelihoodParams::validate() const {
  if (!(sigma_hit > 0.0)) {
    throw DomainError("sigma_hit must be positive");
  }
  if (z_hit < 0.0 || z_rand < 0.0 || std::abs(z_hit + z_rand - 1.0) > 1e-9) {
    throw DomainError("z_hit and z_rand must be non-negative and sum to 1");
  }
  if (!(z_rand > 0.0)) {
    throw DomainError("z_rand must be positive to keep the likelihood strictly positive");
  }
  if (beam_stride == 0) {
    throw DomainError("beam_stride must be at least 1");
  }
  if (!(likelihood_exponent > 0.0) || likelihood_exponent > 1.0) {
    throw DomainError("likelihood_exponent must lie in (0, 1]");
  }
}

std::vector<double> distance_transform(const OccupancyGrid& map,
                                       const std::function<bool(Cell)>& is_obstacle) {
  const std::size_t w = map.width();
  const std::size_t h = map.height();
  std::vector<double> grid(w * h);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = is_obstacle(map.cells()[i]) ? 0.0 : kFar;
  }
  const std::size_t n = std::max(w, h);
  std::vector<double> f(n);
  std::vector<double> d(n);
  std::vector<long> v(n);
  std::vector<double> z(n + 1);

  // Columns (along rows index), then rows.
  f.resize(h);
  d.resize(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) {
      f[r] = grid[r * w + c];
    }
    distance_transform_1d(f, d, v, z);
    for (std::size_t r = 0; r < h; ++r) {
      grid[r * w + c] = d[r];
    }
  }
  f.resize(w);
  d.resize(w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      f[c] = grid[r * w + c];
    }
    distance_transform_1d(f, d, v, z);
    for (std::size_t c = 0; c < w; ++c) {
      grid[r * w + c] = d[c] >= 0.5 * kFar ? kInf : std::sqrt(d[c]);
    }
  }
  return grid;
}

LikelihoodField::LikelihoodField(const OccupancyGrid& map, const ScanLikelihoodParams& params)
    : map_(&map), params_(params) {
  params_.validate();
  // Only obstacle cells bordering non-obstacle space can return an echo, so
  // endpoints deep inside solid blocks are scored by their distance to the
  // block's surface.
  OccupancyGrid surface = map;
  const long width = static_cast<long>(map.width());
  const long height = static_cast<long>(map.height());
  for (long row = 0; row < height; ++row) {
    for (long col = 0; col < width; ++col) {
      if (map.at(col, row) != Cell::kOccupied) {
        continue;
      }
      bool exposed = false;
      for (const auto& [dc, dr] : {std::pair{1L, 0L}, {-1L, 0L}, {0L, 1L}, {0L, -1L}}) {
        const long c = col + dc;
        const long r = row + dr;
        if (c >= 0 && c < width && r >= 0 && r < height && map.at(c, r) != Cell::kOccupied) {
          exposed = true;
          break;
        }
      }
      if (!exposed) {
        surface.set(col, row, Cell::kUnknown);
      }
    }
  }
  distance_ = distance_transform(surface, [](Cell c) { return c == Cell::kOccupied; });
  log_beam_.resize(distance_.size());
  const double two_sigma_sq = 2.0 * params_.sigma_hit * params_.sigma_hit;
  for (std::size_t i = 0; i < distance_.size(); ++i) {
    distance_[i] *= map.resolution();
    const double d = distance_[i];
    const double p = d == kInf ? params_.z_rand
                               : params_.z_hit * std::exp(-(d * d) / two_sigma_sq) + params_.z_rand;
    log_beam_[i] = std::log(p);
  }
  log_floor_ = std::log(params_.z_rand);
}

double LikelihoodField::distance_at(double x, double y) const {
  const auto cell = map_->cell_of(x, y);
  return cell ? distance_[map_->flat(cell->col, cell->row)] : kInf;
}

double LikelihoodField::log_beam(double x, double y) const {
  const auto cell = map_->cell_of(x, y);
  return cell ? log_beam_[map_->flat(cell->col, cell->row)] : log_floor_;
}

ScanEvaluator::ScanEvaluator(const LikelihoodField& field, const RangeScan& scan)
    : field_(&field) {
  if (scan.angles.size() != scan.ranges.size()) {
    throw DomainError("scan angles and ranges differ in length");
  }
  const std::size_t stride = field.params().beam_stride;
  for (std::size_t k = 0; k < scan.size(); k += stride) {
    // Max-range readings carry no endpoint.
    if (scan.ranges[k] >= scan.max_range) {
      continue;
    }
    ranges_.push_back(scan.ranges[k]);
    cos_.push_back(std::cos(scan.angles[k]));
    sin_.push_back(std::sin(scan.angles[k]));
  }
}

double ScanEvaluator::log_likelihood(const Pose& pose) const {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  double sum = 0.0;
  for (std::size_t k = 0; k < ranges_.size(); ++k) {
    const double bx = c * cos_[k] - s * sin_[k];
    const double by = s * cos_[k] + c * sin_[k];
    sum += field_->log_beam(pose.x + ranges_[k] * bx, pose.y + ranges_[k] * by);
  }
  return field_->params().likelihood_exponent * sum;
}

double log_scan_likelihood(const LikelihoodField& field, const Pose& pose, const RangeScan& scan) {
  return ScanEvaluator(field, scan).log_likelihood(pose);
}

double scan_likelihood(const LikelihoodField& field, const Pose& pose, const RangeScan& scan) {
  return std::exp(log_scan_likelihood(field, pose, scan));
}

double scan_likelihood(const OccupancyGrid& map, const Pose& pose, const RangeScan& scan,
                       const ScanLikelihoodParams& params) {
  const LikelihoodField field(map, params);
  return scan_likelihood(field, pose, scan);
}

}  // namespace revisit
