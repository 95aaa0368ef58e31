#include "revisit/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "revisit/errors.hpp"

namespace revisit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinSimRange = 1e-3;
constexpr double kLookahead = 0.75;
constexpr double kGoalTolerance = 0.15;
constexpr double kPreferredClearance = 1.0;
constexpr double kWallPenalty = 4.0;
constexpr double kTightPenalty = 50.0;
constexpr double kMinGoalDistance = 3.0;
constexpr std::size_t kMaxFailures = 20;

// Separate streams keep the driven path independent of sensor settings.
constexpr std::uint64_t kSensorStream = 0x9E3779B97F4A7C15ULL;

bool cell_free(const OccupancyGrid& map, double x, double y) {
  const auto cell = map.cell_of(x, y);
  return cell && map.at(cell->col, cell->row) == Cell::kFree;
}

bool segment_free(const OccupancyGrid& map, const Pose& from, double x, double y) {
  const double len = std::hypot(x - from.x, y - from.y);
  const double probe = 0.5 * map.resolution();
  const auto n = static_cast<std::size_t>(std::ceil(len / probe));
  for (std::size_t k = 1; k <= n; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(n);
    if (!cell_free(map, from.x + f * (x - from.x), from.y + f * (y - from.y))) {
      return false;
    }
  }
  return cell_free(map, x, y);
}

// Clearance map and shortest paths on the FREE cells of a world.
class Navigator {
 public:
  Navigator(const OccupancyGrid& map, const WorldConfig& cfg) : map_(map), radius_(cfg.robot_radius) {
    clearance_ = distance_transform(map, [](Cell c) { return c != Cell::kFree; });
    for (auto& d : clearance_) {
      d *= map.resolution();
    }
  }

  double clearance(const CellIndex& c) const { return clearance_[map_.flat(c.col, c.row)]; }

  bool passable(long col, long row) const {
    return map_.in_bounds(col, row) && map_.at(col, row) == Cell::kFree;
  }

  double cell_cost(const CellIndex& c) const {
    const double d = clearance(c);
    double cost = 1.0;
    if (d < radius_) {
      cost += kTightPenalty;
    }
    if (d < kPreferredClearance) {
      cost += kWallPenalty * (kPreferredClearance - d) / kPreferredClearance;
    }
    return cost;
  }

  // Dijkstra from `source` over 8-connected FREE cells; returns distances.
  std::vector<double> sweep(const CellIndex& source, std::vector<std::size_t>* parent) const {
    const std::size_t n = map_.width() * map_.height();
    std::vector<double> dist(n, kInf);
    if (parent) {
      parent->assign(n, n);
    }
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const std::size_t s = map_.flat(source.col, source.row);
    dist[s] = 0.0;
    open.push({0.0, s});
    while (!open.empty()) {
      const auto [d, u] = open.top();
      open.pop();
      if (d > dist[u]) {
        continue;
      }
      const long col = static_cast<long>(u % map_.width());
      const long row = static_cast<long>(u / map_.width());
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          if ((dr == 0 && dc == 0) || !passable(col + dc, row + dr)) {
            continue;
          }
          // No diagonal squeezing between two blocked cells.
          if (dr != 0 && dc != 0 && (!passable(col + dc, row) || !passable(col, row + dr))) {
            continue;
          }
          const CellIndex next{col + dc, row + dr};
          const double len = (dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0;
          const double nd = d + len * cell_cost(next);
          const std::size_t v = map_.flat(next.col, next.row);
          if (nd < dist[v]) {
            dist[v] = nd;
            if (parent) {
              (*parent)[v] = u;
            }
            open.push({nd, v});
          }
        }
      }
    }
    return dist;
  }

  std::optional<std::vector<Point>> plan(const Pose& from, const Point& to) const {
    const auto s = map_.cell_of(from.x, from.y);
    const auto g = map_.cell_of(to.x, to.y);
    if (!s || !g || !passable(g->col, g->row)) {
      return std::nullopt;
    }
    std::vector<std::size_t> parent;
    const auto dist = sweep(*s, &parent);
    std::size_t cur = map_.flat(g->col, g->row);
    if (!std::isfinite(dist[cur])) {
      return std::nullopt;
    }
    std::vector<Point> path;
    const std::size_t start = map_.flat(s->col, s->row);
    const std::size_t none = parent.size();
    while (cur != start && cur != none) {
      const long col = static_cast<long>(cur % map_.width());
      const long row = static_cast<long>(cur / map_.width());
      path.push_back({map_.center_x(col), map_.center_y(row)});
      cur = parent[cur];
    }
    std::reverse(path.begin(), path.end());
    if (path.empty()) {
      path.push_back(to);
    } else {
      path.back() = to;
    }
    return path;
  }

 private:
  const OccupancyGrid& map_;
  double radius_;
  std::vector<double> clearance_;
};

// Pose sequence builder shared by the policies.
class Driver {
 public:
  Driver(const OccupancyGrid& map, const WorldConfig& cfg, const Pose& start, double length)
      : map_(map), cfg_(cfg), length_(length) {
    poses_.push_back(start);
  }

  const Pose& pose() const { return poses_.back(); }
  bool done() const { return travelled_ >= length_ - 1e-9; }
  std::vector<Pose> take() { return std::move(poses_); }

  void rotate(double angle) {
    Pose p = pose();
    p.theta = normalize_angle(p.theta + angle);
    poses_.push_back(p);
  }

  // Turns by `turn` (already limited) and moves up to `distance`. Returns
  // false without moving when the segment is blocked.
  bool advance(double turn, double distance) {
    const Pose& p = pose();
    const double theta = normalize_angle(p.theta + turn);
    const double d = std::min({distance, cfg_.step_length, length_ - travelled_});
    const double x = p.x + d * std::cos(theta);
    const double y = p.y + d * std::sin(theta);
    if (!segment_free(map_, p, x, y)) {
      return false;
    }
    poses_.push_back({x, y, theta});
    travelled_ += d;
    return true;
  }

  // Pure pursuit along `path`. Returns false when blocked.
  bool follow(const std::vector<Point>& path) {
    std::size_t cursor = 0;
    std::size_t spins = 0;
    while (!done()) {
      const Point& goal = path.back();
      const double to_goal = std::hypot(goal.x - pose().x, goal.y - pose().y);
      if (to_goal < kGoalTolerance) {
        return true;
      }
      while (cursor + 1 < path.size() &&
             std::hypot(path[cursor].x - pose().x, path[cursor].y - pose().y) < kLookahead) {
        ++cursor;
      }
      const Point& carrot = path[cursor];
      const double heading = std::atan2(carrot.y - pose().y, carrot.x - pose().x);
      const double err = normalize_angle(heading - pose().theta);
      if (std::abs(err) > cfg_.max_turn_per_step) {
        if (++spins > 16) {
          return false;
        }
        rotate(std::copysign(cfg_.max_turn_per_step, err));
        continue;
      }
      spins = 0;
      if (!advance(err, to_goal)) {
        return false;
      }
    }
    return true;
  }

 private:
  const OccupancyGrid& map_;
  const WorldConfig& cfg_;
  double length_;
  double travelled_ = 0.0;
  std::vector<Pose> poses_;
};

double ray_range(const OccupancyGrid& map, const Pose& pose, double bearing, double max_range) {
  return trace_ray(map, pose.x, pose.y, pose.theta + bearing, max_range).range;
}

bool drive_wall_follow(Driver& driver, const OccupancyGrid& map, const WorldConfig& cfg) {
  constexpr double kWallDistance = 0.7;
  constexpr double kFrontClearance = 0.9;
  constexpr double kLostWall = 2.0;
  constexpr double kGain = 1.5;
  double spun = 0.0;
  while (!driver.done()) {
    const Pose& p = driver.pose();
    const double front = ray_range(map, p, 0.0, cfg.max_range);
    const double front_right = ray_range(map, p, -kPi / 4.0, cfg.max_range);
    const double right = ray_range(map, p, -kPi / 2.0, cfg.max_range);
    if (front < kFrontClearance || front_right < kWallDistance * std::sqrt(2.0) * 0.7) {
      driver.rotate(cfg.max_turn_per_step);
      spun += cfg.max_turn_per_step;
      if (spun > 2.0 * kPi) {
        return false;
      }
      continue;
    }
    double turn = right > kLostWall ? -0.5 * cfg.max_turn_per_step
                                    : -kGain * (right - kWallDistance);
    turn = std::clamp(turn, -cfg.max_turn_per_step, cfg.max_turn_per_step);
    if (driver.advance(turn, cfg.step_length)) {
      spun = 0.0;
    } else {
      driver.rotate(cfg.max_turn_per_step);
      spun += cfg.max_turn_per_step;
      if (spun > 2.0 * kPi) {
        return false;
      }
    }
  }
  return true;
}

std::vector<CellIndex> roomy_cells(const OccupancyGrid& map, const Navigator& nav, double radius) {
  std::vector<CellIndex> cells;
  for (std::size_t row = 0; row < map.height(); ++row) {
    for (std::size_t col = 0; col < map.width(); ++col) {
      const CellIndex c{static_cast<long>(col), static_cast<long>(row)};
      if (map.at(c.col, c.row) == Cell::kFree && nav.clearance(c) >= radius) {
        cells.push_back(c);
      }
    }
  }
  return cells;
}

}  // namespace

void WorldConfig::validate() const {
  if (beam_count < 3) {
    throw DomainError("a scan needs at least 3 beams");
  }
  if (!(fov > 0.0) || fov > 2.0 * kPi) {
    throw DomainError("field of view must lie in (0, 2*pi]");
  }
  if (!(max_range > 0.0)) {
    throw DomainError("max range must be positive");
  }
  if (!(range_noise_sigma >= 0.0)) {
    throw DomainError("range noise sigma must be non-negative");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw DomainError("dropout probability must lie in [0, 1]");
  }
  if (!(step_length > 0.0) || !(max_turn_per_step > 0.0) || !(robot_radius >= 0.0)) {
    throw DomainError("invalid motion policy geometry");
  }
  odometry.validate();
}

std::vector<double> WorldConfig::bearings() const { return uniform_bearings(beam_count, fov); }

Policy parse_policy(std::string_view name) {
  if (name == "waypoints") return Policy::kWaypoints;
  if (name == "wall_follow") return Policy::kWallFollow;
  if (name == "random_explore") return Policy::kRandomExplore;
  throw DomainError("unknown policy '" + std::string(name) + "'");
}

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::kWaypoints:
      return "waypoints";
    case Policy::kWallFollow:
      return "wall_follow";
    case Policy::kRandomExplore:
      return "random_explore";
  }
  return "?";
}

OccupancyGrid load_world(std::string_view text) { return load_map(text); }

RangeScan simulate_scan(const OccupancyGrid& map, const Pose& pose, const WorldConfig& cfg,
                        Rng& rng) {
  const auto cell = map.cell_of(pose.x, pose.y);
  if (!cell) {
    throw DomainError("scan pose lies outside the grid");
  }
  if (map.at(cell->col, cell->row) == Cell::kOccupied) {
    throw DomainError("scan pose lies in an OCCUPIED cell");
  }
  RangeScan scan = raycast(map, pose, cfg.bearings(), cfg.max_range);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& r : scan.ranges) {
    if (unit(rng) < cfg.dropout_prob) {
      r = cfg.max_range;
      continue;
    }
    if (cfg.range_noise_sigma > 0.0) {
      r += cfg.range_noise_sigma * normal(rng);
    }
    r = std::clamp(r, kMinSimRange, cfg.max_range);
  }
  return scan;
}

Pose random_free_pose(const OccupancyGrid& map, const WorldConfig& cfg, Rng& rng) {
  const Navigator nav(map, cfg);
  const auto cells = roomy_cells(map, nav, cfg.robot_radius);
  if (cells.empty()) {
    throw DomainError("map has no FREE cell with the required clearance");
  }
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  const CellIndex c = cells[pick(rng)];
  return {map.center_x(c.col), map.center_y(c.row), normalize_angle(heading(rng))};
}

Trajectory generate_trajectory(const OccupancyGrid& map, const Pose& start, Policy policy,
                               double length, const WorldConfig& cfg,
                               std::span<const Point> waypoints) {
  cfg.validate();
  if (!(length > 0.0)) {
    throw DomainError("trajectory length must be positive");
  }
  if (!is_inside(map, start)) {
    throw DomainError("trajectory start must lie in a FREE cell");
  }

  Rng policy_rng(cfg.seed);
  Driver driver(map, cfg, Pose{start.x, start.y, normalize_angle(start.theta)}, length);
  bool finished = true;
  switch (policy) {
    case Policy::kWaypoints: {
      const Navigator nav(map, cfg);
      for (const auto& wp : waypoints) {
        if (driver.done()) break;
        const auto path = nav.plan(driver.pose(), wp);
        if (!path || !driver.follow(*path)) {
          finished = false;
          break;
        }
      }
      break;
    }
    case Policy::kRandomExplore: {
      const Navigator nav(map, cfg);
      const auto cells = roomy_cells(map, nav, cfg.robot_radius);
      std::size_t failures = 0;
      while (!driver.done()) {
        const auto here = map.cell_of(driver.pose().x, driver.pose().y);
        const auto reach = nav.sweep(*here, nullptr);
        std::vector<CellIndex> goals;
        for (const auto& c : cells) {
          const double gx = map.center_x(c.col);
          const double gy = map.center_y(c.row);
          if (std::isfinite(reach[map.flat(c.col, c.row)]) &&
              std::hypot(gx - driver.pose().x, gy - driver.pose().y) >= kMinGoalDistance) {
            goals.push_back(c);
          }
        }
        if (goals.empty()) {
          finished = false;
          break;
        }
        std::uniform_int_distribution<std::size_t> pick(0, goals.size() - 1);
        const CellIndex g = goals[pick(policy_rng)];
        const auto path = nav.plan(driver.pose(), {map.center_x(g.col), map.center_y(g.row)});
        if (!path || !driver.follow(*path)) {
          if (++failures > kMaxFailures) {
            finished = false;
            break;
          }
          continue;
        }
        failures = 0;
      }
      break;
    }
    case Policy::kWallFollow:
      finished = drive_wall_follow(driver, map, cfg);
      break;
  }

  Trajectory traj;
  traj.truncated = !finished || !driver.done();
  const std::vector<Pose> poses = driver.take();
  Rng sensor_rng(cfg.seed ^ kSensorStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  traj.records.reserve(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    TrajectoryRecord rec;
    rec.true_pose = poses[k];
    if (k > 0) {
      rec.odometry = sample_odometry(odometry_between(poses[k - 1], poses[k]), cfg.odometry,
                                     sensor_rng, normal);
    }
    rec.scan = simulate_scan(map, poses[k], cfg, sensor_rng);
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

OccupancyGrid carve_partial_map(const OccupancyGrid& map, const Trajectory& trajectory,
                                const WorldConfig& cfg) {
  OccupancyGrid carved(map.width(), map.height(), map.resolution(), map.origin_x(),
                       map.origin_y(), Cell::kUnknown);
  // Twice the sensor's beam density so that thin wedges between beams are
  // still covered at long range.
  const auto bearings = uniform_bearings(2 * cfg.beam_count - 1, cfg.fov);
  const auto mark = [&](const CellIndex& c, double) {
    const Cell truth = map.at(c.col, c.row);
    if (truth != Cell::kUnknown) {
      carved.set(c.col, c.row, truth);
    }
    return true;
  };
  for (const auto& rec : trajectory.records) {
    const Pose& p = rec.true_pose;
    if (!map.cell_of(p.x, p.y)) {
      continue;
    }
    for (double b : bearings) {
      trace_ray(map, p.x, p.y, p.theta + b, cfg.max_range, mark);
    }
  }
  return carved;
}

std::vector<std::size_t> subsample_by_distance(const Trajectory& trajectory, double spacing) {
  std::vector<std::size_t> picks;
  if (trajectory.records.empty()) {
    return picks;
  }
  picks.push_back(0);
  double since = 0.0;
  for (std::size_t k = 1; k < trajectory.records.size(); ++k) {
    since += planar_distance(trajectory.records[k - 1].true_pose, trajectory.records[k].true_pose);
    if (since >= spacing) {
      picks.push_back(k);
      since = 0.0;
    }
  }
  return picks;
}

double Trajectory::true_length() const {
  double total = 0.0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    total += planar_distance(records[k - 1].true_pose, records[k].true_pose);
  }
  return total;
}

}  // namespace revisit
