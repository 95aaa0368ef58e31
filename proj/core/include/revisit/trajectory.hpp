#pragma once

#include <vector>

#include "revisit/geometry.hpp"
#include "revisit/view_model.hpp"

namespace revisit {

struct TrajectoryRecord {
  Pose true_pose;
  OdometryDelta odometry;  // from the previous record; zero for the first
  RangeScan scan;

  bool operator==(const TrajectoryRecord&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  bool truncated = false;  // the motion policy got stuck before reaching its length

  double true_length() const;

  bool operator==(const Trajectory&) const = default;
};

}  // namespace revisit
