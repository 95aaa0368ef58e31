#pragma once

#include <cmath>
#include <numbers>

namespace revisit {

/// Planar robot pose; theta is kept in (-pi, pi].
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool operator==(const Pose&) const = default;
};

/// Odometry increment in rotate-translate-rotate form.
struct OdometryDelta {
  double d_trans = 0.0;
  double d_rot1 = 0.0;
  double d_rot2 = 0.0;

  bool operator==(const OdometryDelta&) const = default;
};

double normalize_angle(double angle);

// Smallest absolute difference between two headings, in [0, pi].
double angle_distance(double a, double b);

OdometryDelta odometry_between(const Pose& from, const Pose& to);

Pose apply_odometry(const Pose& pose, const OdometryDelta& delta);

// Pose `local` expressed in the frame whose origin is `frame`.
Pose transform_pose(const Pose& frame, const Pose& local);

inline double planar_distance(const Pose& a, const Pose& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }

}  // namespace revisit
