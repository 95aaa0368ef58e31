#include "revisit/geometry.hpp"

namespace revisit {

double normalize_angle(double angle) {
  if (!std::isfinite(angle)) {
    return angle;
  }
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) {
    a += 2.0 * kPi;
  }
  return a;
}

double angle_distance(double a, double b) {
  return std::abs(normalize_angle(a - b));
}

OdometryDelta odometry_between(const Pose& from, const Pose& to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  OdometryDelta delta;
  delta.d_trans = std::hypot(dx, dy);
  delta.d_rot1 = delta.d_trans > 1e-12
                     ? normalize_angle(std::atan2(dy, dx) - from.theta)
                     : 0.0;
  delta.d_rot2 = normalize_angle(to.theta - from.theta - delta.d_rot1);
  return delta;
}

Pose apply_odometry(const Pose& pose, const OdometryDelta& delta) {
  const double heading = pose.theta + delta.d_rot1;
  return Pose{pose.x + delta.d_trans * std::cos(heading),
              pose.y + delta.d_trans * std::sin(heading),
              normalize_angle(heading + delta.d_rot2)};
}

Pose transform_pose(const Pose& frame, const Pose& local) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return Pose{frame.x + c * local.x - s * local.y,
              frame.y + s * local.x + c * local.y,
              normalize_angle(frame.theta + local.theta)};
}

}  // namespace revisit

