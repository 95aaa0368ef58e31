#pragma once

#include <random>

#include "revisit/geometry.hpp"

namespace revisit {

// Odometry noise: each component of the rotate-translate-rotate increment
// gets zero-mean Gaussian noise whose standard deviation mixes the
// translation and rotation magnitudes, plus a floor.
struct MotionNoise {
  double a_trans_per_trans = 0.1;
  double a_trans_per_rot = 0.01;
  double a_rot_per_rot = 0.1;
  double a_rot_per_trans = 0.01;
  double floor_trans = 0.01;  // m
  double floor_rot = 0.002;   // rad

  static MotionNoise none() { return MotionNoise{0, 0, 0, 0, 0, 0}; }

  void validate() const;

  bool operator==(const MotionNoise&) const = default;
};

// Standard normal source with explicit state so that copies stay reproducible.
using Rng = std::mt19937_64;

OdometryDelta sample_odometry(const OdometryDelta& delta, const MotionNoise& noise, Rng& rng,
                              std::normal_distribution<double>& normal);

inline OdometryDelta sample_odometry(const OdometryDelta& delta, const MotionNoise& noise,
                                     Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return sample_odometry(delta, noise, rng, normal);
}

}  // namespace revisit
