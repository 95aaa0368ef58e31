#include "revisit/motion_model.hpp"

#include <cmath>

#include "revisit/errors.hpp"

namespace revisit {

void MotionNoise::validate() const {
  if (a_trans_per_trans < 0 || a_trans_per_rot < 0 || a_rot_per_rot < 0 || a_rot_per_trans < 0 ||
      floor_trans < 0 || floor_rot < 0) {
    throw DomainError("motion noise coefficients must be non-negative");
  }
}

OdometryDelta sample_odometry(const OdometryDelta& delta, const MotionNoise& noise, Rng& rng,
                              std::normal_distribution<double>& normal) {
  const double trans = std::abs(delta.d_trans);
  const double rot = std::abs(delta.d_rot1) + std::abs(delta.d_rot2);
  const double sigma_trans =
      noise.a_trans_per_trans * trans + noise.a_trans_per_rot * rot + noise.floor_trans;
  const double sigma_rot1 = noise.a_rot_per_rot * std::abs(delta.d_rot1) +
                            noise.a_rot_per_trans * trans + noise.floor_rot;
  const double sigma_rot2 = noise.a_rot_per_rot * std::abs(delta.d_rot2) +
                            noise.a_rot_per_trans * trans + noise.floor_rot;
  auto perturb = [&](double value, double sigma) {
    return sigma > 0.0 ? value + sigma * normal(rng) : value;
  };
  OdometryDelta out;
  out.d_rot1 = perturb(delta.d_rot1, sigma_rot1);
  out.d_trans = perturb(delta.d_trans, sigma_trans);
  out.d_rot2 = perturb(delta.d_rot2, sigma_rot2);
  return out;
}

}  // namespace revisit
