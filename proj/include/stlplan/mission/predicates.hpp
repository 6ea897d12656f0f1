#pragma once

#include "stlplan/mission/scenario.hpp"

#include <Eigen/Core>

#include <cmath>

namespace stlplan::mission {

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double x) {
  double w = std::remainder(x, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

/// Signed distance-to-boundary of an axis-aligned box: the smallest of the
/// six face margins. Positive inside, negative outside.
inline double box_membership_robustness(const Eigen::Vector3d& p, const AxisAlignedBox& b) {
  double m = p(0) - b.lower(0);
  for (int j = 0; j < 3; ++j) {
    m = std::min(m, p(j) - b.lower(j));
    m = std::min(m, b.upper(j) - p(j));
  }
  return m;
}

inline double box_avoidance_robustness(const Eigen::Vector3d& p, const AxisAlignedBox& b) {
  return -box_membership_robustness(p, b);
}

/// Gradient of box_membership_robustness w.r.t. p: +-e_axis of the active
/// face (an arbitrary active face at ties).
inline Eigen::Vector3d box_membership_gradient(const Eigen::Vector3d& p,
                                               const AxisAlignedBox& b) {
  double best = p(0) - b.lower(0);
  int axis = 0;
  double sign = 1.0;
  for (int j = 0; j < 3; ++j) {
    if (p(j) - b.lower(j) < best) {
      best = p(j) - b.lower(j);
      axis = j;
      sign = 1.0;
    }
    if (b.upper(j) - p(j) < best) {
      best = b.upper(j) - p(j);
      axis = j;
      sign = -1.0;
    }
  }
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  g(axis) = sign;
  return g;
}

/// min(|v| - lo, hi - |v|): positive inside the open speed band.
inline double speed_band_robustness(const Eigen::Vector3d& v, double lo, double hi) {
  const double speed = v.norm();
  return std::min(speed - lo, hi - speed);
}

inline Eigen::Vector3d speed_band_gradient(const Eigen::Vector3d& v, double lo, double hi) {
  const double speed = v.norm();
  if (speed < 1e-12) return Eigen::Vector3d::Zero();
  const Eigen::Vector3d dir = v / speed;
  return (speed - lo <= hi - speed) ? dir : Eigen::Vector3d(-dir);
}

/// min over rotors of min(Omega_q - lo, hi - Omega_q), squared-speed units.
inline double propeller_band_robustness(const Eigen::VectorXd& omega_sq, double lo, double hi) {
  double m = omega_sq(0) - lo;
  for (int q = 0; q < omega_sq.size(); ++q) {
    m = std::min(m, omega_sq(q) - lo);
    m = std::min(m, hi - omega_sq(q));
  }
  return m;
}

/// Heading alignment margin gamma - |wrap(psi - psi_vis)| where psi_vis is
/// the yaw of the latest displacement of at least min_displacement; fallback
/// covers the initial stretch before any motion.
inline constexpr double kMinDisplacement = 1e-6;

inline double heading_target(const Eigen::Vector2d& delta_xy, double fallback,
                             bool* valid = nullptr) {
  if (delta_xy.norm() < kMinDisplacement) {
    if (valid) *valid = false;
    return fallback;
  }
  if (valid) *valid = true;
  return std::atan2(delta_xy(1), delta_xy(0));
}

inline double heading_alignment_robustness(const Eigen::Vector3d& p_k,
                                           const Eigen::Vector3d& p_prev, double psi_k,
                                           double gamma, double fallback_psi_vis) {
  const double psi_vis =
      heading_target((p_k - p_prev).head<2>(), fallback_psi_vis);
  return gamma - std::abs(wrap_angle(psi_k - psi_vis));
}

}  // namespace stlplan::mission
