#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stlplan::dynamics {

struct DynamicsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : DynamicsError {
  using DynamicsError::DynamicsError;
};

/// One motor-propeller unit: mounting point and spin axis in the body frame,
/// force/torque coefficients, and the drag-torque handedness.
struct Rotor {
  Eigen::Vector3d position;      // p_m [m]
  Eigen::Vector3d axis;          // z_P, unit norm
  double force_coeff = 11.5e-4;  // c_xi
  double torque_coeff = 2.38e-5; // c_tau
  int spin = +1;                 // drag torque sign
};

/// Physical constants of a generically-tilted multirotor.
struct GtmrParams {
  double mass = 2.25;                       // [kg]
  Eigen::Matrix3d inertia = Eigen::Vector3d(2.07e-2, 2.10e-2, 3.10e-2).asDiagonal();
  double gravity = 9.81;                    // [m/s^2]
  std::vector<Rotor> rotors;
  double force_min = 0.29;                  // [N] per rotor
  double force_max = 11.5;                  // [N] per rotor

  int rotor_count() const { return static_cast<int>(rotors.size()); }
  /// State dimension: p(3) eta(3) v(3) omega(3) xi(N_p).
  int state_dim() const { return 12 + rotor_count(); }

  void validate() const {
    if (!(mass > 0.0)) throw DynamicsError("mass must be positive");
    if (rotor_count() < 4) throw DynamicsError("at least four rotors required");
    if (!inertia.isApprox(inertia.transpose(), 1e-9)) {
      throw DynamicsError("inertia tensor must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw DynamicsError("inertia tensor must be positive definite");
    }
    if (!(force_min >= 0.0 && force_min < force_max)) {
      throw DynamicsError("rotor force bounds must satisfy 0 <= min < max");
    }
    for (const auto& r : rotors) {
      if (std::abs(r.axis.norm() - 1.0) > 1e-9) {
        throw DynamicsError("rotor axis must be unit norm");
      }
      if (!(r.force_coeff > 0.0)) throw DynamicsError("force coefficient must be positive");
    }
  }
};

/// Planar hexarotor with vertical rotor axes on a 0.4 m radius, alternating
/// spin, constants as used throughout the default scenario.
inline GtmrParams make_default_hexarotor() {
  GtmrParams p;
  const double radius = 0.4;
  for (int i = 0; i < 6; ++i) {
    Rotor r;
    const double angle = M_PI / 3.0 * i;
    r.position = Eigen::Vector3d(radius * std::cos(angle), radius * std::sin(angle), 0.0);
    r.axis = Eigen::Vector3d::UnitZ();
    r.spin = (i % 2 == 0) ? +1 : -1;
    p.rotors.push_back(r);
  }
  p.validate();
  return p;
}

/// State layout used everywhere a flat vector is needed (signals, CSV):
/// [p(3), eta(3), v(3), omega(3), xi(N_p)].
namespace idx {
inline constexpr int p = 0;
inline constexpr int eta = 3;
inline constexpr int v = 6;
inline constexpr int omega = 9;
inline constexpr int xi = 12;
}  // namespace idx

struct State {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d attitude = Eigen::Vector3d::Zero();  // roll, pitch, yaw [rad]
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // world frame
  Eigen::Vector3d body_rates = Eigen::Vector3d::Zero();
  Eigen::VectorXd forces;  // per-rotor [N]

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd x(12 + forces.size());
    x.segment<3>(idx::p) = position;
    x.segment<3>(idx::eta) = attitude;
    x.segment<3>(idx::v) = velocity;
    x.segment<3>(idx::omega) = body_rates;
    x.segment(idx::xi, forces.size()) = forces;
    return x;
  }

  static State from_vector(const Eigen::VectorXd& x) {
    State s;
    s.position = x.segment<3>(idx::p);
    s.attitude = x.segment<3>(idx::eta);
    s.velocity = x.segment<3>(idx::v);
    s.body_rates = x.segment<3>(idx::omega);
    s.forces = x.segment(idx::xi, x.size() - 12);
    return s;
  }
};

/// ZYX rotation matrix from body to world.
inline Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& eta) {
  const double cr = std::cos(eta(0)), sr = std::sin(eta(0));
  const double cp = std::cos(eta(1)), sp = std::sin(eta(1));
  const double cy = std::cos(eta(2)), sy = std::sin(eta(2));
  Eigen::Matrix3d r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,               cp * cr;
  return r;
}

inline constexpr double kPitchGuard = 1e-3;

/// Jacobian T(eta) with eta_dot = T(eta) * omega, ZYX convention. Throws near
/// the pitch singularity where the map loses rank.
inline Eigen::Matrix3d euler_rate_jacobian(const Eigen::Vector3d& eta) {
  if (std::abs(eta(1)) >= M_PI / 2.0 - kPitchGuard) {
    throw SingularityError("euler rate map is singular near |pitch| = 90 deg");
  }
  const double cr = std::cos(eta(0)), sr = std::sin(eta(0));
  const double cp = std::cos(eta(1)), tp = std::tan(eta(1));
  Eigen::Matrix3d t;
  t << 1.0, sr * tp, cr * tp,
       0.0, cr,      -sr,
       0.0, sr / cp, cr / cp;
  return t;
}

/// Force/torque allocation matrix G (6 x N_p): [F; tau] = G * xi with xi in
/// Newtons. Column i is [z_P; p_m x z_P + spin * (c_tau/c_xi) * z_P].
inline Eigen::MatrixXd allocation_matrix(const GtmrParams& params) {
  Eigen::MatrixXd g(6, params.rotor_count());
  for (int i = 0; i < params.rotor_count(); ++i) {
    const Rotor& r = params.rotors[static_cast<size_t>(i)];
    g.block<3, 1>(0, i) = r.axis;
    g.block<3, 1>(3, i) =
        r.position.cross(r.axis) + r.spin * (r.torque_coeff / r.force_coeff) * r.axis;
  }
  return g;
}

inline int allocation_rank(const GtmrParams& params) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(allocation_matrix(params));
  return static_cast<int>(svd.rank());
}

/// Newton-Euler state derivative with the control input xi_dot held.
/// Layout matches idx::*. alloc must be allocation_matrix(params).
inline void derivative_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const GtmrParams& params, const Eigen::MatrixXd& alloc,
                            Eigen::VectorXd& dx) {
  const int n = params.rotor_count();
  dx.resize(12 + n);
  const Eigen::Vector3d eta = x.segment<3>(idx::eta);
  const Eigen::Vector3d v = x.segment<3>(idx::v);
  const Eigen::Vector3d omega = x.segment<3>(idx::omega);
  const auto xi = x.segment(idx::xi, n);

  const Eigen::Matrix3d rot = rotation_matrix(eta);
  const Eigen::Matrix3d t = euler_rate_jacobian(eta);

  const Eigen::VectorXd wrench = alloc * xi;  // [F_body; tau_body]
  const Eigen::Vector3d force_body = wrench.head<3>();
  const Eigen::Vector3d torque_body = wrench.tail<3>();

  dx.segment<3>(idx::p) = v;
  dx.segment<3>(idx::eta) = t * omega;
  dx.segment<3>(idx::v) =
      Eigen::Vector3d(0.0, 0.0, -params.gravity) + rot * force_body / params.mass;
  dx.segment<3>(idx::omega) =
      params.inertia.ldlt().solve(-omega.cross(params.inertia * omega) + torque_body);
  dx.segment(idx::xi, n) = u;
}

inline Eigen::VectorXd derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                  const GtmrParams& params) {
  Eigen::VectorXd dx;
  derivative_into(x, u, params, allocation_matrix(params), dx);
  return dx;
}

inline State derivative(const State& x, const Eigen::VectorXd& u, const GtmrParams& params) {
  return State::from_vector(derivative(x.to_vector(), u, params));
}

/// Classical fourth-order Runge-Kutta step with zero-order-hold input.
inline Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt,
                            const GtmrParams& params, const Eigen::MatrixXd& alloc) {
  Eigen::VectorXd k1, k2, k3, k4;
  derivative_into(x, u, params, alloc, k1);
  derivative_into(x + 0.5 * dt * k1, u, params, alloc, k2);
  derivative_into(x + 0.5 * dt * k2, u, params, alloc, k3);
  derivative_into(x + dt * k3, u, params, alloc, k4);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt,
                            const GtmrParams& params) {
  return step(x, u, dt, params, allocation_matrix(params));
}

inline State step(const State& x, const Eigen::VectorXd& u, double dt, const GtmrParams& params) {
  return State::from_vector(step(x.to_vector(), u, dt, params));
}

/// Squared motor speeds Omega_i = xi_i / c_xi_i.
inline Eigen::VectorXd squared_speeds(const Eigen::VectorXd& xi, const GtmrParams& params) {
  Eigen::VectorXd omega_sq(params.rotor_count());
  for (int i = 0; i < params.rotor_count(); ++i) {
    if (xi(i) < 0.0) throw DynamicsError("negative rotor force has no speed equivalent");
    omega_sq(i) = xi(i) / params.rotors[static_cast<size_t>(i)].force_coeff;
  }
  return omega_sq;
}

/// Rotation speeds in Hz, the plotting convention for actuator bounds.
inline Eigen::VectorXd propeller_speeds(const Eigen::VectorXd& xi, const GtmrParams& params) {
  return squared_speeds(xi, params).cwiseSqrt();
}

/// Per-rotor forces that balance gravity with zero torque, found by the
/// allocation pseudo-inverse. Exact for symmetric platforms.
inline Eigen::VectorXd hover_trim_forces(const GtmrParams& params) {
  Eigen::VectorXd wrench(6);
  wrench << 0.0, 0.0, params.mass * params.gravity, 0.0, 0.0, 0.0;
  const Eigen::MatrixXd alloc = allocation_matrix(params);
  Eigen::VectorXd xi =
      alloc.completeOrthogonalDecomposition().pseudoInverse() * wrench;
  if ((alloc * xi - wrench).norm() > 1e-6) {
    throw DynamicsError("platform cannot hover: no torque-free gravity-balancing forces");
  }
  return xi;
}

}  // namespace stlplan::dynamics
