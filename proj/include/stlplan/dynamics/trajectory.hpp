#pragma once

#include "stlplan/dynamics/gtmr.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace stlplan::dynamics {

/// Discrete state/control record: N+1 state columns, N input columns.
struct Trajectory {
  Eigen::MatrixXd states;  // (12 + N_p) x (N+1)
  Eigen::MatrixXd inputs;  // N_p x N
  double period = 0.1;

  int steps() const { return static_cast<int>(inputs.cols()); }

  void validate(const GtmrParams& params) const {
    if (states.rows() != params.state_dim()) {
      throw DynamicsError("trajectory state dimension does not match the platform");
    }
    if (inputs.rows() != params.rotor_count()) {
      throw DynamicsError("trajectory input dimension does not match the platform");
    }
    if (states.cols() != inputs.cols() + 1) {
      throw DynamicsError("trajectory needs exactly one more state than inputs");
    }
    if (!(period > 0.0)) throw DynamicsError("trajectory period must be positive");
  }

  /// Largest defect between stored states and a re-integration of the inputs.
  double rollout_residual(const GtmrParams& params) const {
    validate(params);
    const Eigen::MatrixXd alloc = allocation_matrix(params);
    double worst = 0.0;
    for (int k = 0; k < steps(); ++k) {
      const Eigen::VectorXd pred = step(states.col(k), inputs.col(k), period, params, alloc);
      worst = std::max(worst, (pred - states.col(k + 1)).cwiseAbs().maxCoeff());
    }
    return worst;
  }
};

/// Power-plus-kinetic running cost: L_k = sum_i c_xi Omega_i^3
/// + 1/2 [v; w]^T blockdiag(m I, J) [v; w], evaluated at every state sample.
inline Eigen::VectorXd energy_samples(const Trajectory& traj, const GtmrParams& params) {
  Eigen::VectorXd out(traj.states.cols());
  for (int k = 0; k < traj.states.cols(); ++k) {
    const auto x = traj.states.col(k);
    double power = 0.0;
    for (int i = 0; i < params.rotor_count(); ++i) {
      const double c = params.rotors[static_cast<size_t>(i)].force_coeff;
      const double omega_sq = std::max(0.0, x(idx::xi + i)) / c;
      power += c * omega_sq * omega_sq * omega_sq;
    }
    const Eigen::Vector3d v = x.segment<3>(idx::v);
    const Eigen::Vector3d w = x.segment<3>(idx::omega);
    const double kinetic =
        0.5 * (params.mass * v.squaredNorm() + w.dot(params.inertia * w));
    out(k) = power + kinetic;
  }
  return out;
}

inline double energy_term(const Trajectory& traj, const GtmrParams& params) {
  return energy_samples(traj, params).sum();
}

/// Running cost of an ideal hover, used to normalize energy so the planner
/// weight trades off dimensionless quantities.
inline double hover_energy_sample(const GtmrParams& params) {
  const Eigen::VectorXd xi = hover_trim_forces(params);
  double power = 0.0;
  for (int i = 0; i < params.rotor_count(); ++i) {
    const double c = params.rotors[static_cast<size_t>(i)].force_coeff;
    const double omega_sq = std::max(0.0, xi(i)) / c;
    power += c * omega_sq * omega_sq * omega_sq;
  }
  return power;
}

namespace detail {

inline void append_number(std::string& line, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, static_cast<size_t>(ptr - buf));
}

}  // namespace detail

/// CSV columns: t, p(3), eta(3), v(3), omega(3), xi(N_p), xidot(N_p).
/// Row k carries state k and input k; the final row pads inputs with zeros.
inline void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DynamicsError("cannot open trajectory file for writing: " + path);
  const int n_rotors = static_cast<int>(traj.inputs.rows());
  out << "t,px,py,pz,roll,pitch,yaw,vx,vy,vz,wx,wy,wz";
  for (int i = 1; i <= n_rotors; ++i) out << ",xi" << i;
  for (int i = 1; i <= n_rotors; ++i) out << ",xidot" << i;
  out << "\n";
  for (int k = 0; k < traj.states.cols(); ++k) {
    std::string line;
    detail::append_number(line, k * traj.period);
    for (int r = 0; r < traj.states.rows(); ++r) {
      line.push_back(',');
      detail::append_number(line, traj.states(r, k));
    }
    for (int i = 0; i < n_rotors; ++i) {
      line.push_back(',');
      detail::append_number(line, k < traj.steps() ? traj.inputs(i, k) : 0.0);
    }
    out << line << "\n";
  }
}

inline Trajectory load_trajectory_csv(const std::string& path, int n_rotors) {
  std::ifstream in(path);
  if (!in) throw DynamicsError("cannot open trajectory file: " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("t,", 0) != 0) {
    throw DynamicsError("malformed trajectory CSV: missing header in " + path);
  }
  const int state_dim = 12 + n_rotors;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DynamicsError("malformed trajectory CSV: bad number at line " +
                            std::to_string(line_no) + " in " + path);
      }
    }
    if (static_cast<int>(row.size()) != 1 + state_dim + n_rotors) {
      throw DynamicsError("malformed trajectory CSV: wrong column count at line " +
                          std::to_string(line_no) + " in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw DynamicsError("trajectory CSV has fewer than two samples");

  Trajectory traj;
  const int n = static_cast<int>(rows.size()) - 1;
  traj.period = rows[1][0] - rows[0][0];
  if (!(traj.period > 0.0)) throw DynamicsError("trajectory CSV has a non-increasing time column");
  traj.states.resize(state_dim, n + 1);
  traj.inputs.resize(n_rotors, n);
  for (int k = 0; k <= n; ++k) {
    for (int r = 0; r < state_dim; ++r) traj.states(r, k) = rows[static_cast<size_t>(k)][1 + r];
    if (k < n) {
      for (int i = 0; i < n_rotors; ++i) {
        traj.inputs(i, k) = rows[static_cast<size_t>(k)][1 + state_dim + i];
      }
    }
  }
  return traj;
}

}  // namespace stlplan::dynamics
