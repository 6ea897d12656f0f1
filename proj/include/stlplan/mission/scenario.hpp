#pragma once

#include <json.hpp>

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlplan::mission {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AxisAlignedBox {
  Eigen::Vector3d lower = Eigen::Vector3d::Zero();
  Eigen::Vector3d upper = Eigen::Vector3d::Zero();

  void validate(const std::string& what) const {
    for (int j = 0; j < 3; ++j) {
      if (!(lower(j) < upper(j))) {
        throw ScenarioError(what + ": lower bound must be strictly below upper on axis " +
                            std::to_string(j));
      }
    }
  }

  Eigen::Vector3d center() const { return 0.5 * (lower + upper); }
  Eigen::Vector3d half_extents() const { return 0.5 * (upper - lower); }
  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() > lower.array()).all() && (p.array() < upper.array()).all();
  }
};

/// Handover mission description. Workspace and obstacles live in the world
/// frame; behind / visibility / preference / handover boxes are expressed in
/// the human-centric frame (translated to the human position and rotated by
/// the human yaw).
struct Scenario {
  AxisAlignedBox workspace;
  std::vector<AxisAlignedBox> obstacles;
  AxisAlignedBox behind;
  AxisAlignedBox visibility_region;
  std::vector<AxisAlignedBox> preference_regions;
  AxisAlignedBox handover;

  Eigen::Vector3d human_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d human_attitude = Eigen::Vector3d::Zero();  // [rad]

  double mission_duration = 17.0;   // T_N [s]
  double visibility_duration = 5.0; // T_vr [s]

  double vel_min = 0.0;   // [m/s]
  double vel_max = 0.4;   // [m/s]
  double prop_min_hz = 40.0;
  double prop_max_hz = 80.0;
  double heading_margin = 30.0 * M_PI / 180.0;  // gamma [rad]

  Eigen::Vector3d initial_position = Eigen::Vector3d(-1.8, 0.0, 1.0);
  Eigen::Vector3d initial_attitude = Eigen::Vector3d::Zero();  // [rad]

  /// Squared-motor-speed comfort band derived from the Hz bounds.
  double prop_min_sq() const { return prop_min_hz * prop_min_hz; }
  double prop_max_sq() const { return prop_max_hz * prop_max_hz; }

  double human_yaw() const { return human_attitude(2); }

  Eigen::Matrix3d human_rotation() const {
    const double c = std::cos(human_yaw()), s = std::sin(human_yaw());
    Eigen::Matrix3d r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
  }

  /// World point mapped into the human-centric frame.
  Eigen::Vector3d to_human_frame(const Eigen::Vector3d& p_world) const {
    return human_rotation().transpose() * (p_world - human_position);
  }

  void validate() const {
    workspace.validate("workspace");
    behind.validate("behind");
    visibility_region.validate("visibility_region");
    handover.validate("handover");
    for (size_t i = 0; i < obstacles.size(); ++i) {
      obstacles[i].validate("obstacles[" + std::to_string(i) + "]");
    }
    if (preference_regions.empty()) {
      throw ScenarioError("preference_regions: at least one region required");
    }
    for (size_t i = 0; i < preference_regions.size(); ++i) {
      preference_regions[i].validate("preference_regions[" + std::to_string(i) + "]");
    }
    if (!(visibility_duration > 0.0 && visibility_duration < mission_duration)) {
      throw ScenarioError("timing: T_vr must lie strictly inside (0, T_N)");
    }
    if (!(vel_min >= 0.0 && vel_min < vel_max)) {
      throw ScenarioError("comfort: velocity band must satisfy 0 <= vel_min < vel_max");
    }
    if (!(prop_min_hz >= 0.0 && prop_min_hz < prop_max_hz)) {
      throw ScenarioError("comfort: propeller band must satisfy 0 <= prop_min < prop_max");
    }
    if (!(heading_margin > 0.0)) {
      throw ScenarioError("comfort: gamma must be positive");
    }
    // Human-anchored terminal boxes must sit inside the workspace for any
    // trajectory to satisfy both membership constraints at once.
    auto inside_workspace = [&](const AxisAlignedBox& b, const std::string& what) {
      for (int cx = 0; cx < 2; ++cx) {
        for (int cy = 0; cy < 2; ++cy) {
          for (int cz = 0; cz < 2; ++cz) {
            Eigen::Vector3d corner(cx ? b.upper(0) : b.lower(0), cy ? b.upper(1) : b.lower(1),
                                   cz ? b.upper(2) : b.lower(2));
            const Eigen::Vector3d world = human_rotation() * corner + human_position;
            if (!workspace.contains(world)) {
              throw ScenarioError(what + ": box leaves the workspace");
            }
          }
        }
      }
    };
    inside_workspace(handover, "handover");
    inside_workspace(visibility_region, "visibility_region");
    if (!workspace.contains(initial_position)) {
      throw ScenarioError("mrav: initial position outside the workspace");
    }
  }
};

/// Scenario used throughout the documentation and the test suite: a human
/// facing +x at the origin, one obstacle, three nested approach corridors
/// meeting in front of the operator, timing and comfort thresholds from the
/// bundled platform datasheet.
inline Scenario make_default_scenario() {
  Scenario sc;
  sc.workspace = {{-3.6, -2.85, 0.0}, {3.6, 2.85, 2.5}};
  sc.obstacles = {{{-0.6, -2.0, 0.0}, {0.2, -0.9, 1.8}}};
  sc.behind = {{-0.6, -0.5, 0.0}, {-0.05, 0.45, 2.2}};
  sc.visibility_region = {{0.4, -0.7, 0.4}, {2.3, 1.7, 1.9}};
  sc.preference_regions = {
      {{0.55, 0.55, 0.9}, {1.45, 1.45, 2.0}},   // descent corridor from above
      {{0.55, 0.4, 0.8}, {1.45, 2.1, 1.75}},    // lateral corridor from the left
      {{0.5, 0.5, 0.5}, {1.5, 1.5, 1.5}},       // handover vicinity
  };
  sc.handover = {{0.6, 0.6, 0.6}, {1.4, 1.4, 1.4}};
  sc.validate();
  return sc;
}

namespace detail {

inline Eigen::Vector3d vec3_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw ScenarioError(path + ": expected an array of three numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<size_t>(i)].is_number()) {
      throw ScenarioError(path + ": expected an array of three numbers");
    }
    v(i) = j[static_cast<size_t>(i)].get<double>();
  }
  return v;
}

inline AxisAlignedBox box_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) {
    throw ScenarioError(path + ": expected an object with 'lower' and 'upper'");
  }
  AxisAlignedBox b;
  b.lower = vec3_from_json(j.at("lower"), path + ".lower");
  b.upper = vec3_from_json(j.at("upper"), path + ".upper");
  b.validate(path);
  return b;
}

inline nlohmann::json box_to_json(const AxisAlignedBox& b) {
  return {{"lower", {b.lower(0), b.lower(1), b.lower(2)}},
          {"upper", {b.upper(0), b.upper(1), b.upper(2)}}};
}

inline nlohmann::json vec3_to_json(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

inline constexpr double kDegToRad = M_PI / 180.0;

}  // namespace detail

/// Parse a scenario document. Fields absent from the document keep the
/// defaults of make_default_scenario(); the geometric keys are mandatory.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc = make_default_scenario();
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ScenarioError(std::string("missing field: ") + key);
    return j.at(key);
  };

  sc.workspace = detail::box_from_json(require("workspace"), "workspace");
  sc.obstacles.clear();
  const auto& obs = require("obstacles");
  if (!obs.is_array()) throw ScenarioError("obstacles: expected an array");
  for (size_t i = 0; i < obs.size(); ++i) {
    sc.obstacles.push_back(
        detail::box_from_json(obs[i], "obstacles[" + std::to_string(i) + "]"));
  }
  sc.behind = detail::box_from_json(require("behind"), "behind");
  sc.visibility_region =
      detail::box_from_json(require("visibility_region"), "visibility_region");
  const auto& prefs = require("preference_regions");
  if (!prefs.is_array() || prefs.empty()) {
    throw ScenarioError("preference_regions: expected a non-empty array");
  }
  sc.preference_regions.clear();
  for (size_t i = 0; i < prefs.size(); ++i) {
    sc.preference_regions.push_back(
        detail::box_from_json(prefs[i], "preference_regions[" + std::to_string(i) + "]"));
  }
  sc.handover = detail::box_from_json(require("handover"), "handover");

  if (j.contains("human")) {
    const auto& h = j.at("human");
    if (h.contains("position")) {
      sc.human_position = detail::vec3_from_json(h.at("position"), "human.position");
    }
    if (h.contains("attitude_deg")) {
      sc.human_attitude =
          detail::vec3_from_json(h.at("attitude_deg"), "human.attitude_deg") * detail::kDegToRad;
    }
  }
  if (j.contains("timing")) {
    const auto& t = j.at("timing");
    if (t.contains("T_N")) sc.mission_duration = t.at("T_N").get<double>();
    if (t.contains("T_vr")) sc.visibility_duration = t.at("T_vr").get<double>();
  }
  if (j.contains("comfort")) {
    const auto& c = j.at("comfort");
    if (c.contains("vel_min")) sc.vel_min = c.at("vel_min").get<double>();
    if (c.contains("vel_max")) sc.vel_max = c.at("vel_max").get<double>();
    if (c.contains("prop_min_hz")) sc.prop_min_hz = c.at("prop_min_hz").get<double>();
    if (c.contains("prop_max_hz")) sc.prop_max_hz = c.at("prop_max_hz").get<double>();
    if (c.contains("gamma_deg")) {
      sc.heading_margin = c.at("gamma_deg").get<double>() * detail::kDegToRad;
    }
  }
  if (j.contains("mrav")) {
    const auto& m = j.at("mrav");
    if (m.contains("p0")) sc.initial_position = detail::vec3_from_json(m.at("p0"), "mrav.p0");
    if (m.contains("eta0_deg")) {
      sc.initial_attitude =
          detail::vec3_from_json(m.at("eta0_deg"), "mrav.eta0_deg") * detail::kDegToRad;
    }
  }

  sc.validate();
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["workspace"] = detail::box_to_json(sc.workspace);
  j["obstacles"] = nlohmann::json::array();
  for (const auto& b : sc.obstacles) j["obstacles"].push_back(detail::box_to_json(b));
  j["behind"] = detail::box_to_json(sc.behind);
  j["visibility_region"] = detail::box_to_json(sc.visibility_region);
  j["preference_regions"] = nlohmann::json::array();
  for (const auto& b : sc.preference_regions) {
    j["preference_regions"].push_back(detail::box_to_json(b));
  }
  j["handover"] = detail::box_to_json(sc.handover);
  j["human"] = {{"position", detail::vec3_to_json(sc.human_position)},
                {"attitude_deg", detail::vec3_to_json(sc.human_attitude / detail::kDegToRad)}};
  j["timing"] = {{"T_N", sc.mission_duration}, {"T_vr", sc.visibility_duration}};
  j["comfort"] = {{"vel_min", sc.vel_min},
                  {"vel_max", sc.vel_max},
                  {"prop_min_hz", sc.prop_min_hz},
                  {"prop_max_hz", sc.prop_max_hz},
                  {"gamma_deg", sc.heading_margin / detail::kDegToRad}};
  j["mrav"] = {{"p0", detail::vec3_to_json(sc.initial_position)},
               {"eta0_deg", detail::vec3_to_json(sc.initial_attitude / detail::kDegToRad)}};
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError("scenario file is not valid JSON: " + std::string(e.what()));
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot open scenario file for writing: " + path);
  out << scenario_to_json(sc).dump(2) << "\n";
}

}  // namespace stlplan::mission
