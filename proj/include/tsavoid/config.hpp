#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tsavoid/avoidance.hpp"
#include "tsavoid/simulator.hpp"
#include "tsavoid/timescale.hpp"

namespace tsavoid {

/// Parsed command configuration. Every field has a documented default
/// except the plant, K (stabilized mode) and the time scale.
struct RunConfig {
  nlohmann::json raw;

  TimeScale ts = TimeScale::reals(0.0, 1.0);
  LinearPlant plant;
  StrategyMode mode = StrategyMode::Stabilized;
  Eigen::MatrixXd K;
  Eigen::MatrixXd M;  // default identity

  double deadband = kDefaultDeadband;
  std::optional<double> gain;  // overrides ‖D‖α₂ (or α₁ in pure mode)
  EvaderMode evader = EvaderMode::Strategy;

  double level = 1.0;
  double epsilon = 1.0;
  Eigen::VectorXd box_lower;
  Eigen::VectorXd box_upper;
  std::optional<double> avoidance_graininess;  // which Q defines V and the sets

  std::vector<Eigen::VectorXd> x0;
  PursuerPolicy pursuer;
  double dense_step = kDefaultDenseStep;
  std::uint64_t seed = 0;

  VerifyOptions verify;
};

TimeScale parse_timescale(const nlohmann::json& j);
nlohmann::json timescale_to_json(const TimeScale& ts);

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& what);
Eigen::VectorXd parse_vector(const nlohmann::json& j, const std::string& what);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

/// Throws ConfigError on schema violations.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Per-graininess strategies for rc.ts (may throw MatchingError or
/// SingularLyapunovError), with the gain override applied.
StrategySchedule build_schedule(const RunConfig& rc);

/// Sets are defined by the Q of rc.avoidance_graininess, defaulting to the
/// smallest graininess of the window.
AvoidanceProblem build_problem(const RunConfig& rc, const StrategySchedule& schedule);

}  // namespace tsavoid
