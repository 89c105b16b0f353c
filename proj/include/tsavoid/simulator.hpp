#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tsavoid/avoidance.hpp"
#include "tsavoid/timescale.hpp"

namespace tsavoid {

inline constexpr double kDefaultDenseStep = 1e-3;

enum class PursuerKind { WorstCase, Random, Constant, Scripted };

struct PursuerPolicy {
  PursuerKind kind = PursuerKind::WorstCase;
  Eigen::VectorXd constant;                                       // Constant
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> script;  // Scripted

  static PursuerPolicy worst_case() { return {}; }
  static PursuerPolicy random() { return {PursuerKind::Random, {}, {}}; }
  static PursuerPolicy fixed(Eigen::VectorXd u2) {
    return {PursuerKind::Constant, std::move(u2), {}};
  }
};

/// Stateful pursuer: owns the RNG of a random policy.
class Pursuer {
 public:
  Pursuer(PursuerPolicy policy, std::uint64_t seed);

  Eigen::VectorXd control(const LinearPlant& plant, const StrategyParams& sp,
                          double t, const Eigen::VectorXd& x);

 private:
  PursuerPolicy policy_;
  std::mt19937_64 rng_;
};

enum class EvaderMode { Strategy, Zero };

struct SimConfig {
  LinearPlant plant;
  StrategySchedule strategy;
  AvoidanceProblem problem;
  TimeScale ts = TimeScale::reals(0.0, 1.0);
  Eigen::VectorXd x0;
  PursuerPolicy pursuer;
  EvaderMode evader = EvaderMode::Strategy;
  double dense_step = kDefaultDenseStep;
  std::uint64_t seed = 0;
  bool keep_records = true;

  void validate() const;
};

struct StepResult {
  double t_next;
  Eigen::VectorXd x_next;
  Eigen::VectorXd u1;
  Eigen::VectorXd u2;
  Eigen::VectorXd xdelta;
};

/// One step of x^Δ = Ax + Bu1 + Cu2: exact x + μ x^Δ at right-scattered t,
/// one RK4 step (controls held) of size min(dense_step, distance to segment
/// end) at right-dense t.
StepResult step(const LinearPlant& plant, const StrategySchedule& strategy,
                Pursuer& pursuer, const TimeScale& ts, double t,
                const Eigen::VectorXd& x, double dense_step,
                EvaderMode evader = EvaderMode::Strategy);

struct Record {
  double t;
  Eigen::VectorXd x;
  Eigen::VectorXd u1;
  Eigen::VectorXd u2;
  Eigen::VectorXd xdelta;
  double V;
  double DV;
  Region region;
};

enum class VerdictKind { Avoided, EnteredA, LeftDomain };

struct Verdict {
  VerdictKind kind = VerdictKind::Avoided;
  double t = 0.0;  // first offending instant
};

std::string to_string(const Verdict& v);

struct Trajectory {
  std::vector<Record> records;  // empty when keep_records is off
  Verdict verdict;
  std::size_t steps = 0;
  double min_V = 0.0;
  double min_DV = 0.0;
  /// min over steps taken from the closed safety zone of
  /// (V(t_{k+1}) − V(t_k)) / (1 + V(t_k)); +inf if no such step
  double min_relative_V_increment = 0.0;
};

Trajectory simulate(const SimConfig& cfg);

struct FunnelSample {
  double t;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct Bundle {
  std::vector<Trajectory> trajectories;
  double min_V = 0.0;
  double min_DV = 0.0;
  double min_relative_V_increment = 0.0;
  std::size_t entries = 0;
  std::size_t left_domain = 0;
  std::vector<FunnelSample> funnel;  // per record time, when records are kept
};

/// n_runs simulations whose pursuer seeds derive deterministically from cfg.seed.
Bundle bundle(const SimConfig& cfg, std::size_t n_runs);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Columns: t, x1..xn, u1_1.., u2_1.., V, DV, region.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace tsavoid
