#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsavoid/timescale.hpp"
#include "tsavoid/ts_linalg.hpp"

namespace tsavoid {

inline constexpr double kMatchingTol = 1e-8;
inline constexpr double kDefaultDeadband = 1e-9;
inline constexpr double kSetTol = 1e-9;
inline constexpr double kVerifyTol = 1e-8;

/// x^Δ = A x + B u1 + C u2 with ‖u1‖ <= alpha1 (evader), ‖u2‖ <= alpha2 (pursuer).
struct LinearPlant {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  double alpha1 = 1.0;
  double alpha2 = 1.0;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index evader_inputs() const { return B.cols(); }
  Eigen::Index pursuer_inputs() const { return C.cols(); }

  /// Throws std::invalid_argument on inconsistent dimensions or bounds.
  void validate() const;

  Eigen::VectorXd rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& u1,
                      const Eigen::VectorXd& u2) const {
    return A * x + B * u1 + C * u2;
  }
};

enum class StrategyMode {
  Stabilized,  // p1 = Kx + gain * unit(B^T Q x)
  Pure,        // p1 = alpha1 * unit(B^T Q x), K = 0
};

/// Evader strategy data synthesized for one graininess value.
struct StrategyParams {
  StrategyMode mode = StrategyMode::Stabilized;
  double mu = 0.0;
  Eigen::MatrixXd K;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd D;
  double gain = 0.0;  // ‖D‖₂ α₂ unless overridden
  double alpha1 = 0.0;
  double deadband = kDefaultDeadband;
  HilgerReport<double> hilger;  // of -(A + BK), informational
};

/// Minimum-norm D with C = B D; throws MatchingError when the residual exceeds 1e-8.
Eigen::MatrixXd solve_matching(const Eigen::MatrixXd& B, const Eigen::MatrixXd& C);

double spectral_norm(const Eigen::MatrixXd& m);

/// D from the matching condition, Q solving the Lyapunov equation for the
/// closed loop A + BK with right-hand side M at graininess mu.
StrategyParams synthesize(const LinearPlant& plant, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& M, double mu,
                          double deadband = kDefaultDeadband);

/// Pure mode: K = 0, Q from A itself, strategy amplitude alpha1.
StrategyParams synthesize_pure(const LinearPlant& plant, const Eigen::MatrixXd& M,
                               double mu, double deadband = kDefaultDeadband);

/// One StrategyParams per distinct graininess value of a window.
class StrategySchedule {
 public:
  StrategySchedule() = default;
  explicit StrategySchedule(std::vector<StrategyParams> entries);

  static StrategySchedule build(const LinearPlant& plant, const TimeScale& ts,
                                StrategyMode mode, const Eigen::MatrixXd& K,
                                const Eigen::MatrixXd& M,
                                double deadband = kDefaultDeadband);

  const StrategyParams& at(double mu) const;
  const std::vector<StrategyParams>& entries() const { return entries_; }
  std::vector<StrategyParams>& entries() { return entries_; }

  /// Replaces the switching amplitude of every entry (gain in stabilized
  /// mode, alpha1 in pure mode).
  void override_gain(double gain);

 private:
  std::vector<StrategyParams> entries_;
};

Eigen::VectorXd evader_control(const StrategyParams& sp, const Eigen::MatrixXd& B,
                               const Eigen::VectorXd& x);

Eigen::VectorXd pure_evader_control(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& B,
                                    double alpha1, const Eigen::VectorXd& x,
                                    double deadband = kDefaultDeadband);

/// Dispatches on sp.mode.
Eigen::VectorXd strategy_control(const StrategyParams& sp, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& x);

Eigen::VectorXd worst_pursuer_control(const StrategyParams& sp, const Eigen::MatrixXd& C,
                                      double alpha2, const Eigen::VectorXd& x);

/// Avoidance set {x : xᵀQx <= a} inside the zone {x : xᵀQx <= a + ε} inside the box.
struct AvoidanceProblem {
  Eigen::MatrixXd Q;
  double level = 1.0;
  double epsilon = 1.0;
  Eigen::VectorXd lower;  // empty = unbounded
  Eigen::VectorXd upper;

  void validate() const;
  double value(const Eigen::VectorXd& x) const { return x.dot(Q * x); }
  bool in_domain(const Eigen::VectorXd& x) const;
};

enum class Region { InsideA, BoundaryA, SafetyZone, OutsideZone };

std::string to_string(Region r);

Region set_membership(const AvoidanceProblem& ap, const Eigen::VectorXd& x);

/// D(V) for V = xᵀQx along x^Δ = f at graininess mu, using the exact quadratic
/// update when mu > 0.
double quadratic_d_operator(const Eigen::MatrixXd& Q, double mu,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& f);

struct VerifyOptions {
  int radial = 40;            // levels across the safety zone
  int angular = 40;           // directions (n = 2) or direction samples (n > 2)
  int pursuer_samples = 64;
  double tolerance = kVerifyTol;
};

struct VerifyWitness {
  double t = 0.0;
  double mu = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u1;
  Eigen::VectorXd u2;
  double value = 0.0;
};

struct VerifyReport {
  bool condition_i = false;
  double condition_i_margin = 0.0;  // min V over the zone minus a
  bool condition_ii = false;
  double condition_ii_margin = 0.0;  // min D(V) over grid x controls
  VerifyWitness witness;
  std::size_t grid_points = 0;
  std::size_t evaluations = 0;
  double max_evader_norm = 0.0;  // admissibility diagnostic against alpha1

  bool passed() const { return condition_i && condition_ii; }
};

/// Deterministic unit directions in R^d: the sign pair for d = 1, an even
/// angular sweep for d = 2, a Fibonacci lattice for d = 3, and axes plus
/// diagonals above.
std::vector<Eigen::VectorXd> unit_directions(Eigen::Index d, int count);

/// Checks the two sufficient conditions for avoidability on an annulus grid:
/// (i) V exceeds the boundary level on the safety zone, (ii) D(V) >= -tol for
/// every sampled pursuer control at every distinct graininess of the window.
VerifyReport verify_conditions(const LinearPlant& plant,
                               const StrategySchedule& schedule,
                               const AvoidanceProblem& ap, const TimeScale& ts,
                               const VerifyOptions& opts = {});

}  // namespace tsavoid
