#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tsavoid/timescale.hpp"

namespace tsavoid {

inline constexpr double kDefaultFdStep = 1e-6;
inline constexpr double kMonotonicityTol = 1e-8;

/// Real-valued function sampled on a time scale, with an optional exact
/// Δ-derivative used at right-dense points.
struct ScalarSignal {
  std::function<double(double)> value;
  std::function<double(double)> derivative;  // may be empty

  double operator()(double t) const { return value(t); }
};

/// v(t, x) with optional analytic partials; missing partials fall back to
/// central finite differences.
struct StateFunction {
  using Value = std::function<double(double, const Eigen::VectorXd&)>;
  using Gradient =
      std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

  Value value;
  Value dt;         // ∂v/∂t, may be empty
  Gradient dx;      // ∂v/∂x, may be empty

  double operator()(double t, const Eigen::VectorXd& x) const {
    return value(t, x);
  }
};

double delta_derivative(const ScalarSignal& f, const TimeScale& ts, double t,
                        double h_fd = kDefaultFdStep);

/// Cauchy Δ-integral over [a, b]: graininess-weighted sum over right-scattered
/// points plus composite Simpson on dense pieces.
double delta_integral(const ScalarSignal& f, const TimeScale& ts, double a,
                      double b, double quad_step = 1e-3);

/// v(σ(t), x + μ(t) xdelta)
double zeta(const StateFunction& v, const TimeScale& ts, double t,
            const Eigen::VectorXd& x, const Eigen::VectorXd& xdelta);

/// Generalized rate of change of v along x^Δ = xdelta.
double d_operator(const StateFunction& v, const TimeScale& ts, double t,
                  const Eigen::VectorXd& x, const Eigen::VectorXd& xdelta,
                  double h_fd = kDefaultFdStep);

/// (f∘g)^Δ(t) = {∫₀¹ f'(g(t) + hμ(t)g^Δ(t)) dh} g^Δ(t), h-integral by
/// Gauss–Legendre with `quad_nodes` nodes.
double chain_rule_delta(const std::function<double(double)>& outer_derivative,
                        const ScalarSignal& g, const TimeScale& ts, double t,
                        int quad_nodes = 16);

struct Monotonicity {
  bool nondecreasing = false;
  bool nonincreasing = false;

  bool indefinite() const { return !nondecreasing && !nonincreasing; }
};

struct DeltaSample {
  double t;
  Eigen::VectorXd x;
  Eigen::VectorXd xdelta;
};

std::vector<Monotonicity> right_monotonicity(
    const StateFunction& v, const std::vector<DeltaSample>& traj,
    const TimeScale& ts, double tol = kMonotonicityTol);

/// Extension of f to the convex hull of the window, constant across gaps
/// at the value of the left gap endpoint.
std::function<double(double)> step_extension(const ScalarSignal& f,
                                             const TimeScale& ts);

/// Nodes and weights of the n-point Gauss–Legendre rule on [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre_unit(int n);

}  // namespace tsavoid
