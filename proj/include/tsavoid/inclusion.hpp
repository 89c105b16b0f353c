#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tsavoid/avoidance.hpp"
#include "tsavoid/delta_calculus.hpp"

namespace tsavoid {

inline constexpr double kExtractTol = 1e-7;

/// Nonempty finite subset of R^n.
using FinitePointSet = std::vector<Eigen::VectorXd>;

/// Strict lexicographic order: x ≺ y iff x_1 < y_1, or x_1 = y_1 and x_2 < y_2, ...
bool lex_less(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Lexicographically smallest point, by successive coordinate minimization:
/// keep the points minimizing coordinate 1, among them those minimizing
/// coordinate 2, and so on. Comparison is exact.
Eigen::VectorXd lex_min(const FinitePointSet& s);

/// Finite discretization of an admissible control set with a designated
/// fallback used when no control reproduces the observed rate.
struct ControlGrid {
  std::vector<Eigen::VectorXd> values;
  std::size_t fallback = 0;  // index into values

  void validate() const;
  const Eigen::VectorXd& fallback_value() const { return values.at(fallback); }
};

/// Cartesian product grid; the fallback is the point closest to the origin.
ControlGrid product_grid(const std::vector<std::vector<double>>& axes);

using Dynamics = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&,
                                               const Eigen::VectorXd&)>;

/// f(t, x, ω) = A x + B u1 + C u2 with ω = (u1, u2) stacked.
Dynamics linear_dynamics(const LinearPlant& plant);

/// Lexicographically first ω with ‖f(t,x,ω) − xdelta‖∞ <= tol (1 + ‖xdelta‖∞),
/// or the fallback when none matches.
Eigen::VectorXd filippov_extract(const Dynamics& f, const ControlGrid& grid,
                                 double t, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xdelta,
                                 double tol = kExtractTol);

struct ExtractedControl {
  std::vector<Eigen::VectorXd> controls;
  std::vector<bool> fallback_used;
  std::size_t mismatches = 0;
};

ExtractedControl extract_along_trajectory(const Dynamics& f, const ControlGrid& grid,
                                          const std::vector<DeltaSample>& traj,
                                          double tol = kExtractTol);

}  // namespace tsavoid
