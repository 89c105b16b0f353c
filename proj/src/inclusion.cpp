#include "tsavoid/inclusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsavoid {

bool lex_less(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = std::min(x.size(), y.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x(i) < y(i)) return true;
    if (y(i) < x(i)) return false;
  }
  return x.size() < y.size();
}

Eigen::VectorXd lex_min(const FinitePointSet& s) {
  if (s.empty()) throw std::invalid_argument("lex_min of an empty set");
  const Eigen::Index n = s.front().size();
  std::vector<const Eigen::VectorXd*> candidates;
  candidates.reserve(s.size());
  for (const Eigen::VectorXd& p : s) {
    if (p.size() != n) throw std::invalid_argument("lex_min: points differ in dimension");
    candidates.push_back(&p);
  }
  for (Eigen::Index k = 0; k < n && candidates.size() > 1; ++k) {
    double m = (*candidates.front())(k);
    for (const Eigen::VectorXd* p : candidates) m = std::min(m, (*p)(k));
    std::erase_if(candidates, [&](const Eigen::VectorXd* p) { return (*p)(k) != m; });
  }
  return *candidates.front();
}

void ControlGrid::validate() const {
  if (values.empty()) throw std::invalid_argument("control grid is empty");
  if (fallback >= values.size()) {
    throw std::invalid_argument("control grid fallback is not a grid element");
  }
}

ControlGrid product_grid(const std::vector<std::vector<double>>& axes) {
  ControlGrid grid;
  if (axes.empty()) return grid;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (const auto& ax : axes) {
    if (ax.empty()) throw std::invalid_argument("product_grid: empty axis");
  }
  bool more = true;
  while (more) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(axes.size()));
    for (std::size_t i = 0; i < axes.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = axes[i][idx[i]];
    }
    grid.values.push_back(v);
    // odometer increment, last axis fastest
    more = false;
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++idx[i] < axes[i].size()) {
        more = true;
        break;
      }
      idx[i] = 0;
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.values.size(); ++i) {
    if (grid.values[i].norm() < grid.values[best].norm()) best = i;
  }
  grid.fallback = best;
  return grid;
}

Dynamics linear_dynamics(const LinearPlant& plant) {
  const Eigen::Index d1 = plant.evader_inputs();
  const Eigen::Index d2 = plant.pursuer_inputs();
  return [plant, d1, d2](double, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    return Eigen::VectorXd(plant.A * x + plant.B * w.head(d1) + plant.C * w.segment(d1, d2));
  };
}

namespace {

// W = {ω : ‖f(t,x,ω) − xdelta‖∞ <= tol (1 + ‖xdelta‖∞)}
FinitePointSet matching_controls(const Dynamics& f, const ControlGrid& grid,
                                 double t, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xdelta, double tol) {
  const double threshold = tol * (1.0 + xdelta.lpNorm<Eigen::Infinity>());
  FinitePointSet admissible;
  for (const Eigen::VectorXd& w : grid.values) {
    if ((f(t, x, w) - xdelta).lpNorm<Eigen::Infinity>() <= threshold) {
      admissible.push_back(w);
    }
  }
  return admissible;
}

}  // namespace

Eigen::VectorXd filippov_extract(const Dynamics& f, const ControlGrid& grid,
                                 double t, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xdelta, double tol) {
  grid.validate();
  const FinitePointSet w = matching_controls(f, grid, t, x, xdelta, tol);
  return w.empty() ? grid.fallback_value() : lex_min(w);
}

ExtractedControl extract_along_trajectory(const Dynamics& f, const ControlGrid& grid,
                                          const std::vector<DeltaSample>& traj,
                                          double tol) {
  grid.validate();
  ExtractedControl out;
  out.controls.reserve(traj.size());
  for (const DeltaSample& s : traj) {
    const FinitePointSet admissible =
        matching_controls(f, grid, s.t, s.x, s.xdelta, tol);
    const bool fallback = admissible.empty();
    out.controls.push_back(fallback ? grid.fallback_value() : lex_min(admissible));
    out.fallback_used.push_back(fallback);
    if (fallback) ++out.mismatches;
  }
  return out;
}

}  // namespace tsavoid
