#include "tsavoid/delta_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tsavoid/errors.hpp"

namespace tsavoid {

namespace {

// Room available for finite differences around t inside its segment.
struct Room {
  double left;
  double right;
};

Room segment_room(const TimeScale& ts, double t) {
  const Segment& s = ts.segments()[ts.segment_index(t)];
  return {std::max(0.0, t - s.left), std::max(0.0, s.right - t)};
}

// Central difference when the segment leaves room on both sides, otherwise
// the second-order one-sided three-point stencil.
template <typename F>
double dense_difference(const F& g, double t, double h, Room room) {
  if (room.left >= h && room.right >= h) {
    return (g(t + h) - g(t - h)) / (2.0 * h);
  }
  if (room.right >= room.left && room.right > 0.0) {
    const double s = std::min(h, 0.5 * room.right);
    return (-3.0 * g(t) + 4.0 * g(t + s) - g(t + 2.0 * s)) / (2.0 * s);
  }
  if (room.left > 0.0) {
    const double s = std::min(h, 0.5 * room.left);
    return (3.0 * g(t) - 4.0 * g(t - s) + g(t - 2.0 * s)) / (2.0 * s);
  }
  throw DomainError("no dense neighbourhood for a finite difference");
}

double simpson(const std::function<double(double)>& f, double lo, double hi,
               double step) {
  auto n = static_cast<long long>(std::ceil((hi - lo) / (2.0 * step) - 1e-12));
  n = std::max<long long>(n, 1) * 2;
  const double h = (hi - lo) / static_cast<double>(n);
  double acc = f(lo) + f(hi);
  for (long long k = 1; k < n; ++k) {
    acc += (k % 2 == 1 ? 4.0 : 2.0) * f(lo + h * static_cast<double>(k));
  }
  return acc * h / 3.0;
}

}  // namespace

double delta_derivative(const ScalarSignal& f, const TimeScale& ts, double t,
                        double h_fd) {
  const PointClass pc = ts.classify(t);
  if (pc.right_scattered()) {
    const double mu = ts.graininess(t);
    return (f(ts.sigma(t)) - f(t)) / mu;
  }
  if (pc.max_point() && !pc.left_dense()) {
    throw DomainError("delta derivative undefined at an isolated window maximum");
  }
  if (f.derivative) return f.derivative(t);
  return dense_difference(f.value, t, h_fd, segment_room(ts, t));
}

double delta_integral(const ScalarSignal& f, const TimeScale& ts, double a,
                      double b, double quad_step) {
  if (a > b) throw DomainError("delta_integral requires a <= b");
  if (!ts.contains(a) || !ts.contains(b)) {
    throw DomainError("integration limits must be members of the time scale");
  }
  if (!(quad_step > 0.0)) throw DomainError("quadrature step must be positive");
  const auto& segs = ts.segments();
  double total = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    if (s.left > b + kMembershipTol) break;
    if (s.right < a - kMembershipTol) continue;
    const double lo = std::max(s.left, a);
    const double hi = std::min(s.right, b);
    if (hi - lo > kMembershipTol) total += simpson(f.value, lo, hi, quad_step);
    // the right endpoint is right-scattered unless it is the window maximum
    if (i + 1 < segs.size() && s.right < b - kMembershipTol) {
      total += f(s.right) * ts.graininess(s.right);
    }
  }
  return total;
}

double zeta(const StateFunction& v, const TimeScale& ts, double t,
            const Eigen::VectorXd& x, const Eigen::VectorXd& xdelta) {
  const double mu = ts.graininess(t);
  if (mu == 0.0) return v(t, x);
  return v(t + mu, x + mu * xdelta);
}

double d_operator(const StateFunction& v, const TimeScale& ts, double t,
                  const Eigen::VectorXd& x, const Eigen::VectorXd& xdelta,
                  double h_fd) {
  const double mu = ts.graininess(t);
  if (mu > 0.0) return (zeta(v, ts, t, x, xdelta) - v(t, x)) / mu;

  double dvdt = 0.0;
  if (v.dt) {
    dvdt = v.dt(t, x);
  } else {
    const Room room = segment_room(ts, t);
    if (room.left > 0.0 || room.right > 0.0) {
      dvdt = dense_difference([&](double s) { return v(s, x); }, t, h_fd, room);
    }
  }

  Eigen::VectorXd grad;
  if (v.dx) {
    grad = v.dx(t, x);
  } else {
    grad.resize(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = h_fd * std::max(1.0, std::abs(x(i)));
      xp(i) = x(i) + h;
      const double up = v(t, xp);
      xp(i) = x(i) - h;
      const double down = v(t, xp);
      xp(i) = x(i);
      grad(i) = (up - down) / (2.0 * h);
    }
  }
  return dvdt + grad.dot(xdelta);
}

QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1) throw DomainError("Gauss-Legendre rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    // map [-1, 1] -> [0, 1]
    rule.nodes[lo] = 0.5 * (1.0 - z);
    rule.nodes[hi] = 0.5 * (1.0 + z);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  return rule;
}

double chain_rule_delta(const std::function<double(double)>& outer_derivative,
                        const ScalarSignal& g, const TimeScale& ts, double t,
                        int quad_nodes) {
  const double gd = delta_derivative(g, ts, t);
  const double mu = ts.graininess(t);
  const double g0 = g(t);
  const QuadratureRule rule = gauss_legendre_unit(quad_nodes);
  double integral = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    integral += rule.weights[k] * outer_derivative(g0 + rule.nodes[k] * mu * gd);
  }
  return integral * gd;
}

std::vector<Monotonicity> right_monotonicity(
    const StateFunction& v, const std::vector<DeltaSample>& traj,
    const TimeScale& ts, double tol) {
  std::vector<Monotonicity> out;
  out.reserve(traj.size());
  for (const DeltaSample& s : traj) {
    const double d = d_operator(v, ts, s.t, s.x, s.xdelta);
    out.push_back({d >= -tol, d <= tol});
  }
  return out;
}

std::function<double(double)> step_extension(const ScalarSignal& f,
                                             const TimeScale& ts) {
  return [f, ts](double t) {
    if (t < ts.min() - kMembershipTol || t > ts.max() + kMembershipTol) {
      throw DomainError("step extension evaluated outside the window hull");
    }
    const auto& segs = ts.segments();
    auto it = std::upper_bound(
        segs.begin(), segs.end(), t + kMembershipTol,
        [](double v, const Segment& s) { return v < s.left; });
    const Segment& s = *(it - 1);
    if (t <= s.right + kMembershipTol) return f(t);
    return f(s.right);
  };
}

}  // namespace tsavoid
