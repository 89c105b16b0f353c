#include "tsavoid/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tsavoid/delta_calculus.hpp"
#include "tsavoid/errors.hpp"

namespace tsavoid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Classical RK4 for x' = A x + c with c held constant over the step.
Eigen::VectorXd rk4(const Eigen::MatrixXd& A, const Eigen::VectorXd& c,
                    const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = A * x + c;
  const Eigen::VectorXd k2 = A * (x + 0.5 * h * k1) + c;
  const Eigen::VectorXd k3 = A * (x + 0.5 * h * k2) + c;
  const Eigen::VectorXd k4 = A * (x + h * k3) + c;
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Controls {
  Eigen::VectorXd u1;
  Eigen::VectorXd u2;
};

Controls controls_at(const LinearPlant& plant, const StrategySchedule& strategy,
                     Pursuer& pursuer, EvaderMode evader, double mu, double t,
                     const Eigen::VectorXd& x) {
  const StrategyParams& sp = strategy.at(mu);
  Controls c;
  c.u1 = evader == EvaderMode::Zero ? Eigen::VectorXd::Zero(plant.evader_inputs())
                                    : strategy_control(sp, plant.B, x);
  c.u2 = pursuer.control(plant, sp, t, x);
  return c;
}

// The window maximum has μ=0 by convention; its controls follow the step
// that reached it.
double control_graininess(const TimeScale& ts, double t) {
  if (ts.classify(t).max_point()) return ts.graininess(ts.rho(t));
  return ts.graininess(t);
}

StateFunction quadratic_value(const Eigen::MatrixXd& Q) {
  StateFunction v;
  v.value = [Q](double, const Eigen::VectorXd& x) { return x.dot(Q * x); };
  v.dt = [](double, const Eigen::VectorXd&) { return 0.0; };
  v.dx = [Q](double, const Eigen::VectorXd& x) {
    return Eigen::VectorXd(2.0 * (Q * x));
  };
  return v;
}

}  // namespace

Pursuer::Pursuer(PursuerPolicy policy, std::uint64_t seed)
    : policy_(std::move(policy)), rng_(seed) {}

Eigen::VectorXd Pursuer::control(const LinearPlant& plant, const StrategyParams& sp,
                                 double t, const Eigen::VectorXd& x) {
  switch (policy_.kind) {
    case PursuerKind::WorstCase:
      return worst_pursuer_control(sp, plant.C, plant.alpha2, x);
    case PursuerKind::Random: {
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      Eigen::VectorXd u(plant.pursuer_inputs());
      double norm = 0.0;
      while (norm == 0.0) {
        for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng_);
        norm = u.norm();
      }
      return (plant.alpha2 * uniform(rng_) / norm) * u;
    }
    case PursuerKind::Constant:
      return policy_.constant;
    case PursuerKind::Scripted:
      return policy_.script(t, x);
  }
  throw std::logic_error("unknown pursuer policy");
}

void SimConfig::validate() const {
  plant.validate();
  problem.validate();
  if (problem.Q.rows() != plant.states()) {
    throw std::invalid_argument("simulation: avoidance Q order differs from plant");
  }
  if (x0.size() != plant.states()) {
    throw std::invalid_argument("simulation: x0 has wrong dimension");
  }
  if (!(dense_step > 0.0)) throw std::invalid_argument("simulation: dense_step must be positive");
  if (set_membership(problem, x0) == Region::InsideA) {
    throw std::invalid_argument("simulation: x0 lies inside the avoidance set");
  }
  if (pursuer.kind == PursuerKind::Constant &&
      pursuer.constant.size() != plant.pursuer_inputs()) {
    throw std::invalid_argument("simulation: constant pursuer control has wrong dimension");
  }
  if (pursuer.kind == PursuerKind::Scripted && !pursuer.script) {
    throw std::invalid_argument("simulation: scripted pursuer without a script");
  }
  std::vector<double> mus = distinct_graininess(ts);
  if (mus.empty()) mus.push_back(0.0);
  for (double mu : mus) strategy.at(mu);
}

StepResult step(const LinearPlant& plant, const StrategySchedule& strategy,
                Pursuer& pursuer, const TimeScale& ts, double t,
                const Eigen::VectorXd& x, double dense_step, EvaderMode evader) {
  const PointClass pc = ts.classify(t);
  if (pc.max_point()) throw DomainError("step requested at the window maximum");
  const double mu = ts.graininess(t);
  Controls c = controls_at(plant, strategy, pursuer, evader, mu, t, x);
  const Eigen::VectorXd forcing = plant.B * c.u1 + plant.C * c.u2;
  StepResult r;
  r.xdelta = plant.A * x + forcing;
  if (pc.right_scattered()) {
    r.t_next = ts.sigma(t);
    r.x_next = x + mu * r.xdelta;
  } else {
    const Segment& s = ts.segments()[ts.segment_index(t)];
    const double h = std::min(dense_step, s.right - t);
    r.t_next = t + h;
    r.x_next = rk4(plant.A, forcing, x, h);
  }
  r.u1 = std::move(c.u1);
  r.u2 = std::move(c.u2);
  return r;
}

std::string to_string(const Verdict& v) {
  std::ostringstream os;
  os.precision(17);
  switch (v.kind) {
    case VerdictKind::Avoided:
      return "avoided";
    case VerdictKind::EnteredA:
      os << "entered_A_at " << v.t;
      return os.str();
    case VerdictKind::LeftDomain:
      os << "left_domain_at " << v.t;
      return os.str();
  }
  return "unknown";
}

Trajectory simulate(const SimConfig& cfg) {
  cfg.validate();
  const LinearPlant& plant = cfg.plant;
  const std::vector<double> grid = sample(cfg.ts, cfg.dense_step);
  const StateFunction V = quadratic_value(cfg.problem.Q);
  Pursuer pursuer(cfg.pursuer, cfg.seed);

  Trajectory traj;
  traj.min_V = kInf;
  traj.min_DV = kInf;
  traj.min_relative_V_increment = kInf;
  if (cfg.keep_records) traj.records.reserve(grid.size());

  Eigen::VectorXd x = cfg.x0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double mu = cfg.ts.graininess(t);
    const Region region = set_membership(cfg.problem, x);
    Controls c = controls_at(plant, cfg.strategy, pursuer, cfg.evader,
                             control_graininess(cfg.ts, t), t, x);
    const Eigen::VectorXd forcing = plant.B * c.u1 + plant.C * c.u2;
    Eigen::VectorXd xdelta = plant.A * x + forcing;
    const double v = V(t, x);
    const double dv = d_operator(V, cfg.ts, t, x, xdelta);
    traj.min_V = std::min(traj.min_V, v);
    traj.min_DV = std::min(traj.min_DV, dv);
    if (cfg.keep_records) {
      traj.records.push_back({t, x, std::move(c.u1), std::move(c.u2), xdelta, v, dv, region});
    }

    if (region == Region::InsideA) {
      traj.verdict = {VerdictKind::EnteredA, t};
      break;
    }
    if (!cfg.problem.in_domain(x)) {
      traj.verdict = {VerdictKind::LeftDomain, t};
      break;
    }
    if (k + 1 == grid.size()) break;

    Eigen::VectorXd next = mu > 0.0 ? Eigen::VectorXd(x + mu * xdelta)
                                    : rk4(plant.A, forcing, x, grid[k + 1] - t);
    if (region == Region::SafetyZone || region == Region::BoundaryA) {
      traj.min_relative_V_increment =
          std::min(traj.min_relative_V_increment, (V(t, next) - v) / (1.0 + v));
    }
    x = std::move(next);
    ++traj.steps;
  }
  return traj;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Bundle bundle(const SimConfig& cfg, std::size_t n_runs) {
  if (n_runs == 0) throw std::invalid_argument("bundle needs at least one run");
  cfg.validate();
  Bundle out;
  out.trajectories.resize(n_runs);

  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, n_runs);
  auto run_range = [&](std::size_t w) {
    for (std::size_t i = w; i < n_runs; i += workers) {
      SimConfig c = cfg;
      c.seed = derive_seed(cfg.seed, i);
      out.trajectories[i] = simulate(c);
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
  }

  out.min_V = kInf;
  out.min_DV = kInf;
  out.min_relative_V_increment = kInf;
  for (const Trajectory& tr : out.trajectories) {
    out.min_V = std::min(out.min_V, tr.min_V);
    out.min_DV = std::min(out.min_DV, tr.min_DV);
    out.min_relative_V_increment =
        std::min(out.min_relative_V_increment, tr.min_relative_V_increment);
    if (tr.verdict.kind == VerdictKind::EnteredA) ++out.entries;
    if (tr.verdict.kind == VerdictKind::LeftDomain) ++out.left_domain;
    for (std::size_t j = 0; j < tr.records.size(); ++j) {
      const Record& r = tr.records[j];
      if (j == out.funnel.size()) {
        out.funnel.push_back({r.t, r.x, r.x});
      } else {
        out.funnel[j].lower = out.funnel[j].lower.cwiseMin(r.x);
        out.funnel[j].upper = out.funnel[j].upper.cwiseMax(r.x);
      }
    }
  }
  return out;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.records.empty()) {
    os << "t,V,DV,region\n";
    return;
  }
  const Record& first = traj.records.front();
  os << "t";
  for (Eigen::Index i = 0; i < first.x.size(); ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < first.u1.size(); ++i) os << ",u1_" << i + 1;
  for (Eigen::Index i = 0; i < first.u2.size(); ++i) os << ",u2_" << i + 1;
  os << ",V,DV,region\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (const Record& r : traj.records) {
    num(r.t);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) os << ',', num(r.x(i));
    for (Eigen::Index i = 0; i < r.u1.size(); ++i) os << ',', num(r.u1(i));
    for (Eigen::Index i = 0; i < r.u2.size(); ++i) os << ',', num(r.u2(i));
    os << ',';
    num(r.V);
    os << ',';
    num(r.DV);
    os << ',' << to_string(r.region) << '\n';
  }
}

}  // namespace tsavoid
