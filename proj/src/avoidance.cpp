#include "tsavoid/avoidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tsavoid/errors.hpp"

namespace tsavoid {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

Eigen::VectorXd unit_or_zero(const Eigen::VectorXd& w, double deadband) {
  const double norm = w.norm();
  if (norm > deadband) return w / norm;
  return Eigen::VectorXd::Zero(w.size());
}

void require_spd(const Eigen::MatrixXd& M, const char* name) {
  require(M.rows() == M.cols(), std::string(name) + " must be square");
  require(symmetry_defect(M) <= kSymmetryTol * std::max(1.0, inf_norm(M)),
          std::string(name) + " must be symmetric");
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  require(llt.info() == Eigen::Success,
          std::string(name) + " must be positive definite");
}

}  // namespace

void LinearPlant::validate() const {
  const Eigen::Index n = A.rows();
  require(n > 0 && A.cols() == n, "plant: A must be square and nonempty");
  require(B.rows() == n && B.cols() > 0, "plant: B must have n rows");
  require(C.rows() == n && C.cols() > 0, "plant: C must have n rows");
  require(A.allFinite() && B.allFinite() && C.allFinite(),
          "plant: matrices must be finite");
  require(alpha1 >= 0.0 && alpha2 >= 0.0, "plant: control bounds must be nonnegative");
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::MatrixXd solve_matching(const Eigen::MatrixXd& B, const Eigen::MatrixXd& C) {
  require(B.rows() == C.rows(), "matching: B and C must have equal row counts");
  const Eigen::MatrixXd D = B.completeOrthogonalDecomposition().solve(C);
  const double residual = inf_norm(C - B * D);
  if (!(residual <= kMatchingTol)) {
    std::ostringstream os;
    os << "matching condition C = B D violated: residual " << residual
       << " exceeds " << kMatchingTol << " (C is not in the column space of B)";
    throw MatchingError(os.str());
  }
  return D;
}

StrategyParams synthesize(const LinearPlant& plant, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& M, double mu, double deadband) {
  plant.validate();
  require(K.rows() == plant.evader_inputs() && K.cols() == plant.states(),
          "synthesize: K must be d1 x n");
  require_spd(M, "M");
  StrategyParams sp;
  sp.mode = StrategyMode::Stabilized;
  sp.mu = mu;
  sp.K = K;
  sp.D = solve_matching(plant.B, plant.C);
  const Eigen::MatrixXd closed = plant.A + plant.B * K;
  sp.Q = lyapunov_solve(closed, M, mu);
  sp.gain = spectral_norm(sp.D) * plant.alpha2;
  sp.alpha1 = plant.alpha1;
  sp.deadband = deadband;
  sp.hilger = hilger_check(Eigen::MatrixXd(-closed), mu);
  return sp;
}

StrategyParams synthesize_pure(const LinearPlant& plant, const Eigen::MatrixXd& M,
                               double mu, double deadband) {
  plant.validate();
  require_spd(M, "M");
  StrategyParams sp;
  sp.mode = StrategyMode::Pure;
  sp.mu = mu;
  sp.K = Eigen::MatrixXd::Zero(plant.evader_inputs(), plant.states());
  sp.D = solve_matching(plant.B, plant.C);
  sp.Q = lyapunov_solve(plant.A, M, mu);
  sp.gain = spectral_norm(sp.D) * plant.alpha2;
  sp.alpha1 = plant.alpha1;
  sp.deadband = deadband;
  sp.hilger = hilger_check(Eigen::MatrixXd(-plant.A), mu);
  return sp;
}

StrategySchedule::StrategySchedule(std::vector<StrategyParams> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const StrategyParams& a, const StrategyParams& b) { return a.mu < b.mu; });
}

StrategySchedule StrategySchedule::build(const LinearPlant& plant,
                                         const TimeScale& ts, StrategyMode mode,
                                         const Eigen::MatrixXd& K,
                                         const Eigen::MatrixXd& M,
                                         double deadband) {
  std::vector<double> mus = distinct_graininess(ts);
  if (mus.empty()) mus.push_back(0.0);
  std::vector<StrategyParams> entries;
  for (double mu : mus) {
    entries.push_back(mode == StrategyMode::Pure
                          ? synthesize_pure(plant, M, mu, deadband)
                          : synthesize(plant, K, M, mu, deadband));
  }
  return StrategySchedule(std::move(entries));
}

const StrategyParams& StrategySchedule::at(double mu) const {
  for (const StrategyParams& sp : entries_) {
    if (std::abs(sp.mu - mu) <= 1e-9 * (1.0 + mu)) return sp;
  }
  std::ostringstream os;
  os << "no strategy synthesized for graininess " << mu;
  throw DomainError(os.str());
}

void StrategySchedule::override_gain(double gain) {
  for (StrategyParams& sp : entries_) {
    sp.gain = gain;
    sp.alpha1 = gain;
  }
}

Eigen::VectorXd evader_control(const StrategyParams& sp, const Eigen::MatrixXd& B,
                               const Eigen::VectorXd& x) {
  const Eigen::VectorXd w = B.transpose() * (sp.Q * x);
  return sp.K * x + unit_or_zero(w, sp.deadband) * sp.gain;
}

Eigen::VectorXd pure_evader_control(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& B,
                                    double alpha1, const Eigen::VectorXd& x,
                                    double deadband) {
  const Eigen::VectorXd w = B.transpose() * (Q * x);
  return unit_or_zero(w, deadband) * alpha1;
}

Eigen::VectorXd strategy_control(const StrategyParams& sp, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& x) {
  if (sp.mode == StrategyMode::Pure) {
    return pure_evader_control(sp.Q, B, sp.alpha1, x, sp.deadband);
  }
  return evader_control(sp, B, x);
}

Eigen::VectorXd worst_pursuer_control(const StrategyParams& sp, const Eigen::MatrixXd& C,
                                      double alpha2, const Eigen::VectorXd& x) {
  const Eigen::VectorXd w = C.transpose() * (sp.Q * x);
  return -alpha2 * unit_or_zero(w, sp.deadband);
}

void AvoidanceProblem::validate() const {
  require(Q.rows() > 0 && Q.rows() == Q.cols(), "avoidance: Q must be square");
  require(level > 0.0, "avoidance: level a must be positive");
  require(epsilon > 0.0, "avoidance: epsilon must be positive");
  require(lower.size() == 0 || lower.size() == Q.rows(),
          "avoidance: box lower bound has wrong size");
  require(upper.size() == 0 || upper.size() == Q.rows(),
          "avoidance: box upper bound has wrong size");
}

bool AvoidanceProblem::in_domain(const Eigen::VectorXd& x) const {
  if (lower.size() != 0 && (x.array() < lower.array()).any()) return false;
  if (upper.size() != 0 && (x.array() > upper.array()).any()) return false;
  return x.allFinite();
}

std::string to_string(Region r) {
  switch (r) {
    case Region::InsideA:
      return "inside_A";
    case Region::BoundaryA:
      return "boundary_A";
    case Region::SafetyZone:
      return "safety_zone";
    case Region::OutsideZone:
      return "outside_zone";
  }
  return "unknown";
}

Region set_membership(const AvoidanceProblem& ap, const Eigen::VectorXd& x) {
  const double q = ap.value(x);
  if (q < ap.level - kSetTol) return Region::InsideA;
  if (q <= ap.level + kSetTol) return Region::BoundaryA;
  if (q <= ap.level + ap.epsilon + kSetTol) return Region::SafetyZone;
  return Region::OutsideZone;
}

double quadratic_d_operator(const Eigen::MatrixXd& Q, double mu,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  // ((x + μf)ᵀQ(x + μf) - xᵀQx)/μ expanded; μ = 0 gives the classical 2xᵀQf
  const Eigen::VectorXd Qf = Q * f;
  return 2.0 * x.dot(Qf) + mu * f.dot(Qf);
}

std::vector<Eigen::VectorXd> unit_directions(Eigen::Index d, int count) {
  std::vector<Eigen::VectorXd> dirs;
  if (d <= 0) return dirs;
  if (d == 1) {
    dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
    dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return dirs;
  }
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      Eigen::VectorXd u(2);
      u << std::cos(th), std::sin(th);
      dirs.push_back(u);
    }
    return dirs;
  }
  if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(1.0 - z * z);
      Eigen::VectorXd u(3);
      u << r * std::cos(golden * k), r * std::sin(golden * k), z;
      dirs.push_back(u);
    }
    return dirs;
  }
  for (Eigen::Index i = 0; i < d && static_cast<int>(dirs.size()) < count; ++i) {
    dirs.push_back(Eigen::VectorXd::Unit(d, i));
    dirs.push_back(-Eigen::VectorXd::Unit(d, i));
  }
  // sign-pattern diagonals, enumerated in binary order
  for (std::uint64_t mask = 0; static_cast<int>(dirs.size()) < count && mask < (1ULL << std::min<Eigen::Index>(d, 20)); ++mask) {
    Eigen::VectorXd u(d);
    for (Eigen::Index i = 0; i < d; ++i) u(i) = (mask >> (i % 64)) & 1ULL ? -1.0 : 1.0;
    dirs.push_back(u.normalized());
  }
  return dirs;
}

namespace {

// Pursuer candidates: sphere samples, the analytic worst case for the
// strategy's Q, the steepest-descent direction of D(V) at u2 = 0, and the
// minimizer of the (convex) quadratic D(V) projected onto the ball.
std::vector<Eigen::VectorXd> pursuer_candidates(
    const LinearPlant& plant, const StrategyParams& sp, const Eigen::MatrixXd& Qv,
    double mu, const Eigen::VectorXd& x, const Eigen::VectorXd& g0,
    const std::vector<Eigen::VectorXd>& dirs) {
  const double a2 = plant.alpha2;
  std::vector<Eigen::VectorXd> out;
  out.push_back(Eigen::VectorXd::Zero(plant.pursuer_inputs()));
  if (a2 == 0.0) return out;
  for (const Eigen::VectorXd& u : dirs) out.push_back(a2 * u);
  out.push_back(worst_pursuer_control(sp, plant.C, a2, x));
  const Eigen::VectorXd grad = plant.C.transpose() * (Qv * (x + mu * g0));
  if (grad.norm() > 0.0) out.push_back(-a2 * grad.normalized());
  if (mu > 0.0) {
    const Eigen::MatrixXd H = mu * plant.C.transpose() * Qv * plant.C;
    Eigen::VectorXd u = -H.completeOrthogonalDecomposition().solve(grad);
    if (u.allFinite()) {
      if (u.norm() > a2) u *= a2 / u.norm();
      out.push_back(u);
    }
  }
  return out;
}

}  // namespace

VerifyReport verify_conditions(const LinearPlant& plant,
                               const StrategySchedule& schedule,
                               const AvoidanceProblem& ap, const TimeScale& ts,
                               const VerifyOptions& opts) {
  plant.validate();
  ap.validate();
  require(ap.Q.rows() == plant.states(), "verify: Q order differs from plant");
  require(opts.radial > 0 && opts.angular > 0 && opts.pursuer_samples > 0,
          "verify: grid sizes must be positive");

  const Eigen::Index n = plant.states();
  const std::vector<Eigen::VectorXd> state_dirs = unit_directions(n, opts.angular);

  std::vector<Eigen::VectorXd> zone;
  std::vector<Eigen::VectorXd> grid;  // zone plus boundary of A
  for (int j = 0; j <= opts.radial; ++j) {
    const double q = ap.level + ap.epsilon * j / opts.radial;
    for (const Eigen::VectorXd& u : state_dirs) {
      const double uqu = u.dot(ap.Q * u);
      if (!(uqu > 0.0)) continue;
      const Eigen::VectorXd x = std::sqrt(q / uqu) * u;
      if (!ap.in_domain(x)) continue;
      grid.push_back(x);
      if (j > 0) zone.push_back(x);
    }
  }
  if (zone.empty()) {
    throw DomainError("verification grid is empty: the safety zone has no sample inside the domain");
  }

  VerifyReport rep;
  rep.grid_points = grid.size();
  rep.condition_i_margin = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& x : zone) {
    rep.condition_i_margin = std::min(rep.condition_i_margin, ap.value(x) - ap.level);
  }
  rep.condition_i = rep.condition_i_margin > 0.0;

  std::vector<double> mus = distinct_graininess(ts);
  if (mus.empty()) mus.push_back(0.0);
  const std::vector<Eigen::VectorXd> pursuer_dirs =
      unit_directions(plant.pursuer_inputs(), opts.pursuer_samples);

  rep.condition_ii_margin = std::numeric_limits<double>::infinity();
  for (double mu : mus) {
    // first instant of the window carrying this graininess
    double t_mu = ts.min();
    for (const Segment& s : ts.segments()) {
      if (mu == 0.0 && !s.degenerate()) {
        t_mu = s.left;
        break;
      }
      if (mu > 0.0 && s.right < ts.max() &&
          std::abs(ts.graininess(s.right) - mu) <= 1e-12 * (1.0 + mu)) {
        t_mu = s.right;
        break;
      }
    }
    const StrategyParams& sp = schedule.at(mu);
    for (const Eigen::VectorXd& x : grid) {
      const Eigen::VectorXd u1 = strategy_control(sp, plant.B, x);
      rep.max_evader_norm = std::max(rep.max_evader_norm, u1.norm());
      const Eigen::VectorXd g0 = plant.A * x + plant.B * u1;
      for (const Eigen::VectorXd& u2 :
           pursuer_candidates(plant, sp, ap.Q, mu, x, g0, pursuer_dirs)) {
        const double dv = quadratic_d_operator(ap.Q, mu, x, g0 + plant.C * u2);
        ++rep.evaluations;
        if (dv < rep.condition_ii_margin) {
          rep.condition_ii_margin = dv;
          rep.witness = {t_mu, mu, x, u1, u2, dv};
        }
      }
    }
  }
  rep.condition_ii = rep.condition_ii_margin >= -opts.tolerance;
  return rep;
}

}  // namespace tsavoid
