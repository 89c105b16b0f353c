#pragma once

// Graininess-parametric Lyapunov equation, Hilger-circle tests and
// time-scale transition matrices. Header-only; templated on the scalar type.

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "tsavoid/errors.hpp"
#include "tsavoid/timescale.hpp"

namespace tsavoid {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr int kMaxLyapunovOrder = 32;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kLyapunovResidualTol = 1e-10;

template <typename Derived>
typename Derived::Scalar symmetry_defect(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
}

/// ‖·‖∞ (max row sum).
template <typename Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return typename Derived::Scalar(0);
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Left-hand side of the Lyapunov equation, A^T Q + Q A + mu A^T Q A.
template <typename DerivedA, typename DerivedQ>
MatrixX<typename DerivedA::Scalar> lyapunov_map(
    const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedQ>& Q,
    typename DerivedA::Scalar mu) {
  return A.transpose() * Q + Q * A + mu * (A.transpose() * Q * A);
}

/// Solves A^T Q + Q A + mu A^T Q A = M for symmetric Q by vectorizing the map
/// into an n^2 x n^2 system.
template <typename DerivedA, typename DerivedM>
MatrixX<typename DerivedA::Scalar> lyapunov_solve(
    const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedM>& M,
    typename DerivedA::Scalar mu) {
  using Scalar = typename DerivedA::Scalar;
  using Complex = std::complex<Scalar>;
  const Eigen::Index n = A.rows();
  if (A.cols() != n || M.rows() != n || M.cols() != n) {
    throw std::invalid_argument("lyapunov_solve: A and M must be square of equal order");
  }
  if (n == 0 || n > kMaxLyapunovOrder) {
    throw std::invalid_argument("lyapunov_solve: order must be in [1, 32]");
  }
  if (!(mu >= Scalar(0))) {
    throw std::invalid_argument("lyapunov_solve: graininess must be nonnegative");
  }
  if (!A.allFinite() || !M.allFinite()) {
    throw std::invalid_argument("lyapunov_solve: non-finite entries");
  }
  if (symmetry_defect(M) > Scalar(kSymmetryTol) * std::max(Scalar(1), inf_norm(M))) {
    throw std::invalid_argument("lyapunov_solve: right-hand side M is not symmetric");
  }

  // Eigenvalues of the map are l_i + l_j + mu l_i l_j.
  const Eigen::ComplexEigenSolver<MatrixX<Complex>> es(A.template cast<Complex>(), false);
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  Complex li, lj;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const Complex a = es.eigenvalues()(i);
      const Complex b = es.eigenvalues()(j);
      const Scalar scale = Scalar(1) + std::abs(a) + std::abs(b) + mu * std::abs(a) * std::abs(b);
      const Scalar r = std::abs(a + b + mu * a * b) / scale;
      if (r < worst) {
        worst = r;
        li = a;
        lj = b;
      }
    }
  }
  auto singular = [&](const char* why) {
    std::ostringstream os;
    os.precision(17);
    os << "Lyapunov map singular at mu=" << mu << " (" << why
       << "); eigenvalue pair " << li << ", " << lj;
    return SingularLyapunovError(os.str());
  };
  if (worst < Scalar(1e-12)) throw singular("l_i + l_j + mu l_i l_j = 0");

  const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(n, n);
  const MatrixX<Scalar> At = A.transpose();
  // column-major vec: vec(A^T Q) = (I ⊗ A^T) vec Q, vec(Q A) = (A^T ⊗ I) vec Q
  const MatrixX<Scalar> L = MatrixX<Scalar>(Eigen::kroneckerProduct(I, At)) +
                            MatrixX<Scalar>(Eigen::kroneckerProduct(At, I)) +
                            mu * MatrixX<Scalar>(Eigen::kroneckerProduct(At, At));
  const MatrixX<Scalar> Mm = M;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(Mm.data(), n * n);
  const Eigen::PartialPivLU<MatrixX<Scalar>> lu(L);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> q = lu.solve(rhs);
  MatrixX<Scalar> Q = Eigen::Map<const MatrixX<Scalar>>(q.data(), n, n);
  Q = (Q + Q.transpose()).eval() / Scalar(2);

  if (!Q.allFinite()) throw singular("non-finite solution");
  const Scalar residual = inf_norm(lyapunov_map(A, Q, mu) - Mm);
  if (residual > Scalar(kLyapunovResidualTol) * std::max(Scalar(1), inf_norm(Mm))) {
    throw singular("residual above tolerance");
  }
  return Q;
}

/// Closed-form solution for A = [[0,1],[-1,1]], M = I (the two-state
/// double-integrator example with K = [-1, 1]).
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 2> q_of_mu_formula(Scalar mu) {
  const Scalar d = Scalar(6) * mu + Scalar(4) + Scalar(3) * mu * mu + mu * mu * mu;
  const Scalar off = -(mu * mu + mu + Scalar(2)) / d;
  Eigen::Matrix<Scalar, 2, 2> Q;
  Q << Scalar(2) * (Scalar(2) * mu + mu * mu + Scalar(3)) / d, off,
      off, (mu * mu + Scalar(4) + mu) / d;
  return Q;
}

template <typename Scalar = double>
struct HilgerReport {
  Scalar mu{};
  std::vector<std::complex<Scalar>> eigenvalues;
  std::vector<bool> inside;

  bool all_inside() const {
    for (bool b : inside) {
      if (!b) return false;
    }
    return true;
  }
  /// Centre -1/mu and radius 1/mu; for mu = 0 the region is Re λ < 0.
  std::string region() const {
    if (mu == Scalar(0)) return "open left half-plane Re(l) < 0";
    std::ostringstream os;
    os.precision(17);
    os << "disc |l + " << Scalar(1) / mu << "| < " << Scalar(1) / mu;
    return os.str();
  }
};

template <typename Derived>
HilgerReport<typename Derived::Scalar> hilger_check(
    const Eigen::MatrixBase<Derived>& A, typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  const Eigen::EigenSolver<MatrixX<Scalar>> es(A.eval(), false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("hilger_check: eigensolver did not converge");
  }
  HilgerReport<Scalar> rep;
  rep.mu = mu;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<Scalar> l = es.eigenvalues()(i);
    rep.eigenvalues.push_back(l);
    if (mu == Scalar(0)) {
      rep.inside.push_back(l.real() < Scalar(0));
    } else {
      rep.inside.push_back(std::abs(Scalar(1) + mu * l) < Scalar(1));
    }
  }
  return rep;
}

/// Φ(t1, t0) for x^Δ = A x: factor (I + μA) at right-scattered points,
/// exp(A Δt) on dense pieces of length <= dense_step.
template <typename Derived>
MatrixX<typename Derived::Scalar> transition_matrix(
    const Eigen::MatrixBase<Derived>& A, const TimeScale& ts, double t0,
    double t1, double dense_step = 1e-2) {
  using Scalar = typename Derived::Scalar;
  if (t0 > t1) throw DomainError("transition_matrix requires t0 <= t1");
  if (!ts.contains(t0) || !ts.contains(t1)) {
    throw DomainError("transition_matrix endpoints must be members");
  }
  if (!(dense_step > 0.0)) throw DomainError("dense step must be positive");
  const Eigen::Index n = A.rows();
  const MatrixX<Scalar> I = MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> phi = I;
  double t = t0;
  while (t < t1 - kMembershipTol) {
    const PointClass pc = ts.classify(t);
    if (pc.right_scattered()) {
      const double mu = ts.graininess(t);
      const MatrixX<Scalar> step = I + Scalar(mu) * A;
      const Eigen::FullPivLU<MatrixX<Scalar>> lu(step);
      if (!lu.isInvertible()) {
        std::ostringstream os;
        os.precision(17);
        os << "I + mu(t) A is singular at t=" << t << " (mu=" << mu << ")";
        throw RegressivityError(os.str());
      }
      phi = step * phi;
      t = ts.sigma(t);
    } else {
      const Segment& s = ts.segments()[ts.segment_index(t)];
      const double next = std::min({t + dense_step, s.right, t1});
      const MatrixX<Scalar> At = A * Scalar(next - t);
      phi = At.exp() * phi;
      t = next;
    }
  }
  return phi;
}

}  // namespace tsavoid
