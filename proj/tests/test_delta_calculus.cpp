#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tsavoid/delta_calculus.hpp"
#include "tsavoid/errors.hpp"

using namespace tsavoid;

namespace {

ScalarSignal fn(std::function<double(double)> f) { return {std::move(f), {}}; }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

StateFunction square() {
  StateFunction v;
  v.value = [](double, const Eigen::VectorXd& x) { return x.squaredNorm(); };
  return v;
}

const TimeScale z = TimeScale::h_grid(1.0, 0.0, 10.0);
const TimeScale half = TimeScale::h_grid(0.5, 0.0, 5.0);
const TimeScale r = TimeScale::reals(0.0, 4.0);
const TimeScale p12 = TimeScale::periodic(1.0, 2.0, 0.0, 12.0);

}  // namespace

TEST_CASE("delta_derivative") {
  const ScalarSignal sq = fn([](double t) { return t * t; });
  CHECK(delta_derivative(sq, z, 2.0) == 5.0);
  CHECK(delta_derivative(sq, r, 2.0) == doctest::Approx(4.0).epsilon(1e-6));
  for (const TimeScale* ts : {&z, &half, &r, &p12}) {
    for (double t : {0.0, 1.0, 3.0, 3.5}) {
      if (!ts->contains(t)) continue;
      CHECK(delta_derivative(fn([](double s) { return s; }), *ts, t) ==
            doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::abs(delta_derivative(fn([](double) { return 7.0; }), *ts, t)) <= 1e-10);
    }
  }
  // P_{1,2}: scattered quotient at 3k+1, one-sided near segment end
  CHECK(delta_derivative(sq, p12, 1.0) == doctest::Approx((9.0 - 1.0) / 2.0));
  CHECK(delta_derivative(sq, p12, 0.9999999) == doctest::Approx(2.0).epsilon(1e-5));
  // exact derivative overrides finite differences
  const ScalarSignal exact{[](double t) { return t * t; }, [](double t) { return 2 * t; }};
  CHECK(delta_derivative(exact, r, 1.5) == 3.0);
  CHECK_THROWS_AS(delta_derivative(sq, z, 10.0), DomainError);
  CHECK_THROWS_AS(delta_derivative(sq, z, 0.5), DomainError);
}

TEST_CASE("delta_integral") {
  const ScalarSignal id = fn([](double t) { return t; });
  CHECK(delta_integral(id, TimeScale::h_grid(1.0, 0.0, 3.0), 0.0, 3.0) == 3.0);
  CHECK(delta_integral(id, r, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(delta_integral(fn([](double) { return 2.5; }), z, 1.0, 7.0) == 2.5 * 6.0);
  // h-grid: closed-form sum, no quadrature error
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) sum += std::exp(0.5 * k) * 0.5;
  CHECK(delta_integral(fn([](double t) { return std::exp(t); }), half, 0.0, 5.0) == doctest::Approx(sum).epsilon(1e-15));
  // P_{1,2} on [0,4]: ∫_0^1 t dt + 1*2 + ∫_3^4 t dt
  CHECK(delta_integral(id, p12, 0.0, 4.0) == doctest::Approx(0.5 + 2.0 + 3.5).epsilon(1e-10));
  // additivity and linearity
  const ScalarSignal f = fn([](double t) { return std::sin(t) + t * t; });
  const ScalarSignal g = fn([](double t) { return std::cos(3 * t); });
  for (const TimeScale* ts : {&z, &r, &p12}) {
    const double a = 0.0, m = 3.0, b = 4.0;
    CHECK(delta_integral(f, *ts, a, b) ==
          doctest::Approx(delta_integral(f, *ts, a, m) + delta_integral(f, *ts, m, b)).epsilon(1e-10));
    const ScalarSignal comb = fn([&](double t) { return 2.0 * f(t) - 3.0 * g(t); });
    CHECK(delta_integral(comb, *ts, a, b) ==
          doctest::Approx(2.0 * delta_integral(f, *ts, a, b) - 3.0 * delta_integral(g, *ts, a, b)).epsilon(1e-10));
  }
  CHECK_THROWS(delta_integral(id, z, 3.0, 1.0));
}

TEST_CASE("zeta and d_operator") {
  StateFunction ident;
  ident.value = [](double, const Eigen::VectorXd& x) { return x(0); };
  CHECK(zeta(ident, z, 0.0, vec({1}), vec({2})) == 3.0);
  CHECK(zeta(ident, r, 0.5, vec({1}), vec({2})) == 1.0);
  StateFunction zero;
  zero.value = [](double, const Eigen::VectorXd&) { return 0.0; };
  CHECK(zeta(zero, z, 1.0, vec({1}), vec({1})) == 0.0);

  const StateFunction v = square();
  CHECK(d_operator(v, z, 0.0, vec({1}), vec({1})) == 3.0);
  // dense branch: 2 x f(x) with f(x) = -x + 1 at x = 0.7
  const double x = 0.7, f = -x + 1;
  CHECK(d_operator(v, r, 1.0, vec({x}), vec({f})) == doctest::Approx(2 * x * f).epsilon(1e-8));
  StateFunction c;
  c.value = [](double, const Eigen::VectorXd&) { return 4.0; };
  for (const TimeScale* ts : {&z, &r, &p12}) {
    CHECK(std::abs(d_operator(c, *ts, 1.0, vec({1, 2}), vec({3, 4}))) <= 1e-8);
  }
  // time-dependent v on a dense point: v = t x
  StateFunction tv;
  tv.value = [](double t, const Eigen::VectorXd& y) { return t * y(0); };
  CHECK(d_operator(tv, r, 2.0, vec({3}), vec({5})) == doctest::Approx(3 + 2 * 5).epsilon(1e-7));
}

TEST_CASE("d_operator converges to the dense branch as h -> 0") {
  const StateFunction v = square();
  const Eigen::VectorXd x = vec({0.3, -1.2});
  const Eigen::VectorXd f = vec({1.1, 0.4});
  const double dense = 2 * x.dot(f);
  double prev = 0.0;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    const TimeScale g = TimeScale::h_grid(h, 0.0, 1.0);
    const double err = std::abs(d_operator(v, g, 0.0, x, f) - dense);
    CHECK(err == doctest::Approx(h * f.squaredNorm()).epsilon(1e-9));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(2.0).epsilon(1e-6));
    prev = err;
  }
}

TEST_CASE("chain_rule_delta") {
  const ScalarSignal id = fn([](double t) { return t; });
  auto twice = [](double y) { return 2 * y; };
  CHECK(chain_rule_delta(twice, id, z, 1.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(chain_rule_delta([](double) { return 1.0; }, fn([](double t) { return t * t; }), z, 2.0) ==
        doctest::Approx(5.0));
  CHECK(chain_rule_delta(twice, id, r, 1.5) == doctest::Approx(3.0).epsilon(1e-8));

  struct Pair {
    std::function<double(double)> outer, outer_d;
    std::function<double(double)> inner;
  };
  const std::vector<Pair> pairs = {
      {[](double y) { return y * y * y; }, [](double y) { return 3 * y * y; },
       [](double t) { return t * t + 1; }},
      {[](double y) { return std::pow(y, 5) - y; }, [](double y) { return 5 * std::pow(y, 4) - 1; },
       [](double t) { return 0.5 * t - 1; }},
      {[](double y) { return std::sin(y); }, [](double y) { return std::cos(y); },
       [](double t) { return t * t * 0.3; }},
  };
  for (const TimeScale* ts : {&z, &half, &r}) {
    for (const Pair& p : pairs) {
      for (double t : {0.0, 1.0, 2.0, 2.5}) {
        if (!ts->contains(t)) continue;
        const ScalarSignal g = fn(p.inner);
        const ScalarSignal comp = fn([&](double s) { return p.outer(p.inner(s)); });
        const double lhs = chain_rule_delta(p.outer_d, g, *ts, t);
        const double rhs = delta_derivative(comp, *ts, t);
        CHECK(std::abs(lhs - rhs) <= 1e-6);
      }
    }
  }
}

TEST_CASE("gauss_legendre_unit") {
  const QuadratureRule q = gauss_legendre_unit(16);
  double w = 0.0, m = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    w += q.weights[i];
    m += q.weights[i] * std::pow(q.nodes[i], 31);
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m == doctest::Approx(1.0 / 32.0).epsilon(1e-13));
  CHECK_THROWS(gauss_legendre_unit(0));
}

TEST_CASE("right_monotonicity") {
  const Eigen::MatrixXd Q = (Eigen::MatrixXd(2, 2) << 1.5, -0.5, -0.5, 1.0).finished();
  const Eigen::MatrixXd Acl = (Eigen::MatrixXd(2, 2) << 0, 1, -1, 1).finished();
  StateFunction v;
  v.value = [&](double, const Eigen::VectorXd& x) { return x.dot(Q * x); };
  std::vector<DeltaSample> traj;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = vec({std::cos(0.3 * k), std::sin(0.3 * k) + 0.1 * k});
    traj.push_back({0.1 * k, x, Acl * x});
  }
  for (const Monotonicity& m : right_monotonicity(v, traj, r)) CHECK(m.nondecreasing);

  StateFunction c;
  c.value = [](double, const Eigen::VectorXd&) { return 1.0; };
  for (const Monotonicity& m : right_monotonicity(c, traj, r)) {
    CHECK(m.nondecreasing);
    CHECK(m.nonincreasing);
  }
  StateFunction down;
  down.value = [](double t, const Eigen::VectorXd&) { return -t; };
  std::vector<DeltaSample> zt;
  for (int k = 0; k < 5; ++k) zt.push_back({double(k), vec({0}), vec({0})});
  for (const Monotonicity& m : right_monotonicity(down, zt, z)) {
    CHECK(m.nonincreasing);
    CHECK_FALSE(m.nondecreasing);
    CHECK_FALSE(m.indefinite());
  }
}

TEST_CASE("step_extension") {
  const ScalarSignal id = fn([](double t) { return t; });
  const auto ez = step_extension(id, z);
  CHECK(ez(1.5) == 1.0);
  CHECK(ez(4.0) == 4.0);
  const auto ep = step_extension(id, p12);
  CHECK(ep(2.0) == 1.0);
  CHECK(ep(0.5) == 0.5);
  CHECK_THROWS_AS(ez(11.0), DomainError);
}
