#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tsavoid/inclusion.hpp"

using namespace tsavoid;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

// brute force: the point p with no q strictly lexicographically below it
Eigen::VectorXd brute_lex_min(const FinitePointSet& s) {
  for (const auto& p : s) {
    bool minimal = true;
    for (const auto& q : s) {
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (q(i) < p(i)) {
          minimal = false;
          break;
        }
        if (q(i) > p(i)) break;
      }
      if (!minimal) break;
    }
    if (minimal) return p;
  }
  return {};
}

LinearPlant injective_plant() {
  LinearPlant p;
  p.A = (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  p.B = (Eigen::MatrixXd(2, 1) << 0, 1).finished();
  p.C = (Eigen::MatrixXd(2, 1) << 1, 0).finished();
  return p;
}

}  // namespace

TEST_CASE("lex_min examples") {
  CHECK(lex_min({vec({1, 2}), vec({1, 1}), vec({2, 0})}) == vec({1, 1}));
  CHECK(lex_min({vec({4, -1})}) == vec({4, -1}));
  CHECK(lex_min({vec({0, 5, 1}), vec({0, 5, 0}), vec({1, 0, 0})}) == vec({0, 5, 0}));
  CHECK_THROWS(lex_min({}));
  CHECK(lex_less(vec({1, 2}), vec({1, 3})));
  CHECK_FALSE(lex_less(vec({1, 3}), vec({1, 3})));
}

TEST_CASE("lex_min against a brute-force oracle") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 5), size(1, 50), small(-2, 2);
  std::uniform_real_distribution<double> real(-1, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim(rng), m = size(rng);
    FinitePointSet s;
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd p(n);
      // coarse integer coordinates force ties in the leading entries
      for (int i = 0; i < n; ++i) p(i) = trial % 2 ? small(rng) : real(rng);
      s.push_back(p);
    }
    const Eigen::VectorXd got = lex_min(s);
    CHECK(got == brute_lex_min(s));
    CHECK(std::find(s.begin(), s.end(), got) != s.end());
    std::shuffle(s.begin(), s.end(), rng);
    CHECK(lex_min(s) == got);
  }
}

TEST_CASE("product_grid") {
  const ControlGrid g = product_grid({{-1, 0, 1}, {-1, 0, 1}});
  CHECK(g.values.size() == 9);
  CHECK(g.fallback_value() == vec({0, 0}));
  CHECK(g.values.front() == vec({-1, -1}));
  CHECK(g.values[1] == vec({-1, 0}));
  ControlGrid bad;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("filippov_extract") {
  const LinearPlant p = injective_plant();
  const Dynamics f = linear_dynamics(p);
  const ControlGrid g = product_grid({{-1, 0, 1}, {-1, 0, 1}});
  const Eigen::VectorXd x = vec({0.3, -0.8});
  for (const auto& w : g.values) {
    CHECK(filippov_extract(f, g, 0.0, x, f(0.0, x, w), 1e-8) == w);
  }
  CHECK(filippov_extract(f, g, 0.0, x, vec({50, 50})) == g.fallback_value());

  // B = C: (u1, u2) and (u2, u1) produce the same rate; the smaller wins
  LinearPlant twin = p;
  twin.C = twin.B;
  const Dynamics ft = linear_dynamics(twin);
  const Eigen::VectorXd target = ft(0.0, x, vec({1, -1}));
  CHECK(filippov_extract(ft, g, 0.0, x, target) == vec({-1, 1}));
}

TEST_CASE("extract_along_trajectory") {
  const LinearPlant p = injective_plant();
  const Dynamics f = linear_dynamics(p);
  const ControlGrid g = product_grid({{-1, 0, 1}, {-1, 0, 1}});
  const Eigen::VectorXd w = vec({1, -1});
  std::vector<DeltaSample> traj;
  Eigen::VectorXd x = vec({1, 0});
  for (int k = 0; k < 30; ++k) {
    const Eigen::VectorXd xd = f(k, x, w);
    traj.push_back({double(k), x, xd});
    x += xd;
  }
  const ExtractedControl ok = extract_along_trajectory(f, g, traj);
  CHECK(ok.mismatches == 0);
  for (const auto& c : ok.controls) CHECK(c == w);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<DeltaSample> noisy = traj;
  for (auto& s : noisy) s.xdelta += vec({0.3 + 0.01 * noise(rng), 0.3});
  CHECK(extract_along_trajectory(f, g, noisy).mismatches == noisy.size());

  const ExtractedControl empty = extract_along_trajectory(f, g, {});
  CHECK(empty.controls.empty());
  CHECK(empty.mismatches == 0);
}
