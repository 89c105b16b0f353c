#include "tsavoid/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "tsavoid/avoidance.hpp"
#include "tsavoid/config.hpp"
#include "tsavoid/errors.hpp"
#include "tsavoid/simulator.hpp"
#include "tsavoid/ts_linalg.hpp"

namespace tsavoid {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fraction_string(double v) {
  const auto f = as_fraction(v);
  if (!f) return "~";
  if (f->second == 1) return std::to_string(f->first);
  return std::to_string(f->first) + "/" + std::to_string(f->second);
}

void print_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m,
                  bool fractions = false) {
  out << "  " << name << " =\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "    [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ", ";
      out << fmt17(m(r, c));
      if (fractions) out << " (" << fraction_string(m(r, c)) << ")";
    }
    out << "]\n";
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MatchingError& e) {
    err << "matching failure: " << e.what() << "\n";
    return kExitMatching;
  } catch (const SingularLyapunovError& e) {
    err << "singular Lyapunov map: " << e.what() << "\n";
    return kExitSingularLyapunov;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

std::uint64_t effective_seed(const RunConfig& rc) {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return rc.seed;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(kSeedEnv) + " must be a nonnegative integer");
  }
}

json hilger_json(const HilgerReport<double>& h) {
  json eig = json::array();
  for (const auto& l : h.eigenvalues) eig.push_back({l.real(), l.imag()});
  json inside = json::array();
  for (bool b : h.inside) inside.push_back(b);
  return {{"mu", h.mu}, {"eigenvalues", eig}, {"inside", inside}, {"region", h.region()}};
}

}  // namespace

std::optional<std::pair<long long, long long>> as_fraction(double v, long long max_den) {
  if (!std::isfinite(v)) return std::nullopt;
  // continued-fraction convergents
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = v;
  for (int i = 0; i < 64; ++i) {
    const double a = std::floor(x);
    if (std::abs(a) > 1e15) break;
    const auto ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0;
    const long long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::abs(v - static_cast<double>(p1) / static_cast<double>(q1)) <= 1e-12) {
      const long long g = std::gcd(p1, q1);
      return std::make_pair(p1 / g, q1 / g);
    }
    const double frac = x - a;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

int cmd_synthesize(const std::string& config_path,
                   const std::optional<std::string>& out_path, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig rc = load_config(config_path);
    const StrategySchedule schedule = build_schedule(rc);
    out << "time scale: " << rc.ts.generator().name() << " on [" << fmt17(rc.ts.window_start())
        << ", " << fmt17(rc.ts.window_end()) << "]\n";
    out << "mode: " << (rc.mode == StrategyMode::Pure ? "pure" : "stabilized") << "\n";
    json report = {{"timescale", timescale_to_json(rc.ts)}, {"entries", json::array()}};
    for (const StrategyParams& sp : schedule.entries()) {
      out << "graininess mu = " << fmt17(sp.mu) << "\n";
      print_matrix(out, "Q", sp.Q, true);
      print_matrix(out, "D", sp.D);
      print_matrix(out, "K", sp.K);
      out << "  gain = " << fmt17(sp.gain) << "\n";
      out << "  hilger(-(A+BK)) region: " << sp.hilger.region() << "\n";
      for (std::size_t i = 0; i < sp.hilger.eigenvalues.size(); ++i) {
        const auto& l = sp.hilger.eigenvalues[i];
        out << "    eigenvalue " << fmt17(l.real()) << (l.imag() < 0 ? " - " : " + ")
            << fmt17(std::abs(l.imag())) << "i: "
            << (sp.hilger.inside[i] ? "inside" : "outside") << "\n";
      }
      out << "  stable at this graininess: " << (sp.hilger.all_inside() ? "yes" : "no") << "\n";
      report["entries"].push_back({{"mu", sp.mu},
                                   {"Q", matrix_to_json(sp.Q)},
                                   {"D", matrix_to_json(sp.D)},
                                   {"K", matrix_to_json(sp.K)},
                                   {"gain", sp.gain},
                                   {"hilger", hilger_json(sp.hilger)}});
    }
    if (out_path) {
      std::ofstream f(*out_path);
      if (!f) throw ConfigError("cannot write '" + *out_path + "'");
      f << report.dump(2) << "\n";
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig rc = load_config(config_path);
    if (rc.x0.empty()) throw ConfigError("simulation.x0 must list at least one initial state");
    const std::uint64_t seed = effective_seed(rc);
    const StrategySchedule schedule = build_schedule(rc);
    const AvoidanceProblem problem = build_problem(rc, schedule);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");

    std::size_t avoided = 0;
    for (std::size_t i = 0; i < rc.x0.size(); ++i) {
      SimConfig cfg;
      cfg.plant = rc.plant;
      cfg.strategy = schedule;
      cfg.problem = problem;
      cfg.ts = rc.ts;
      cfg.x0 = rc.x0[i];
      cfg.pursuer = rc.pursuer;
      cfg.evader = rc.evader;
      cfg.dense_step = rc.dense_step;
      cfg.seed = derive_seed(seed, i);
      const Trajectory traj = simulate(cfg);

      char stem[32];
      std::snprintf(stem, sizeof stem, "run_%03zu", i);
      const std::filesystem::path base = std::filesystem::path(out_dir) / stem;
      {
        std::ofstream csv(base.string() + ".csv");
        if (!csv) throw ConfigError("cannot write '" + base.string() + ".csv'");
        write_csv(csv, traj);
      }
      {
        json j = {{"run", i},
                  {"seed", cfg.seed},
                  {"x0", vector_to_json(cfg.x0)},
                  {"verdict", to_string(traj.verdict)},
                  {"steps", traj.steps},
                  {"min_V", traj.min_V},
                  {"min_DV", traj.min_DV},
                  {"config", rc.raw}};
        std::ofstream f(base.string() + ".json");
        if (!f) throw ConfigError("cannot write '" + base.string() + ".json'");
        f << j.dump(2) << "\n";
      }
      const bool ok = traj.verdict.kind == VerdictKind::Avoided;
      if (ok) ++avoided;
      out << "run " << i << ": " << to_string(traj.verdict) << " min_V=" << fmt17(traj.min_V)
          << " min_DV=" << fmt17(traj.min_DV) << "\n";
    }
    out << avoided << "/" << rc.x0.size() << " avoided\n";
    return static_cast<int>(avoided == rc.x0.size() ? kExitOk : kExitAvoidanceViolated);
  });
}

int cmd_verify(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig rc = load_config(config_path);
    const StrategySchedule schedule = build_schedule(rc);
    const AvoidanceProblem problem = build_problem(rc, schedule);
    const VerifyReport rep = verify_conditions(rc.plant, schedule, problem, rc.ts, rc.verify);

    const StrategyParams& first = schedule.entries().front();
    const double bound = spectral_norm(first.D) * rc.plant.alpha2;
    out << "time scale: " << rc.ts.generator().name() << "\n";
    if (rc.mode == StrategyMode::Pure) {
      out << "alpha1 = " << fmt17(first.alpha1) << ", ||D|| alpha2 = " << fmt17(bound)
          << (first.alpha1 >= bound ? " (alpha1 >= ||D|| alpha2)" : " (alpha1 < ||D|| alpha2)")
          << "\n";
    } else {
      out << "switching gain = " << fmt17(first.gain) << ", ||D|| alpha2 = " << fmt17(bound) << "\n";
    }
    out << "grid points: " << rep.grid_points << ", evaluations: " << rep.evaluations << "\n";
    out << "condition (i): " << (rep.condition_i ? "pass" : "FAIL")
        << " margin=" << fmt17(rep.condition_i_margin) << "\n";
    out << "condition (ii): " << (rep.condition_ii ? "pass" : "FAIL")
        << " worst D(V)=" << fmt17(rep.condition_ii_margin)
        << " tolerance=" << fmt17(rc.verify.tolerance) << "\n";
    const VerifyWitness& w = rep.witness;
    out << "witness: t=" << fmt17(w.t) << " mu=" << fmt17(w.mu) << " x=[";
    for (Eigen::Index i = 0; i < w.x.size(); ++i) out << (i ? ", " : "") << fmt17(w.x(i));
    out << "] u1=[";
    for (Eigen::Index i = 0; i < w.u1.size(); ++i) out << (i ? ", " : "") << fmt17(w.u1(i));
    out << "] u2=[";
    for (Eigen::Index i = 0; i < w.u2.size(); ++i) out << (i ? ", " : "") << fmt17(w.u2(i));
    out << "]\n";
    out << "max |u1| over grid: " << fmt17(rep.max_evader_norm) << "\n";
    out << (rep.passed() ? "PASS" : "FAIL") << "\n";
    return static_cast<int>(rep.passed() ? kExitOk : kExitConditionFailed);
  });
}

namespace {

struct ExpectedBranch {
  long long q[3][2];  // Q11, Q12, Q22 as num/den
  long long line_lhs;  // line_lhs * x1 = line_rhs * x2
  long long line_rhs;
};

const std::map<int, ExpectedBranch>& expected_branches() {
  static const std::map<int, ExpectedBranch> table = {
      {0, {{{3, 2}, {-1, 2}, {1, 1}}, 1, 2}},
      {1, {{{6, 7}, {-2, 7}, {3, 7}}, 2, 3}},
      {2, {{{11, 18}, {-2, 9}, {5, 18}}, 4, 5}},
  };
  return table;
}

}  // namespace

int cmd_reproduce_paper(std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LinearPlant plant;
    plant.A = (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished();
    plant.B = (Eigen::MatrixXd(2, 1) << 0, 1).finished();
    plant.C = plant.B;
    plant.alpha1 = 3.0;
    plant.alpha2 = 1.0;
    const Eigen::MatrixXd K = (Eigen::MatrixXd(1, 2) << -1, 1).finished();
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2, 2);

    struct Case {
      const char* name;
      TimeScale ts;
    };
    const std::vector<Case> cases = {
        {"R", TimeScale::reals(0.0, 10.0)},
        {"Z", TimeScale::h_grid(1.0, 0.0, 10.0)},
        {"P_{1,2}", TimeScale::periodic(1.0, 2.0, 0.0, 10.0)},
    };

    std::vector<std::string> mismatches;
    auto check = [&](const std::string& what, double got, double want) {
      if (!(std::abs(got - want) <= 1e-12)) {
        mismatches.push_back(what + ": got " + fmt17(got) + ", expected " + fmt17(want));
      }
    };

    out << "plant: A=[[0,1],[0,0]] B=C=[0;1] K=[-1,1] M=I alpha2=1\n";
    for (const Case& c : cases) {
      const StrategySchedule schedule =
          StrategySchedule::build(plant, c.ts, StrategyMode::Stabilized, K, M);
      out << "\ntime scale " << c.name << " (" << c.ts.generator().name() << ")\n";
      for (const StrategyParams& sp : schedule.entries()) {
        const double mu = sp.mu;
        const std::string tag = std::string(c.name) + " mu=" + fmt17(mu);
        out << "graininess mu = " << fmt17(mu) << "\n";
        print_matrix(out, "Q", sp.Q, true);

        const auto key = static_cast<int>(std::lround(mu));
        const auto it = expected_branches().find(key);
        if (it == expected_branches().end() || std::abs(mu - key) > 1e-12) {
          mismatches.push_back(tag + ": unexpected graininess value");
          continue;
        }
        const ExpectedBranch& e = it->second;
        auto frac = [](const long long f[2]) {
          return static_cast<double>(f[0]) / static_cast<double>(f[1]);
        };
        check(tag + " Q11", sp.Q(0, 0), frac(e.q[0]));
        check(tag + " Q12", sp.Q(0, 1), frac(e.q[1]));
        check(tag + " Q21", sp.Q(1, 0), frac(e.q[1]));
        check(tag + " Q22", sp.Q(1, 1), frac(e.q[2]));
        const Eigen::Matrix2d closed = q_of_mu_formula(mu);
        for (int r = 0; r < 2; ++r) {
          for (int col = 0; col < 2; ++col) {
            check(tag + " closed-form Q(" + std::to_string(r + 1) + std::to_string(col + 1) + ")",
                  sp.Q(r, col), closed(r, col));
          }
        }

        // B^T Q x = c1 x1 + c2 x2
        const Eigen::RowVectorXd coeff = plant.B.transpose() * sp.Q;
        const double d = 6 * mu + 4 + 3 * mu * mu + mu * mu * mu;
        check(tag + " sign coefficient x1", coeff(0), -(mu * mu + mu + 2) / d);
        check(tag + " sign coefficient x2", coeff(1), (mu * mu + 4 + mu) / d);
        check(tag + " gain", sp.gain, 1.0);
        out << "  strategy: p1(t,x) = " << fmt17(sp.K(0, 0)) << "*x1 + " << fmt17(sp.K(0, 1))
            << "*x2 + " << fmt17(sp.gain) << "*sign(" << fraction_string(coeff(0)) << "*x1 + "
            << fraction_string(coeff(1)) << "*x2)\n";
        out << "  sign coefficients: " << fmt17(coeff(0)) << ", " << fmt17(coeff(1)) << "\n";

        // singular set c1 x1 + c2 x2 = 0  <=>  (-c1) x1 = c2 x2
        const auto ratio = as_fraction(-coeff(0) / coeff(1));
        if (!ratio) {
          mismatches.push_back(tag + ": singular line is not rational");
          continue;
        }
        out << "  singular line: " << ratio->first << "*x1 = " << ratio->second << "*x2\n";
        if (ratio->first != e.line_lhs || ratio->second != e.line_rhs) {
          mismatches.push_back(tag + ": singular line " + std::to_string(ratio->first) + "x1=" +
                               std::to_string(ratio->second) + "x2, expected " +
                               std::to_string(e.line_lhs) + "x1=" + std::to_string(e.line_rhs) +
                               "x2");
        }
        Eigen::Vector2d dir(coeff(1), -coeff(0));
        Eigen::Vector2d want(static_cast<double>(e.line_rhs), static_cast<double>(e.line_lhs));
        const double cosine = std::abs(dir.normalized().dot(want.normalized()));
        out << "  direction cosine vs expected line: " << fmt17(cosine) << "\n";
        if (cosine < 1.0 - 1e-9) mismatches.push_back(tag + ": singular line direction");
      }
    }
    if (!mismatches.empty()) {
      err << "reproduction mismatch:\n";
      for (const std::string& m : mismatches) err << "  " << m << "\n";
      return static_cast<int>(kExitReproductionMismatch);
    }
    out << "\nall values match the expected fractions to 1e-12\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace tsavoid
