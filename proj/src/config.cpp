#include "tsavoid/config.hpp"

#include <fstream>
#include <set>

#include "tsavoid/errors.hpp"

namespace tsavoid {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

double positive(const json& j, const std::string& what) {
  const double v = number(j, what);
  if (!(v > 0.0)) throw ConfigError(what + " must be positive");
  return v;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

Eigen::MatrixXd parse_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].empty()) throw ConfigError(what + " rows must be nonempty arrays");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) throw ConfigError(what + " rows differ in length");
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(j[r][c], what + " entry");
    }
  }
  return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], what + " entry");
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

TimeScale parse_timescale(const json& j) {
  check_keys(j, "timescale", {"generator", "h", "a", "b", "segments", "window"});
  if (!j.contains("generator") || !j.at("generator").is_string()) {
    throw ConfigError("timescale.generator must be one of reals|hgrid|periodic|explicit");
  }
  const std::string gen = j.at("generator");
  if (!j.contains("window")) throw ConfigError("timescale.window is required");
  const json& w = j.at("window");
  if (!w.is_array() || w.size() != 2) throw ConfigError("timescale.window must be [t0, t1]");
  const double t0 = number(w[0], "timescale.window[0]");
  const double t1 = number(w[1], "timescale.window[1]");
  if (!(t0 <= t1)) throw ConfigError("timescale.window must satisfy t0 <= t1");
  try {
    if (gen == "reals") return TimeScale::reals(t0, t1);
    if (gen == "hgrid") {
      if (!j.contains("h")) throw ConfigError("timescale.h is required for hgrid");
      return TimeScale::h_grid(positive(j.at("h"), "timescale.h"), t0, t1);
    }
    if (gen == "periodic") {
      if (!j.contains("a") || !j.contains("b")) {
        throw ConfigError("timescale.a and timescale.b are required for periodic");
      }
      return TimeScale::periodic(number(j.at("a"), "timescale.a"),
                                 positive(j.at("b"), "timescale.b"), t0, t1);
    }
    if (gen == "explicit") {
      if (!j.contains("segments") || !j.at("segments").is_array()) {
        throw ConfigError("timescale.segments is required for explicit");
      }
      std::vector<Segment> segs;
      for (const json& s : j.at("segments")) {
        if (!s.is_array() || s.size() != 2) throw ConfigError("segments must be [l, r] pairs");
        segs.push_back({number(s[0], "segment left"), number(s[1], "segment right")});
      }
      return TimeScale(std::move(segs), t0, t1);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("timescale: ") + e.what());
  }
  throw ConfigError("unknown timescale.generator '" + gen + "'");
}

json timescale_to_json(const TimeScale& ts) {
  json j;
  const Generator& g = ts.generator();
  switch (g.kind) {
    case GeneratorKind::Reals:
      j["generator"] = "reals";
      break;
    case GeneratorKind::HGrid:
      j["generator"] = "hgrid";
      j["h"] = g.h;
      break;
    case GeneratorKind::Periodic:
      j["generator"] = "periodic";
      j["a"] = g.a;
      j["b"] = g.b;
      break;
    case GeneratorKind::Explicit: {
      j["generator"] = "explicit";
      json segs = json::array();
      for (const Segment& s : ts.segments()) segs.push_back({s.left, s.right});
      j["segments"] = segs;
      break;
    }
  }
  j["window"] = {ts.window_start(), ts.window_end()};
  return j;
}

RunConfig parse_config(const json& j) {
  check_keys(j, "config", {"timescale", "plant", "K", "M", "mode", "avoidance",
                           "strategy", "simulation", "verify", "description"});
  RunConfig rc;
  rc.raw = j;
  try {
    if (!j.contains("timescale")) throw ConfigError("timescale is required");
    rc.ts = parse_timescale(j.at("timescale"));

    if (!j.contains("plant")) throw ConfigError("plant is required");
    const json& p = j.at("plant");
    check_keys(p, "plant", {"A", "B", "C", "alpha1", "alpha2"});
    for (const char* k : {"A", "B", "C"}) {
      if (!p.contains(k)) throw ConfigError(std::string("plant.") + k + " is required");
    }
    rc.plant.A = parse_matrix(p.at("A"), "plant.A");
    rc.plant.B = parse_matrix(p.at("B"), "plant.B");
    rc.plant.C = parse_matrix(p.at("C"), "plant.C");
    rc.plant.alpha1 = p.contains("alpha1") ? number(p.at("alpha1"), "plant.alpha1") : 1.0;
    rc.plant.alpha2 = p.contains("alpha2") ? number(p.at("alpha2"), "plant.alpha2") : 1.0;
    if (rc.plant.alpha1 < 0.0 || rc.plant.alpha2 < 0.0) {
      throw ConfigError("plant.alpha1 and plant.alpha2 must be nonnegative");
    }
    const Eigen::Index n = rc.plant.A.rows();
    if (rc.plant.A.cols() != n || rc.plant.B.rows() != n || rc.plant.C.rows() != n) {
      throw ConfigError("plant matrices have inconsistent dimensions");
    }

    const std::string mode = get_or<std::string>(j, "mode", "stabilized");
    if (mode == "stabilized") {
      rc.mode = StrategyMode::Stabilized;
      if (!j.contains("K")) throw ConfigError("K is required in stabilized mode");
      rc.K = parse_matrix(j.at("K"), "K");
      if (rc.K.rows() != rc.plant.B.cols() || rc.K.cols() != n) {
        throw ConfigError("K must be d1 x n");
      }
    } else if (mode == "pure") {
      rc.mode = StrategyMode::Pure;
      rc.K = Eigen::MatrixXd::Zero(rc.plant.B.cols(), n);
    } else {
      throw ConfigError("mode must be 'stabilized' or 'pure'");
    }
    rc.M = j.contains("M") ? parse_matrix(j.at("M"), "M") : Eigen::MatrixXd::Identity(n, n);
    if (rc.M.rows() != n || rc.M.cols() != n) throw ConfigError("M must be n x n");

    if (j.contains("strategy")) {
      const json& s = j.at("strategy");
      check_keys(s, "strategy", {"deadband", "gain", "evader"});
      if (s.contains("deadband")) {
        rc.deadband = number(s.at("deadband"), "strategy.deadband");
        if (rc.deadband < 0.0) throw ConfigError("strategy.deadband must be nonnegative");
      }
      if (s.contains("gain")) rc.gain = number(s.at("gain"), "strategy.gain");
      const std::string ev = get_or<std::string>(s, "evader", "strategy");
      if (ev == "strategy") {
        rc.evader = EvaderMode::Strategy;
      } else if (ev == "zero") {
        rc.evader = EvaderMode::Zero;
      } else {
        throw ConfigError("strategy.evader must be 'strategy' or 'zero'");
      }
    }

    if (j.contains("avoidance")) {
      const json& a = j.at("avoidance");
      check_keys(a, "avoidance", {"a", "epsilon", "box", "graininess"});
      if (a.contains("a")) rc.level = positive(a.at("a"), "avoidance.a");
      if (a.contains("epsilon")) rc.epsilon = positive(a.at("epsilon"), "avoidance.epsilon");
      if (a.contains("graininess")) {
        rc.avoidance_graininess = number(a.at("graininess"), "avoidance.graininess");
      }
      if (a.contains("box")) {
        const json& b = a.at("box");
        check_keys(b, "avoidance.box", {"lower", "upper"});
        if (b.contains("lower")) rc.box_lower = parse_vector(b.at("lower"), "avoidance.box.lower");
        if (b.contains("upper")) rc.box_upper = parse_vector(b.at("upper"), "avoidance.box.upper");
        if ((rc.box_lower.size() && rc.box_lower.size() != n) ||
            (rc.box_upper.size() && rc.box_upper.size() != n)) {
          throw ConfigError("avoidance.box bounds must have n entries");
        }
      }
    }

    if (j.contains("simulation")) {
      const json& s = j.at("simulation");
      check_keys(s, "simulation", {"x0", "pursuer", "dense_step", "seed"});
      if (s.contains("x0")) {
        if (!s.at("x0").is_array()) throw ConfigError("simulation.x0 must be a list of states");
        for (const json& x : s.at("x0")) {
          rc.x0.push_back(parse_vector(x, "simulation.x0"));
          if (rc.x0.back().size() != n) throw ConfigError("simulation.x0 entries must have n entries");
        }
      }
      if (s.contains("dense_step")) rc.dense_step = positive(s.at("dense_step"), "simulation.dense_step");
      if (s.contains("seed")) {
        if (!s.at("seed").is_number_unsigned()) throw ConfigError("simulation.seed must be a nonnegative integer");
        rc.seed = s.at("seed").get<std::uint64_t>();
      }
      if (s.contains("pursuer")) {
        const json& pp = s.at("pursuer");
        check_keys(pp, "simulation.pursuer", {"policy", "u2"});
        const std::string pol = get_or<std::string>(pp, "policy", "worst_case");
        if (pol == "worst_case") {
          rc.pursuer = PursuerPolicy::worst_case();
        } else if (pol == "random") {
          rc.pursuer = PursuerPolicy::random();
        } else if (pol == "constant") {
          if (!pp.contains("u2")) throw ConfigError("constant pursuer needs u2");
          rc.pursuer = PursuerPolicy::fixed(parse_vector(pp.at("u2"), "simulation.pursuer.u2"));
          if (rc.pursuer.constant.size() != rc.plant.C.cols()) {
            throw ConfigError("simulation.pursuer.u2 must have d2 entries");
          }
        } else {
          throw ConfigError("simulation.pursuer.policy must be worst_case|random|constant");
        }
      }
    }

    if (j.contains("verify")) {
      const json& v = j.at("verify");
      check_keys(v, "verify", {"radial", "angular", "pursuer_samples", "tolerance"});
      auto count = [&](const char* key, int fallback) {
        if (!v.contains(key)) return fallback;
        if (!v.at(key).is_number_integer() || v.at(key).get<int>() <= 0) {
          throw ConfigError(std::string("verify.") + key + " must be a positive integer");
        }
        return v.at(key).get<int>();
      };
      rc.verify.radial = count("radial", rc.verify.radial);
      rc.verify.angular = count("angular", rc.verify.angular);
      rc.verify.pursuer_samples = count("pursuer_samples", rc.verify.pursuer_samples);
      if (v.contains("tolerance")) rc.verify.tolerance = positive(v.at("tolerance"), "verify.tolerance");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

StrategySchedule build_schedule(const RunConfig& rc) {
  StrategySchedule s =
      StrategySchedule::build(rc.plant, rc.ts, rc.mode, rc.K, rc.M, rc.deadband);
  if (rc.gain) s.override_gain(*rc.gain);
  return s;
}

AvoidanceProblem build_problem(const RunConfig& rc, const StrategySchedule& schedule) {
  AvoidanceProblem ap;
  const double mu = rc.avoidance_graininess.value_or(schedule.entries().front().mu);
  try {
    ap.Q = schedule.at(mu).Q;
  } catch (const DomainError&) {
    throw ConfigError("avoidance.graininess does not occur on the time scale window");
  }
  ap.level = rc.level;
  ap.epsilon = rc.epsilon;
  ap.lower = rc.box_lower;
  ap.upper = rc.box_upper;
  return ap;
}

}  // namespace tsavoid
