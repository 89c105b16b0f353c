#include "tsavoid/timescale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsavoid/errors.hpp"

namespace tsavoid {

std::string Generator::name() const {
  std::ostringstream os;
  switch (kind) {
    case GeneratorKind::Explicit:
      return "explicit";
    case GeneratorKind::Reals:
      return "reals";
    case GeneratorKind::HGrid:
      os << "hgrid(" << h << ")";
      return os.str();
    case GeneratorKind::Periodic:
      os << "periodic(" << a << "," << b << ")";
      return os.str();
  }
  return "unknown";
}

TimeScale::TimeScale(std::vector<Segment> segments, double t0, double t1,
                     Generator generator)
    : segments_(std::move(segments)), t0_(t0), t1_(t1), generator_(generator) {
  if (!(t0_ <= t1_)) {
    throw DomainError("time scale window must satisfy t0 <= t1");
  }
  if (segments_.empty()) {
    throw DomainError("time scale window contains no points");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!std::isfinite(s.left) || !std::isfinite(s.right) || s.left > s.right) {
      throw DomainError("segment endpoints must be finite with left <= right");
    }
    if (s.left < t0_ - kMembershipTol || s.right > t1_ + kMembershipTol) {
      throw DomainError("segment lies outside the window");
    }
    if (i > 0 && !(segments_[i - 1].right < s.left)) {
      throw DomainError("segments must be disjoint and strictly increasing");
    }
  }
}

TimeScale TimeScale::reals(double t0, double t1) {
  return TimeScale({{t0, t1}}, t0, t1, {GeneratorKind::Reals});
}

TimeScale TimeScale::h_grid(double h, double t0, double t1) {
  if (!(h > 0.0)) throw DomainError("h_grid step must be positive");
  const auto k0 = static_cast<long long>(std::ceil(t0 / h - kMembershipTol));
  const auto k1 = static_cast<long long>(std::floor(t1 / h + kMembershipTol));
  std::vector<Segment> segs;
  for (long long k = k0; k <= k1; ++k) {
    const double p = static_cast<double>(k) * h;
    segs.push_back({p, p});
  }
  Generator g{GeneratorKind::HGrid};
  g.h = h;
  return TimeScale(std::move(segs), t0, t1, g);
}

TimeScale TimeScale::periodic(double a, double b, double t0, double t1) {
  if (!(a >= 0.0) || !(b > 0.0)) {
    throw DomainError("periodic generator needs a >= 0 and b > 0");
  }
  const double period = a + b;
  std::vector<Segment> segs;
  auto k = static_cast<long long>(std::floor(t0 / period));
  for (;; ++k) {
    const double l = static_cast<double>(k) * period;
    const double r = l + a;
    if (l > t1 + kMembershipTol) break;
    if (r < t0 - kMembershipTol) continue;
    segs.push_back({std::max(l, t0), std::min(r, t1)});
  }
  Generator g{GeneratorKind::Periodic};
  g.a = a;
  g.b = b;
  return TimeScale(std::move(segs), t0, t1, g);
}

std::size_t TimeScale::segment_index(double t) const {
  // first segment whose left endpoint exceeds t + tol
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t + kMembershipTol,
      [](double v, const Segment& s) { return v < s.left; });
  if (it != segments_.begin()) {
    const auto i = static_cast<std::size_t>(it - segments_.begin()) - 1;
    if (t <= segments_[i].right + kMembershipTol) return i;
  }
  std::ostringstream os;
  os.precision(17);
  os << "instant " << t << " is not a member of the time scale";
  throw DomainError(os.str());
}

bool TimeScale::contains(double t) const {
  try {
    segment_index(t);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

TimeScale::Location TimeScale::locate(double t) const {
  const std::size_t i = segment_index(t);
  const Segment& s = segments_[i];
  Location loc{i, t, false, false};
  if (std::abs(t - s.left) <= kMembershipTol) {
    loc.at_left = true;
    loc.t = s.left;
  }
  if (std::abs(t - s.right) <= kMembershipTol) {
    loc.at_right = true;
    loc.t = s.right;
  }
  return loc;
}

double TimeScale::sigma(double t) const {
  const Location loc = locate(t);
  if (!loc.at_right) return t;
  if (loc.index + 1 == segments_.size()) return loc.t;
  return segments_[loc.index + 1].left;
}

double TimeScale::rho(double t) const {
  const Location loc = locate(t);
  if (!loc.at_left) return t;
  if (loc.index == 0) return loc.t;
  return segments_[loc.index - 1].right;
}

double TimeScale::graininess(double t) const {
  const Location loc = locate(t);
  if (!loc.at_right || loc.index + 1 == segments_.size()) return 0.0;
  // generators know their gap exactly; avoids (k+1)h - kh round-off
  switch (generator_.kind) {
    case GeneratorKind::HGrid:
      return generator_.h;
    case GeneratorKind::Periodic:
      return generator_.b;
    default:
      return segments_[loc.index + 1].left - loc.t;
  }
}

PointClass TimeScale::classify(double t) const {
  const Location loc = locate(t);
  PointClass pc;
  const bool last = loc.index + 1 == segments_.size();
  const bool first = loc.index == 0;
  if (loc.at_right && last) {
    pc.right = RightKind::Maximum;
  } else {
    pc.right = loc.at_right ? RightKind::Scattered : RightKind::Dense;
  }
  if (loc.at_left && first) {
    pc.left = LeftKind::Minimum;
  } else {
    pc.left = loc.at_left ? LeftKind::Scattered : LeftKind::Dense;
  }
  return pc;
}

std::vector<double> sample(const TimeScale& ts, double dense_step) {
  if (!(dense_step > 0.0)) throw DomainError("sample step must be positive");
  std::vector<double> out;
  for (const Segment& s : ts.segments()) {
    if (s.degenerate()) {
      out.push_back(s.left);
      continue;
    }
    const auto n = static_cast<long long>(
        std::max(1.0, std::ceil(s.length() / dense_step - 1e-12)));
    out.push_back(s.left);
    for (long long k = 1; k < n; ++k) {
      out.push_back(s.left + s.length() * static_cast<double>(k) /
                                 static_cast<double>(n));
    }
    out.push_back(s.right);
  }
  return out;
}

std::vector<double> distinct_graininess(const TimeScale& ts) {
  std::vector<double> mus;
  const auto& segs = ts.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!segs[i].degenerate()) mus.push_back(0.0);
    if (i + 1 < segs.size()) mus.push_back(ts.graininess(segs[i].right));
  }
  std::sort(mus.begin(), mus.end());
  std::vector<double> out;
  for (double m : mus) {
    if (out.empty() || std::abs(m - out.back()) > 1e-12 * (1.0 + m)) {
      out.push_back(m);
    }
  }
  return out;
}

}  // namespace tsavoid
