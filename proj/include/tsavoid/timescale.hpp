#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tsavoid {

/// Absolute tolerance used when testing membership against segment endpoints.
inline constexpr double kMembershipTol = 1e-9;

/// Closed interval [left, right]; left == right encodes an isolated point.
struct Segment {
  double left = 0.0;
  double right = 0.0;

  bool degenerate() const { return left == right; }
  double length() const { return right - left; }
};

enum class GeneratorKind { Explicit, Reals, HGrid, Periodic };

struct Generator {
  GeneratorKind kind = GeneratorKind::Explicit;
  double h = 0.0;  // HGrid step
  double a = 0.0;  // Periodic: length of each dense piece
  double b = 0.0;  // Periodic: length of each gap

  std::string name() const;
};

enum class RightKind { Scattered, Dense, Maximum };
enum class LeftKind { Scattered, Dense, Minimum };

/// Point classification relative to the jump operators.
struct PointClass {
  RightKind right = RightKind::Maximum;
  LeftKind left = LeftKind::Minimum;

  bool right_scattered() const { return right == RightKind::Scattered; }
  bool right_dense() const { return right == RightKind::Dense; }
  bool left_scattered() const { return left == LeftKind::Scattered; }
  bool left_dense() const { return left == LeftKind::Dense; }
  bool isolated() const { return right_scattered() && left_scattered(); }
  bool max_point() const { return right == RightKind::Maximum; }
};

/// A bounded window [t0, t1] of a time scale, stored as ordered disjoint
/// closed segments. Immutable after construction.
class TimeScale {
 public:
  /// Explicit segments; they must be ordered, disjoint and inside the window.
  TimeScale(std::vector<Segment> segments, double t0, double t1,
            Generator generator = {});

  static TimeScale reals(double t0, double t1);
  /// Points k*h lying in [t0, t1].
  static TimeScale h_grid(double h, double t0, double t1);
  /// Union of [k(a+b), k(a+b)+a] over integer k, intersected with [t0, t1].
  static TimeScale periodic(double a, double b, double t0, double t1);

  const std::vector<Segment>& segments() const { return segments_; }
  const Generator& generator() const { return generator_; }
  double window_start() const { return t0_; }
  double window_end() const { return t1_; }
  double min() const { return segments_.front().left; }
  double max() const { return segments_.back().right; }

  bool contains(double t) const;

  double sigma(double t) const;
  double rho(double t) const;
  double graininess(double t) const;
  PointClass classify(double t) const;

  /// Index of the segment containing t; throws DomainError if t is not a member.
  std::size_t segment_index(double t) const;

 private:
  // t snapped onto the nearest segment endpoint when within tolerance
  struct Location {
    std::size_t index;
    double t;
    bool at_left;
    bool at_right;
  };
  Location locate(double t) const;

  std::vector<Segment> segments_;
  double t0_;
  double t1_;
  Generator generator_;
};

/// Discretization grid: every segment endpoint exactly, dense segments
/// subdivided uniformly with spacing <= dense_step.
std::vector<double> sample(const TimeScale& ts, double dense_step);

/// Distinct graininess values taken on the window below its maximum, ascending.
std::vector<double> distinct_graininess(const TimeScale& ts);

}  // namespace tsavoid
