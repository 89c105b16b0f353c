#pragma once

#include <stdexcept>
#include <string>

namespace tsavoid {

// Instant is not a member of the time scale, or an operation is undefined there.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// C is not in the column space of B; the avoidance guarantee does not apply.
class MatchingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The map Q -> A^T Q + Q A + mu A^T Q A is singular.
class SingularLyapunovError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// I + mu(t) A is singular at a right-scattered point.
class RegressivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsavoid
