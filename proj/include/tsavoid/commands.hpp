#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace tsavoid {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitMatching = 2,
  kExitSingularLyapunov = 3,
  kExitAvoidanceViolated = 4,
  kExitConditionFailed = 5,
  kExitReproductionMismatch = 6,
};

/// Environment variable overriding simulation.seed.
inline constexpr const char* kSeedEnv = "TSAVOID_SEED";

int cmd_synthesize(const std::string& config_path,
                   const std::optional<std::string>& out_path, std::ostream& out,
                   std::ostream& err);

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::ostream& out, std::ostream& err);

int cmd_verify(const std::string& config_path, std::ostream& out, std::ostream& err);

int cmd_reproduce_paper(std::ostream& out, std::ostream& err);

/// Reduced fraction p/q with q <= max_den when |v − p/q| <= 1e-12, else empty.
std::optional<std::pair<long long, long long>> as_fraction(double v,
                                                           long long max_den = 10000);

}  // namespace tsavoid
