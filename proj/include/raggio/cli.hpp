#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "raggio/harness.hpp"

namespace raggio::cli {

/// Exit codes: 0 success, 1 domain or input error, 2 usage error,
/// 3 when raggio-check finds the sampled results inconsistent with the theorem.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInconsistent = 3;

inline int exit_code(TheoremVerdict v) {
  return v == TheoremVerdict::ConsistentWithTheorem ? kExitOk : kExitInconsistent;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace raggio::cli
