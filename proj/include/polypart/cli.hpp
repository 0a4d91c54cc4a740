#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polypart {

enum ExitCode : int {
  exit_ok = 0,
  exit_run_failed = 1,  // some run raised an error (time limits count as completed)
  exit_usage = 2,       // bad flag, unreadable or malformed instance
};

/// Command-line entry. `args` excludes the program name.
///
///   solve        one instance, one configuration
///   sweep        instances x parameter grid, Best-Δ / Best-N selection
///   tighten-only bound report of CP or TCP tightening
///   envelope     (x[, y], z) point cloud of one term's relaxation
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace polypart
