#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridfire {

/// Entry point of the `gridfire` executable. `args` excludes the program
/// name. Human-readable progress goes to `out`; on failure a single JSON
/// object {"error": kind, "message": text} goes to `err` and the return
/// value is nonzero:
///   1 unexpected, 2 usage or configuration, 3 precondition, 4 signature,
///   5 solver, 6 calibration, 7 support cap, 8 tolerance not met.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridfire
