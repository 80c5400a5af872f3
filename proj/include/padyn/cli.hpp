#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "padyn/error.hpp"

namespace padyn {

/// 0 success, 2 usage or rejected input, 3 budget or precision exhausted, 4 internal invariant.
int exit_code(ErrorKind kind);

/// Runs the experiment harness. args excludes the program name. Results go to
/// --out when given, else to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace padyn
