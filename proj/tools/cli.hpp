#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace synap::cli {

enum ExitCode : int { ok = 0, usage = 1, domain = 2, check_failed = 3 };

/// Runs one command line (without the program name). Tables go to `out`,
/// diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synap::cli
