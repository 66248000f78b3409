#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sshc::cli {

enum ExitCode : int { ok = 0, infeasible = 1, invalid_input = 2 };

/// Runs one invocation; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sshc::cli
