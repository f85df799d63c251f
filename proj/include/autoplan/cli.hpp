// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace autoplan::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kBackend = 3, kDivergence = 4 };

// Full command line, program name first. Never throws; failures map to the
// exit codes above with a message on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace autoplan::cli
