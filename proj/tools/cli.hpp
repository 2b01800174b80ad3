#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mcf::cli {

/// Exit codes: 0 all bounds hold, 1 a bound failed, 2 bad usage or config,
/// 3 unexpected runtime error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcf::cli
