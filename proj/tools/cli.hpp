#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mm::cli {

/// Full command-line front end. Returns the process exit status:
/// 0 pass, 1 fail, 2 inconclusive, 3 usage or parse error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mm::cli
