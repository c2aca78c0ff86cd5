#ifndef POOLMAPS_CLI_HPP
#define POOLMAPS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace poolmaps {

// Command-line driver. `args` excludes the program name. Returns the process
// exit code: 0 success, 1 verification failure, 2 usage/data error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poolmaps

#endif
