#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ide {

// Exit codes: 0 pass, 1 check failed or margin gate tripped, 2 usage/config error.
enum ExitCode { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

// args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace ide
