#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qgtube {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one subcommand. args excludes the program name. Diagnostics go to err as a
/// single line; results go to out unless --out names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);

int run(int argc, char** argv);

}  // namespace qgtube
