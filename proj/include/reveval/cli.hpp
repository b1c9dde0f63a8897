#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace reveval::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kUsage = 2 };

// Entry point for the `reveval` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Long flags accepted by each subcommand (without the leading dashes),
// read back from the parser definition. Used to keep docs/cli.md honest.
std::map<std::string, std::set<std::string>> flag_table();

}  // namespace reveval::cli
