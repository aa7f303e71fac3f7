#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgcl {

/// Runs one subcommand; `args` excludes the program name. Records go to `out`
/// as one JSON object per line, diagnostics and usage to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace sgcl
