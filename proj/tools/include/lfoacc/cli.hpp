#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lfoacc::cli {

/// Runs one `lf_oacc` invocation. args[0] is the program name. Returns the
/// process exit status: 0 on success, 1 when a pipeline stage fails, 2 on
/// usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lfoacc::cli
