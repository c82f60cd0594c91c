#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqci::cli {

/// Runs one command line (without the program name). Results go to `out`,
/// a single-line diagnostic to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace seqci::cli
