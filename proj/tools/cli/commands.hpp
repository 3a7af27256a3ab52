#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pqd::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,       ///< malformed input, validation failure, bad flags
  kSingular = 3,         ///< singular rate system / channel
  kUnphysicalRates = 4,  ///< negative or singular rates inside a simulation horizon
};

/// Runs the `pqd` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pqd::cli
