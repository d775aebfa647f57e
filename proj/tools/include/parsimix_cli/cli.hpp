#ifndef PARSIMIX_CLI_CLI_HPP_
#define PARSIMIX_CLI_CLI_HPP_

#include <ostream>

namespace parsimix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;  // argument, formula or data errors
inline constexpr int kExitFit = 2;    // the model could not be fitted

// Runs one command (`fit`, `repca`, `reduce`, `simulate`) as the
// executable would, writing human-readable output to `out` and
// diagnostics to `err`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace parsimix::cli

#endif  // PARSIMIX_CLI_CLI_HPP_
