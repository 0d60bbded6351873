#ifndef SEMISTATIC_CLI_HPP
#define SEMISTATIC_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace semistatic {

// Command-line entry point.  `args` holds the arguments without the program
// name; reports go to `out`, diagnostics to `err`.  Exit codes: 0 success,
// 1 invalid input (parse, structure, market, or guard failure), 2 violated
// internal equality (always a bug, never an input problem), 3 usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semistatic

#endif  // SEMISTATIC_CLI_HPP
