#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lensdepth::cli {

// Runs one command line. Data goes to --out (written atomically) or to
// `out`; diagnostics go to `err`. Returns 0 on success, 2 on usage errors
// (nothing is written) and 1 on input or computation errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace lensdepth::cli
