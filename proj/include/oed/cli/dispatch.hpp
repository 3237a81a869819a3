#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oed::cli {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Runs one verb (stats, featurize, train, experiment, report, svm, serve).
/// Returns 0 on success, 1 on a runtime failure, 2 on a usage or config error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Same, with args[0] as the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oed::cli
