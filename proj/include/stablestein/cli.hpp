#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stablestein::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kPrecondition = 3,
  kNumerical = 4,
  kIo = 5,
  kSelftestFailed = 6,
  kInternal = 7,
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "STABLESTEIN_OUTPUT_DIR";

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace stablestein::cli
