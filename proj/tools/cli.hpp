#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dvit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDomain = 2 };

/// Runs one subcommand. `args` excludes the program name. Normal output goes
/// to `out`, diagnostics and usage text to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Environment variable holding the default seed.
inline constexpr const char* kSeedEnv = "DVIT_SEED";

}  // namespace dvit::cli
