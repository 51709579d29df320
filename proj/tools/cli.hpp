#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dannasep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one CLI invocation. `args` excludes the program name. Failures are
/// reported on `err` as a single line "error[<Code>]: <message>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dannasep::cli
