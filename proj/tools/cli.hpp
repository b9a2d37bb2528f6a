#ifndef RGG_TOOLS_CLI_HPP
#define RGG_TOOLS_CLI_HPP

#include <iosfwd>

namespace rgg {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;   // bad flags, invalid parameters, unreadable or malformed files
inline constexpr int exit_runtime = 3; // divergence, bracketing or quadrature failure

// Runs one rggtool command. The JSON payload goes to `out`, diagnostics to
// `err`; the return value is the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rgg

#endif
