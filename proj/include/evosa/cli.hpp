#ifndef EVOSA_CLI_HPP
#define EVOSA_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace evosa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2; // bad config, unreadable input, invalid pipeline

// Runs one command line (args excludes the program name).
auto Run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) -> int;
auto Run(int argc, char const* const* argv) -> int;

} // namespace evosa::cli

#endif
