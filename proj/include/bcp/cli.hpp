#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bcp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // verification or evaluation failure
inline constexpr int kExitUsage = 2;

// Runs the `bcp` command line. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker cap: hardware concurrency, limited by BCP_THREADS when set.
std::size_t default_threads();

}  // namespace bcp::cli
