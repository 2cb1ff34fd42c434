#pragma once

#include "fasta/engine.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fasta::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitFailure = 3;
inline constexpr int kExitUsage = 64;

/// Exit status for a finished solve.
int exit_code(Termination termination);

/// Full command line including the program name in args[0].
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace fasta::cli
