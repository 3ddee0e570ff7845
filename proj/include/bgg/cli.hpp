#pragma once
// Subcommand orchestration for the bgg tool.  Exposed as a library call so
// tests can drive the full pipeline in-process.

#include <string>
#include <vector>

namespace bgg::cli {

// Exit codes: 0 success, 2 configuration error, 3 analytic non-convergence,
// 4 simulation censoring above the reporting limit, 1 unexpected failure.
int run(const std::vector<std::string>& args);

}  // namespace bgg::cli
