#pragma once

#include <iosfwd>

namespace femgraph::cli {

// Subcommands: gen-design, mesh, solve, optimize, embed, dataset, metrics,
// render. Returns 0 on success, 2 for usage or configuration errors, 1 for
// pipeline errors; failures also print one JSON error line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace femgraph::cli
