#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "blockpath/algorithms.hpp"

namespace blockpath::cli {

// "kind[:heuristic][=label]", e.g. "astar:euclidean=fast".
AlgorithmSpec parse_algo(const std::string& text);
// "x,z"
Cell parse_cell(const std::string& text);

// Fixed-width comparison table followed by the visited ratios.
void print_table(std::ostream& out, const ComparisonReport& report, bool wall_time);

// Runs the command line; returns the process exit code. `serve` blocks
// until SIGINT or SIGTERM.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blockpath::cli
