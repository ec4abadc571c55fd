#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockpath/graph.hpp"
#include "blockpath/terrain.hpp"

namespace blockpath {

enum class AlgorithmKind { BFS, Dijkstra, AStar };

std::string_view to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm(std::string_view name);

// Block colours used to paint one algorithm's visited and current cells.
struct ColorTag {
  std::string visited;
  std::string current;
  bool operator==(const ColorTag&) const = default;
};

ColorTag default_colors(AlgorithmKind kind);

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::Dijkstra;
  HeuristicKind heuristic = HeuristicKind::Octile;  // A* only
  std::string label;
  ColorTag color;

  // Spec with the kind's name as label and its default colours.
  static AlgorithmSpec make(AlgorithmKind kind,
                            HeuristicKind heuristic = HeuristicKind::Octile,
                            std::string label = {});
  bool operator==(const AlgorithmSpec&) const = default;
};

enum class TraceEventKind {
  ExpandCurrent,
  DiscoverFrontier,
  ImproveFrontier,
  FinishFound,
  FinishUnreachable,
};

std::string_view to_string(TraceEventKind kind);
TraceEventKind parse_event_kind(std::string_view name);

struct TraceEvent {
  std::size_t step = 0;
  std::string algo;
  TraceEventKind kind = TraceEventKind::ExpandCurrent;
  GridNode node;
  double g_cost = 0;
  double h_value = 0;
  std::size_t visited_count = 0;
  std::optional<GridNode> parent;

  bool operator==(const TraceEvent&) const = default;
};

struct RunMetrics {
  std::size_t visited_nodes = 0;
  std::size_t expansions = 0;
  double path_cost = 0;  // +inf when no path
  std::size_t path_steps = 0;
  std::chrono::nanoseconds wall_time{0};

  // Everything except wall_time.
  bool same_counts(const RunMetrics& o) const {
    return visited_nodes == o.visited_nodes && expansions == o.expansions &&
           path_cost == o.path_cost && path_steps == o.path_steps;
  }
};

struct ExecutionTrace {
  AlgorithmSpec spec;
  GridNode start;
  GridNode goal;
  SearchRegion region;
  std::vector<TraceEvent> events;
  std::vector<GridNode> path;
  RunMetrics metrics;

  bool found() const {
    return !events.empty() && events.back().kind == TraceEventKind::FinishFound;
  }
  const TraceEvent& at(std::size_t step) const { return events.at(step); }
  std::size_t last_step() const { return events.size() - 1; }

  // Equality of the deterministic content (ignores wall_time).
  bool same_result(const ExecutionTrace& o) const {
    return spec == o.spec && start == o.start && goal == o.goal &&
           events == o.events && path == o.path && metrics.same_counts(o.metrics);
  }
};

struct RunOptions {
  // The search disc is built with this heuristic regardless of the
  // algorithm, so every algorithm in a comparison sees the same region.
  HeuristicKind region_heuristic = HeuristicKind::Octile;
  double region_multiplier = kRegionMultiplier;
};

// Runs one search and records every step. Throws ConfigError if the region
// does not contain both endpoints.
ExecutionTrace run_algorithm(const AlgorithmSpec& spec, const TerrainSnapshot& snapshot,
                             const WeightTable& table, const GridNode& start,
                             const GridNode& goal, const RunOptions& options = {});

struct ComparisonRow {
  std::string label;
  RunMetrics metrics;
};

struct VisitedRatio {
  std::string numerator;
  std::string denominator;
  double ratio = 0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<VisitedRatio> ratios;  // every ordered pair of distinct labels
};

struct ParallelRun {
  std::vector<ExecutionTrace> traces;
  ComparisonReport report;
};

ParallelRun run_parallel(const std::vector<AlgorithmSpec>& specs,
                         const TerrainSnapshot& snapshot, const WeightTable& table,
                         const GridNode& start, const GridNode& goal,
                         const RunOptions& options = {});

ComparisonReport compare(const std::vector<ExecutionTrace>& traces);

// Parent-pointer walk over the recorded events. StateError unless the trace
// ended in FinishFound.
std::vector<GridNode> reconstruct_path(const ExecutionTrace& trace);

inline constexpr std::size_t kOracleCellCap = 4096;

// Label-correcting relaxation to a fixpoint over the region-confined graph.
// nullopt when the goal is unreachable. OracleError above the cell cap.
std::optional<double> brute_force_shortest(const TerrainSnapshot& snapshot,
                                           const WeightTable& table,
                                           const GridNode& start, const GridNode& goal,
                                           const SearchRegion& region,
                                           std::size_t cell_cap = kOracleCellCap);

// Line-delimited trace export: header, one record per event, metrics footer.
// Deterministic: wall time is not written.
std::string export_trace(const ExecutionTrace& trace);
ExecutionTrace import_trace(std::string_view document);

}  // namespace blockpath
