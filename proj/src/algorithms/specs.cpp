#include <future>
#include <set>

#include "blockpath/algorithms.hpp"
#include "blockpath/error.hpp"

namespace blockpath {

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::BFS: return "bfs";
    case AlgorithmKind::Dijkstra: return "dijkstra";
    case AlgorithmKind::AStar: return "astar";
  }
  return "dijkstra";
}

AlgorithmKind parse_algorithm(std::string_view name) {
  if (name == "bfs") return AlgorithmKind::BFS;
  if (name == "dijkstra") return AlgorithmKind::Dijkstra;
  if (name == "astar" || name == "a*") return AlgorithmKind::AStar;
  throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

ColorTag default_colors(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::BFS: return {"cyan_terracotta", "blue_concrete"};
    case AlgorithmKind::Dijkstra: return {"black_concrete", "white_concrete"};
    case AlgorithmKind::AStar: return {"red_concrete", "yellow_concrete"};
  }
  return {};
}

AlgorithmSpec AlgorithmSpec::make(AlgorithmKind kind, HeuristicKind heuristic,
                                  std::string label) {
  AlgorithmSpec spec;
  spec.kind = kind;
  spec.heuristic = heuristic;
  spec.label = label.empty() ? std::string(to_string(kind)) : std::move(label);
  spec.color = default_colors(kind);
  return spec;
}

std::string_view to_string(TraceEventKind kind) {
  switch (kind) {
    case TraceEventKind::ExpandCurrent: return "expand";
    case TraceEventKind::DiscoverFrontier: return "discover";
    case TraceEventKind::ImproveFrontier: return "improve";
    case TraceEventKind::FinishFound: return "found";
    case TraceEventKind::FinishUnreachable: return "unreachable";
  }
  return "expand";
}

TraceEventKind parse_event_kind(std::string_view name) {
  if (name == "expand") return TraceEventKind::ExpandCurrent;
  if (name == "discover") return TraceEventKind::DiscoverFrontier;
  if (name == "improve") return TraceEventKind::ImproveFrontier;
  if (name == "found") return TraceEventKind::FinishFound;
  if (name == "unreachable") return TraceEventKind::FinishUnreachable;
  throw ArgumentError("unknown trace event kind '" + std::string(name) + "'");
}

ComparisonReport compare(const std::vector<ExecutionTrace>& traces) {
  ComparisonReport report;
  for (const auto& t : traces) report.rows.push_back({t.spec.label, t.metrics});
  for (const auto& a : traces) {
    for (const auto& b : traces) {
      if (&a == &b) continue;
      const double den = static_cast<double>(b.metrics.visited_nodes);
      report.ratios.push_back(
          {a.spec.label, b.spec.label,
           den == 0 ? 0.0 : static_cast<double>(a.metrics.visited_nodes) / den});
    }
  }
  return report;
}

ParallelRun run_parallel(const std::vector<AlgorithmSpec>& specs,
                         const TerrainSnapshot& snapshot, const WeightTable& table,
                         const GridNode& start, const GridNode& goal,
                         const RunOptions& options) {
  if (specs.empty()) throw ArgumentError("run_parallel needs at least one algorithm");
  std::set<std::string> labels;
  for (const auto& s : specs) {
    if (s.label.empty()) throw ArgumentError("algorithm label must be non-empty");
    if (!labels.insert(s.label).second) {
      throw ArgumentError("duplicate algorithm label '" + s.label + "'");
    }
  }

  // Inputs are shared read-only; each worker owns its trace.
  std::vector<std::future<ExecutionTrace>> jobs;
  jobs.reserve(specs.size());
  for (const auto& spec : specs) {
    jobs.push_back(std::async(std::launch::async, [&, spec] {
      return run_algorithm(spec, snapshot, table, start, goal, options);
    }));
  }
  ParallelRun out;
  for (auto& j : jobs) out.traces.push_back(j.get());
  out.report = compare(out.traces);
  return out;
}

}  // namespace blockpath
