#include <chrono>
#include <deque>
#include <limits>
#include <map>
#include <queue>

#include "blockpath/algorithms.hpp"
#include "blockpath/error.hpp"

namespace blockpath {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A* orders the frontier with a heuristic shrunk by this relative amount.
// Rounding in g + h can otherwise make an exactly-tight octile estimate look
// inconsistent by an ulp and close a node before its cheapest parent.
constexpr double kHeuristicSlack = 1e-9;

// Dense per-cell bookkeeping over the snapshot bounds.
class CellIndex {
 public:
  explicit CellIndex(const Rect& b) : b_(b) {}
  std::size_t size() const {
    return static_cast<std::size_t>(b_.width) * static_cast<std::size_t>(b_.depth);
  }
  std::size_t of(const GridNode& n) const {
    return static_cast<std::size_t>(n.z - b_.z) * static_cast<std::size_t>(b_.width) +
           static_cast<std::size_t>(n.x - b_.x);
  }

 private:
  Rect b_;
};

struct QueueEntry {
  double f;
  double h;
  std::uint64_t seq;
  double g;
  GridNode node;
};

// Min-heap on (f, h, discovery order).
struct Later {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.seq > b.seq;
  }
};

class Recorder {
 public:
  Recorder(ExecutionTrace& trace) : trace_(trace) {}

  void emit(TraceEventKind kind, const GridNode& node, double g, double h,
            std::optional<GridNode> parent) {
    TraceEvent e;
    e.step = trace_.events.size();
    e.algo = trace_.spec.label;
    e.kind = kind;
    e.node = node;
    e.g_cost = g;
    e.h_value = h;
    e.visited_count = visited;
    e.parent = parent;
    trace_.events.push_back(std::move(e));
  }

  std::size_t visited = 0;
  std::size_t expansions = 0;

 private:
  ExecutionTrace& trace_;
};

struct SearchState {
  std::vector<double> g;
  std::vector<std::optional<GridNode>> parent;
  std::vector<char> closed;
  std::vector<char> seen;
};

void finish_path(ExecutionTrace& trace, const SearchState& st, const CellIndex& idx) {
  std::vector<GridNode> path;
  std::optional<GridNode> cur = trace.goal;
  while (cur) {
    path.push_back(*cur);
    cur = st.parent[idx.of(*cur)];
  }
  trace.path.assign(path.rbegin(), path.rend());
}

void best_first(ExecutionTrace& trace, const TerrainSnapshot& snapshot,
                const WeightTable& table, const RunOptions& options) {
  const bool astar = trace.spec.kind == AlgorithmKind::AStar;
  const HeuristicKind display =
      astar ? trace.spec.heuristic : options.region_heuristic;
  auto shown_h = [&](const GridNode& n) {
    return heuristic_value(display, n, trace.goal, table);
  };
  auto order_h = [&](const GridNode& n) {
    if (!astar) return 0.0;
    return heuristic_value(trace.spec.heuristic, n, trace.goal, table) *
           (1.0 - kHeuristicSlack);
  };

  const CellIndex idx(snapshot.bounds());
  SearchState st{std::vector<double>(idx.size(), kInf),
                 std::vector<std::optional<GridNode>>(idx.size()),
                 std::vector<char>(idx.size(), 0), std::vector<char>(idx.size(), 0)};
  Recorder rec(trace);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, Later> open;
  std::uint64_t seq = 0;

  st.g[idx.of(trace.start)] = 0;
  st.seen[idx.of(trace.start)] = 1;
  {
    const double h = order_h(trace.start);
    open.push({h, h, seq++, 0.0, trace.start});
  }
  GridNode last = trace.start;

  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    const auto u = idx.of(top.node);
    if (st.closed[u] || top.g != st.g[u]) continue;  // stale entry
    st.closed[u] = 1;
    ++rec.visited;
    last = top.node;
    rec.emit(TraceEventKind::ExpandCurrent, top.node, top.g, shown_h(top.node),
             st.parent[u]);

    if (top.node.cell() == trace.goal.cell()) {
      rec.emit(TraceEventKind::FinishFound, top.node, top.g, shown_h(top.node),
               st.parent[u]);
      finish_path(trace, st, idx);
      trace.metrics.path_cost = top.g;
      trace.metrics.visited_nodes = rec.visited;
      trace.metrics.expansions = rec.expansions;
      return;
    }
    ++rec.expansions;

    for (const auto& nb : neighbors(snapshot, table, trace.region, top.node)) {
      const auto v = idx.of(nb.node);
      if (st.closed[v]) continue;
      const double ng = top.g + nb.cost;
      if (!(ng < st.g[v])) continue;
      const bool improving = st.seen[v] != 0;
      st.g[v] = ng;
      st.parent[v] = top.node;
      st.seen[v] = 1;
      rec.emit(improving ? TraceEventKind::ImproveFrontier
                         : TraceEventKind::DiscoverFrontier,
               nb.node, ng, shown_h(nb.node), top.node);
      const double h = order_h(nb.node);
      open.push({ng + h, h, seq++, ng, nb.node});
    }
  }

  rec.emit(TraceEventKind::FinishUnreachable, last, st.g[idx.of(last)], shown_h(last),
           st.parent[idx.of(last)]);
  trace.metrics.path_cost = kInf;
  trace.metrics.visited_nodes = rec.visited;
  trace.metrics.expansions = rec.expansions;
}

// Hop-count search. g still accumulates weighted cost along the BFS tree so
// the reported path cost shows how BFS fares on weighted terrain.
void breadth_first(ExecutionTrace& trace, const TerrainSnapshot& snapshot,
                   const WeightTable& table, const RunOptions& options) {
  auto shown_h = [&](const GridNode& n) {
    return heuristic_value(options.region_heuristic, n, trace.goal, table);
  };
  const CellIndex idx(snapshot.bounds());
  SearchState st{std::vector<double>(idx.size(), kInf),
                 std::vector<std::optional<GridNode>>(idx.size()),
                 std::vector<char>(idx.size(), 0), std::vector<char>(idx.size(), 0)};
  Recorder rec(trace);
  std::deque<GridNode> fifo{trace.start};
  st.seen[idx.of(trace.start)] = 1;
  st.g[idx.of(trace.start)] = 0;
  GridNode last = trace.start;

  while (!fifo.empty()) {
    const GridNode node = fifo.front();
    fifo.pop_front();
    const auto u = idx.of(node);
    st.closed[u] = 1;
    ++rec.visited;
    last = node;
    rec.emit(TraceEventKind::ExpandCurrent, node, st.g[u], shown_h(node), st.parent[u]);

    if (node.cell() == trace.goal.cell()) {
      rec.emit(TraceEventKind::FinishFound, node, st.g[u], shown_h(node), st.parent[u]);
      finish_path(trace, st, idx);
      trace.metrics.path_cost = st.g[u];
      trace.metrics.visited_nodes = rec.visited;
      trace.metrics.expansions = rec.expansions;
      return;
    }
    ++rec.expansions;

    for (const auto& nb : neighbors(snapshot, table, trace.region, node)) {
      const auto v = idx.of(nb.node);
      if (st.seen[v]) continue;
      st.seen[v] = 1;
      st.g[v] = st.g[u] + nb.cost;
      st.parent[v] = node;
      rec.emit(TraceEventKind::DiscoverFrontier, nb.node, st.g[v], shown_h(nb.node), node);
      fifo.push_back(nb.node);
    }
  }

  rec.emit(TraceEventKind::FinishUnreachable, last, st.g[idx.of(last)], shown_h(last),
           st.parent[idx.of(last)]);
  trace.metrics.path_cost = kInf;
  trace.metrics.visited_nodes = rec.visited;
  trace.metrics.expansions = rec.expansions;
}

}  // namespace

ExecutionTrace run_algorithm(const AlgorithmSpec& spec, const TerrainSnapshot& snapshot,
                             const WeightTable& table, const GridNode& start,
                             const GridNode& goal, const RunOptions& options) {
  table.validate();
  const auto t0 = std::chrono::steady_clock::now();

  ExecutionTrace trace;
  trace.spec = spec;
  trace.start = node_at(snapshot, start.x, start.z);
  trace.goal = node_at(snapshot, goal.x, goal.z);
  trace.region = build_region(trace.start, trace.goal, options.region_heuristic, table,
                              options.region_multiplier);
  if (!trace.region.contains(trace.start) || !trace.region.contains(trace.goal)) {
    throw ConfigError("search region does not contain both endpoints "
                      "(minimum table cost too small for the region heuristic)");
  }

  if (trace.start.cell() == trace.goal.cell()) {
    Recorder rec(trace);
    rec.visited = 1;
    rec.emit(TraceEventKind::FinishFound, trace.start, 0.0, 0.0, std::nullopt);
    trace.path = {trace.start};
    trace.metrics.visited_nodes = 1;
    trace.metrics.expansions = 0;
    trace.metrics.path_cost = 0;
  } else if (spec.kind == AlgorithmKind::BFS) {
    breadth_first(trace, snapshot, table, options);
  } else {
    best_first(trace, snapshot, table, options);
  }

  trace.metrics.path_steps = trace.path.empty() ? 0 : trace.path.size() - 1;
  trace.metrics.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - t0);
  return trace;
}

std::vector<GridNode> reconstruct_path(const ExecutionTrace& trace) {
  if (!trace.found()) {
    throw StateError("path reconstruction needs a trace that found the goal");
  }
  std::map<Cell, GridNode> parent;
  for (const auto& e : trace.events) {
    if ((e.kind == TraceEventKind::DiscoverFrontier ||
         e.kind == TraceEventKind::ImproveFrontier) && e.parent) {
      parent[e.node.cell()] = *e.parent;
    }
  }
  std::vector<GridNode> path{trace.events.back().node};
  while (path.back().cell() != trace.start.cell()) {
    auto it = parent.find(path.back().cell());
    if (it == parent.end()) throw StateError("trace parent chain is broken");
    path.push_back(it->second);
    if (path.size() > trace.events.size() + 1) {
      throw StateError("trace parent chain has a cycle");
    }
  }
  return {path.rbegin(), path.rend()};
}

std::optional<double> brute_force_shortest(const TerrainSnapshot& snapshot,
                                           const WeightTable& table,
                                           const GridNode& start, const GridNode& goal,
                                           const SearchRegion& region,
                                           std::size_t cell_cap) {
  const auto cells = region_size(snapshot, region);
  if (cells > cell_cap) {
    throw OracleError("region has " + std::to_string(cells) + " cells, oracle cap is " +
                      std::to_string(cell_cap));
  }
  const auto s = node_at(snapshot, start.x, start.z);
  const auto g = node_at(snapshot, goal.x, goal.z);
  if (s.cell() == g.cell()) return 0.0;
  if (!region.contains(s) || !region.contains(g)) return std::nullopt;

  const auto& b = snapshot.bounds();
  auto at = [&](const GridNode& n) {
    return static_cast<std::size_t>((n.z - b.z) * b.width + (n.x - b.x));
  };
  std::vector<double> dist(static_cast<std::size_t>(b.width) * b.depth, kInf);
  dist[at(s)] = 0;
  // Sweep every member cell until no label changes.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int z = b.z; z < b.z + b.depth; ++z) {
      for (int x = b.x; x < b.x + b.width; ++x) {
        if (!region.contains(x, z)) continue;
        const GridNode u = node_at(snapshot, x, z);
        const double du = dist[at(u)];
        if (du == kInf) continue;
        for (const auto& nb : neighbors(snapshot, table, region, u)) {
          auto& dv = dist[at(nb.node)];
          if (du + nb.cost < dv) {
            dv = du + nb.cost;
            changed = true;
          }
        }
      }
    }
  }
  const double best = dist[at(g)];
  if (best == kInf) return std::nullopt;
  return best;
}

}  // namespace blockpath
