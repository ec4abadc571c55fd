#include <algorithm>
#include <cmath>
#include <deque>

#include "blockpath/error.hpp"
#include "blockpath/skygraph.hpp"

namespace blockpath {

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

Edge SkyGraph::canonical(const NodeId& a, const NodeId& b) const {
  if (!directed_ && b < a) return Edge{b, a};
  return Edge{a, b};
}

bool SkyGraph::has_edge(const NodeId& a, const NodeId& b) const {
  return edges_.count(canonical(a, b)) > 0;
}

void SkyGraph::add_node(const NodeId& id, Vec3 position) {
  if (id.empty() || id.find_first_of(" \t\r\n") != NodeId::npos) {
    throw ConstraintError("node ids must be non-empty and contain no whitespace");
  }
  if (!nodes_.emplace(id, position).second) {
    throw ConstraintError("duplicate node '" + id + "'");
  }
}

void SkyGraph::remove_node(const NodeId& id) {
  if (!nodes_.erase(id)) throw ConstraintError("node '" + id + "' does not exist");
  std::erase_if(edges_, [&](const Edge& e) { return e.from == id || e.to == id; });
}

void SkyGraph::add_edge(const NodeId& a, const NodeId& b) {
  if (a == b) throw ConstraintError("self-loop on '" + a + "' is not allowed");
  for (const auto& n : {a, b}) {
    if (!has_node(n)) throw ConstraintError("edge endpoint '" + n + "' does not exist");
  }
  if (!edges_.insert(canonical(a, b)).second) {
    throw ConstraintError("duplicate edge " + a + (directed_ ? "->" : "-") + b);
  }
}

void SkyGraph::remove_edge(const NodeId& a, const NodeId& b) {
  if (!edges_.erase(canonical(a, b))) {
    throw ConstraintError("edge " + a + (directed_ ? "->" : "-") + b + " does not exist");
  }
}

void SkyGraph::set_position(const NodeId& id, Vec3 position) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ConstraintError("node '" + id + "' does not exist");
  it->second = position;
}

std::vector<NodeId> SkyGraph::neighbors(const NodeId& id) const {
  std::vector<NodeId> out;
  for (const auto& e : edges_) {
    if (e.from == id) out.push_back(e.to);
    else if (!directed_ && e.to == id) out.push_back(e.from);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SkyGraph::degree(const NodeId& id) const {
  std::size_t d = 0;
  for (const auto& e : edges_) d += (e.from == id) + (e.to == id);
  return d;
}

namespace {

// Dense index view used by the analyses.
struct Indexed {
  std::vector<NodeId> ids;
  std::vector<std::vector<int>> out;   // directed successors / undirected adjacency
  std::vector<std::vector<int>> both;  // ignoring direction

  explicit Indexed(const SkyGraph& g) {
    std::map<NodeId, int> index;
    for (const auto& [id, pos] : g.nodes()) {
      index[id] = static_cast<int>(ids.size());
      ids.push_back(id);
    }
    out.resize(ids.size());
    both.resize(ids.size());
    for (const auto& e : g.edges()) {
      const int a = index.at(e.from), b = index.at(e.to);
      out[a].push_back(b);
      if (!g.directed()) out[b].push_back(a);
      both[a].push_back(b);
      both[b].push_back(a);
    }
  }
  int size() const { return static_cast<int>(ids.size()); }
};

}  // namespace

std::size_t component_count(const SkyGraph& g) {
  Indexed ix(g);
  std::vector<char> seen(ix.ids.size(), 0);
  std::size_t count = 0;
  for (int s = 0; s < ix.size(); ++s) {
    if (seen[s]) continue;
    ++count;
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : ix.both[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  return count;
}

bool is_connected(const SkyGraph& g) { return component_count(g) <= 1; }

bool is_acyclic(const SkyGraph& g) {
  if (!g.directed()) return g.edge_count() + component_count(g) == g.node_count();
  // Kahn: every node drains iff a topological order exists.
  Indexed ix(g);
  std::vector<int> indeg(ix.ids.size(), 0);
  for (const auto& succ : ix.out) {
    for (int v : succ) ++indeg[v];
  }
  std::deque<int> ready;
  for (int i = 0; i < ix.size(); ++i) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  int drained = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop_front();
    ++drained;
    for (int v : ix.out[u]) {
      if (--indeg[v] == 0) ready.push_back(v);
    }
  }
  return drained == ix.size();
}

bool has_path(const SkyGraph& g, const NodeId& from, const NodeId& to) {
  if (!g.has_node(from) || !g.has_node(to)) return false;
  if (from == to) return true;
  std::set<NodeId> seen{from};
  std::vector<NodeId> stack{from};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (const auto& v : g.neighbors(u)) {
      if (v == to) return true;
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return false;
}

namespace {

struct LowLink {
  std::set<Edge> bridges;
  std::set<NodeId> cut_nodes;
};

// Iterative Tarjan over the simple undirected graph. Without parallel
// edges, skipping the parent vertex is enough to ignore the tree edge.
LowLink low_link(const SkyGraph& g) {
  if (g.directed()) throw ArgumentError("criticality is defined for undirected graphs only");
  Indexed ix(g);
  const int n = ix.size();
  std::vector<int> disc(n, -1), low(n, 0), parent(n, -1), children(n, 0);
  std::vector<std::size_t> next(n, 0);
  LowLink out;
  int clock = 0;
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    disc[root] = low[root] = clock++;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int u = stack.back();
      if (next[u] < ix.out[u].size()) {
        const int v = ix.out[u][next[u]++];
        if (disc[v] < 0) {
          parent[v] = u;
          ++children[u];
          disc[v] = low[v] = clock++;
          stack.push_back(v);
        } else if (v != parent[u]) {
          low[u] = std::min(low[u], disc[v]);
        }
        continue;
      }
      stack.pop_back();
      const int p = parent[u];
      if (p < 0) continue;
      low[p] = std::min(low[p], low[u]);
      if (low[u] > disc[p]) out.bridges.insert(g.canonical(ix.ids[p], ix.ids[u]));
      if (parent[p] >= 0 && low[u] >= disc[p]) out.cut_nodes.insert(ix.ids[p]);
    }
    if (children[root] >= 2) out.cut_nodes.insert(ix.ids[root]);
  }
  return out;
}

}  // namespace

std::set<Edge> find_bridges(const SkyGraph& g) { return low_link(g).bridges; }

std::set<NodeId> find_articulation_points(const SkyGraph& g) {
  return low_link(g).cut_nodes;
}

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::AddEdge: return "add_edge";
    case EditKind::RemoveEdge: return "remove_edge";
    case EditKind::AddNode: return "add_node";
    case EditKind::RemoveNode: return "remove_node";
  }
  return "remove_edge";
}

EditKind parse_edit_kind(std::string_view name) {
  if (name == "add_edge") return EditKind::AddEdge;
  if (name == "remove_edge") return EditKind::RemoveEdge;
  if (name == "add_node") return EditKind::AddNode;
  if (name == "remove_node") return EditKind::RemoveNode;
  throw ArgumentError("unknown edit '" + std::string(name) + "'");
}

SkyGraph edit(SkyGraph g, const EditAction& action) {
  switch (action.kind) {
    case EditKind::AddEdge: g.add_edge(action.a, action.b); break;
    case EditKind::RemoveEdge: g.remove_edge(action.a, action.b); break;
    case EditKind::AddNode: g.add_node(action.a, action.position); break;
    case EditKind::RemoveNode: g.remove_node(action.a); break;
  }
  return g;
}

}  // namespace blockpath
