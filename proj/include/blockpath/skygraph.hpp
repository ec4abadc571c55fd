#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace blockpath {

using NodeId = std::string;

struct Vec3 {
  double x = 0, y = 0, z = 0;
  bool operator==(const Vec3&) const = default;
};

double distance(const Vec3& a, const Vec3& b);

struct Edge {
  NodeId from;
  NodeId to;
  auto operator<=>(const Edge&) const = default;
};

// Abstract graph floating above the terrain. Undirected edges are stored
// with from < to.
class SkyGraph {
 public:
  explicit SkyGraph(bool directed = false) : directed_(directed) {}

  bool directed() const { return directed_; }
  const std::map<NodeId, Vec3>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_node(const NodeId& id) const { return nodes_.count(id) > 0; }
  bool has_edge(const NodeId& a, const NodeId& b) const;
  Edge canonical(const NodeId& a, const NodeId& b) const;

  // All mutators throw ConstraintError naming the violated invariant.
  void add_node(const NodeId& id, Vec3 position = {});
  void remove_node(const NodeId& id);  // drops incident edges
  void add_edge(const NodeId& a, const NodeId& b);
  void remove_edge(const NodeId& a, const NodeId& b);
  void set_position(const NodeId& id, Vec3 position);

  // Successors when directed, all neighbours otherwise.
  std::vector<NodeId> neighbors(const NodeId& id) const;
  // In + out degree when directed.
  std::size_t degree(const NodeId& id) const;

  bool operator==(const SkyGraph&) const = default;

 private:
  bool directed_;
  std::map<NodeId, Vec3> nodes_;
  std::set<Edge> edges_;
};

bool is_acyclic(const SkyGraph& g);
// Weak components for directed graphs.
std::size_t component_count(const SkyGraph& g);
bool is_connected(const SkyGraph& g);
// Follows edge direction when directed.
bool has_path(const SkyGraph& g, const NodeId& from, const NodeId& to);

// Undirected only; ArgumentError for directed graphs.
std::set<Edge> find_bridges(const SkyGraph& g);
std::set<NodeId> find_articulation_points(const SkyGraph& g);

enum class EditKind { AddEdge, RemoveEdge, AddNode, RemoveNode };

std::string_view to_string(EditKind kind);
EditKind parse_edit_kind(std::string_view name);

struct EditAction {
  EditKind kind = EditKind::RemoveEdge;
  NodeId a;
  NodeId b;  // edges only
  Vec3 position;  // AddNode only
};

SkyGraph edit(SkyGraph g, const EditAction& action);

enum class ClauseKind {
  Connected,
  Acyclic,
  NodeCount,
  EdgeCount,
  MinDegree,
  ContainsPath,
  ComponentsAtLeast,
};

struct Clause {
  ClauseKind kind = ClauseKind::Acyclic;
  long k = 0;
  NodeId a, b;  // ContainsPath

  bool holds(const SkyGraph& g) const;
  // Message used when the clause fails.
  std::string violation() const;
  // Canonical text, e.g. "node_count 5" or "contains_path a b".
  std::string to_text() const;
  static Clause parse(std::string_view text);
  bool operator==(const Clause&) const = default;
};

// Conjunction of clauses; the first failing one is reported.
using GoalPredicate = std::vector<Clause>;

std::optional<std::string> first_violation(const GoalPredicate& goal, const SkyGraph& g);

enum class PuzzleKind { CycleBreaker, CriticalEdges, CriticalNodes, BuildToSpec };

std::string_view to_string(PuzzleKind kind);
PuzzleKind parse_puzzle_kind(std::string_view name);

struct Puzzle {
  PuzzleKind kind = PuzzleKind::CycleBreaker;
  SkyGraph initial;
  GoalPredicate goal;
  std::optional<std::size_t> budget;
  // A known solution, kept for testing and never sent to players.
  std::optional<SkyGraph> witness;
  std::size_t witness_edits = 0;

  // ConfigError when a CycleBreaker's initial graph already satisfies the goal.
  void validate() const;
};

inline constexpr double kMinNodeDistance = 2.0;

// Minimum and maximum node counts accepted by generate_puzzle.
std::pair<int, int> size_bounds(PuzzleKind kind);
Puzzle generate_puzzle(PuzzleKind kind, int size, std::uint64_t seed);

// Places nodes on a sphere shell with pairwise distance >= min_distance.
void layout_sphere(SkyGraph& g, std::uint64_t seed, double min_distance = kMinNodeDistance);

enum class VerdictKind { Solved, NotSolved, OverBudget };

std::string_view to_string(VerdictKind kind);

struct PuzzleVerdict {
  VerdictKind kind = VerdictKind::NotSolved;
  std::string reason;
};

PuzzleVerdict check_solution(const Puzzle& puzzle, const SkyGraph& g, std::size_t edits);

// Graph document: "directed: true|false", "nodes N" + "id x y z" lines,
// "edges M" + "from to" lines. Output is in canonical order.
std::string save_graph(const SkyGraph& g);
SkyGraph load_graph(std::string_view text);

// Puzzle document: kind, budget and clause lines followed by the graph.
std::string save_puzzle(const Puzzle& p);
Puzzle load_puzzle(std::string_view text);

}  // namespace blockpath
