#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "blockpath/error.hpp"
#include "blockpath/skygraph.hpp"
#include "blockpath/text.hpp"

namespace blockpath {

bool Clause::holds(const SkyGraph& g) const {
  switch (kind) {
    case ClauseKind::Connected: return is_connected(g);
    case ClauseKind::Acyclic: return is_acyclic(g);
    case ClauseKind::NodeCount: return static_cast<long>(g.node_count()) == k;
    case ClauseKind::EdgeCount: return static_cast<long>(g.edge_count()) == k;
    case ClauseKind::MinDegree:
      for (const auto& [id, pos] : g.nodes()) {
        if (static_cast<long>(g.degree(id)) < k) return false;
      }
      return true;
    case ClauseKind::ContainsPath: return has_path(g, a, b);
    case ClauseKind::ComponentsAtLeast: return static_cast<long>(component_count(g)) >= k;
  }
  return false;
}

std::string Clause::violation() const {
  const auto n = std::to_string(k);
  switch (kind) {
    case ClauseKind::Connected: return "graph is not connected";
    case ClauseKind::Acyclic: return "graph contains a cycle";
    case ClauseKind::NodeCount: return "graph must have exactly " + n + " nodes";
    case ClauseKind::EdgeCount: return "graph must have exactly " + n + " edges";
    case ClauseKind::MinDegree: return "every node needs degree at least " + n;
    case ClauseKind::ContainsPath: return "no path from " + a + " to " + b;
    case ClauseKind::ComponentsAtLeast:
      return "graph needs at least " + n + " connected components";
  }
  return "unknown clause";
}

std::string Clause::to_text() const {
  const auto n = std::to_string(k);
  switch (kind) {
    case ClauseKind::Connected: return "connected";
    case ClauseKind::Acyclic: return "acyclic";
    case ClauseKind::NodeCount: return "node_count " + n;
    case ClauseKind::EdgeCount: return "edge_count " + n;
    case ClauseKind::MinDegree: return "min_degree " + n;
    case ClauseKind::ContainsPath: return "contains_path " + a + " " + b;
    case ClauseKind::ComponentsAtLeast: return "components_at_least " + n;
  }
  return {};
}

Clause Clause::parse(std::string_view line) {
  const auto t = text::tokenize(line);
  if (t.empty()) throw ArgumentError("empty clause");
  Clause c;
  auto arity = [&](std::size_t n) {
    if (t.size() != n + 1) {
      throw ArgumentError("clause '" + t[0] + "' takes " + std::to_string(n) + " argument(s)");
    }
  };
  auto count = [&] {
    arity(1);
    long long v = -1;
    try {
      v = text::parse_int(t[1], 0);
    } catch (const ParseError&) {
      throw ArgumentError("clause '" + t[0] + "' needs an integer count");
    }
    if (v < 0) throw ArgumentError("clause '" + t[0] + "' needs a non-negative count");
    return static_cast<long>(v);
  };
  if (t[0] == "connected") {
    arity(0);
    c.kind = ClauseKind::Connected;
  } else if (t[0] == "acyclic") {
    arity(0);
    c.kind = ClauseKind::Acyclic;
  } else if (t[0] == "node_count") {
    c.kind = ClauseKind::NodeCount;
    c.k = count();
  } else if (t[0] == "edge_count") {
    c.kind = ClauseKind::EdgeCount;
    c.k = count();
  } else if (t[0] == "min_degree") {
    c.kind = ClauseKind::MinDegree;
    c.k = count();
  } else if (t[0] == "components_at_least") {
    c.kind = ClauseKind::ComponentsAtLeast;
    c.k = count();
  } else if (t[0] == "contains_path") {
    arity(2);
    c.kind = ClauseKind::ContainsPath;
    c.a = t[1];
    c.b = t[2];
  } else {
    throw ArgumentError("unknown clause '" + t[0] + "'");
  }
  return c;
}

std::optional<std::string> first_violation(const GoalPredicate& goal, const SkyGraph& g) {
  for (const auto& c : goal) {
    if (!c.holds(g)) return c.violation();
  }
  return std::nullopt;
}

std::string_view to_string(PuzzleKind kind) {
  switch (kind) {
    case PuzzleKind::CycleBreaker: return "cycle_breaker";
    case PuzzleKind::CriticalEdges: return "critical_edges";
    case PuzzleKind::CriticalNodes: return "critical_nodes";
    case PuzzleKind::BuildToSpec: return "build_to_spec";
  }
  return "cycle_breaker";
}

PuzzleKind parse_puzzle_kind(std::string_view name) {
  if (name == "cycle_breaker") return PuzzleKind::CycleBreaker;
  if (name == "critical_edges") return PuzzleKind::CriticalEdges;
  if (name == "critical_nodes") return PuzzleKind::CriticalNodes;
  if (name == "build_to_spec") return PuzzleKind::BuildToSpec;
  throw ArgumentError("unknown puzzle kind '" + std::string(name) + "'");
}

void Puzzle::validate() const {
  if (kind == PuzzleKind::CycleBreaker && !first_violation(goal, initial)) {
    throw ConfigError("cycle breaker puzzle starts out already solved");
  }
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::Solved: return "solved";
    case VerdictKind::NotSolved: return "not_solved";
    case VerdictKind::OverBudget: return "over_budget";
  }
  return "not_solved";
}

PuzzleVerdict check_solution(const Puzzle& puzzle, const SkyGraph& g, std::size_t edits) {
  if (auto why = first_violation(puzzle.goal, g)) return {VerdictKind::NotSolved, *why};
  if (puzzle.budget && edits > *puzzle.budget) {
    return {VerdictKind::OverBudget, "used " + std::to_string(edits) +
                                         " edits, budget is " + std::to_string(*puzzle.budget)};
  }
  return {VerdictKind::Solved, {}};
}

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

std::vector<NodeId> node_ids(int n) {
  const auto width = std::to_string(std::max(0, n - 1)).size();
  std::vector<NodeId> ids;
  for (int i = 0; i < n; ++i) {
    auto s = std::to_string(i);
    ids.push_back("n" + std::string(width - s.size(), '0') + s);
  }
  return ids;
}

SkyGraph isolated(const std::vector<NodeId>& ids) {
  SkyGraph g(false);
  for (const auto& id : ids) g.add_node(id);
  return g;
}

SkyGraph random_tree(const std::vector<NodeId>& ids, std::mt19937_64& rng) {
  auto g = isolated(ids);
  for (std::size_t i = 1; i < ids.size(); ++i) g.add_edge(ids[pick(rng, i)], ids[i]);
  return g;
}

// Adds one edge between a random non-adjacent pair; false if complete.
bool add_random_edge(SkyGraph& g, const std::vector<NodeId>& ids, std::mt19937_64& rng) {
  std::vector<Edge> missing;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (!g.has_edge(ids[i], ids[j])) missing.push_back({ids[i], ids[j]});
    }
  }
  if (missing.empty()) return false;
  const auto& e = missing[pick(rng, missing.size())];
  g.add_edge(e.from, e.to);
  return true;
}

Clause clause(ClauseKind kind, long k = 0) {
  Clause c;
  c.kind = kind;
  c.k = k;
  return c;
}

// Connected graph with at least one critical and one non-critical element.
SkyGraph mixed_graph(const std::vector<NodeId>& ids, std::mt19937_64& rng, bool by_node) {
  const std::size_t n = ids.size();
  SkyGraph g;
  for (int attempt = 0; attempt < 256; ++attempt) {
    g = random_tree(ids, rng);
    const std::size_t extra = 1 + pick(rng, std::max<std::size_t>(1, n / 4));
    for (std::size_t i = 0; i < extra; ++i) add_random_edge(g, ids, rng);
    if (by_node) {
      const auto cut = find_articulation_points(g);
      if (!cut.empty() && cut.size() < n) return g;
    } else {
      const auto bridges = find_bridges(g);
      if (!bridges.empty() && bridges.size() < g.edge_count()) return g;
    }
  }
  // A path always has critical elements.
  g = isolated(ids);
  for (std::size_t i = 1; i < n; ++i) g.add_edge(ids[i - 1], ids[i]);
  return g;
}

}  // namespace

std::pair<int, int> size_bounds(PuzzleKind kind) {
  switch (kind) {
    case PuzzleKind::CycleBreaker: return {3, 64};
    case PuzzleKind::CriticalEdges: return {4, 64};
    case PuzzleKind::CriticalNodes: return {4, 64};
    case PuzzleKind::BuildToSpec: return {3, 32};
  }
  return {3, 64};
}

Puzzle generate_puzzle(PuzzleKind kind, int size, std::uint64_t seed) {
  const auto [lo, hi] = size_bounds(kind);
  if (size < lo || size > hi) {
    throw ArgumentError(std::string(to_string(kind)) + " needs between " +
                        std::to_string(lo) + " and " + std::to_string(hi) + " nodes");
  }
  std::mt19937_64 rng(seed);
  const auto ids = node_ids(size);
  const long n = size;
  Puzzle p;
  p.kind = kind;

  switch (kind) {
    case PuzzleKind::CycleBreaker: {
      p.initial = random_tree(ids, rng);
      add_random_edge(p.initial, ids, rng);
      p.goal = {clause(ClauseKind::Acyclic), clause(ClauseKind::Connected),
                clause(ClauseKind::NodeCount, n)};
      p.budget = 1;
      const auto bridges = find_bridges(p.initial);
      for (const auto& e : p.initial.edges()) {
        if (!bridges.count(e)) {
          p.witness = edit(p.initial, {EditKind::RemoveEdge, e.from, e.to, {}});
          break;
        }
      }
      p.witness_edits = 1;
      break;
    }
    case PuzzleKind::CriticalEdges: {
      p.initial = mixed_graph(ids, rng, false);
      p.goal = {clause(ClauseKind::ComponentsAtLeast, 2), clause(ClauseKind::NodeCount, n)};
      p.budget = 1;
      const auto e = *find_bridges(p.initial).begin();
      p.witness = edit(p.initial, {EditKind::RemoveEdge, e.from, e.to, {}});
      p.witness_edits = 1;
      break;
    }
    case PuzzleKind::CriticalNodes: {
      p.initial = mixed_graph(ids, rng, true);
      p.goal = {clause(ClauseKind::ComponentsAtLeast, 2),
                clause(ClauseKind::NodeCount, n - 1)};
      p.budget = 1;
      const auto v = *find_articulation_points(p.initial).begin();
      p.witness = edit(p.initial, {EditKind::RemoveNode, v, {}, {}});
      p.witness_edits = 1;
      break;
    }
    case PuzzleKind::BuildToSpec: {
      p.initial = isolated(ids);
      p.budget = static_cast<std::size_t>(2 * n);
      auto order = ids;
      std::shuffle(order.begin(), order.end(), rng);
      SkyGraph w = p.initial;
      switch (pick(rng, 3)) {
        case 0:  // spanning tree
          p.goal = {clause(ClauseKind::Connected), clause(ClauseKind::Acyclic),
                    clause(ClauseKind::NodeCount, n)};
          w = random_tree(ids, rng);
          break;
        case 1:  // every node on a ring
          p.goal = {clause(ClauseKind::Connected), clause(ClauseKind::MinDegree, 2),
                    clause(ClauseKind::EdgeCount, n), clause(ClauseKind::NodeCount, n)};
          for (std::size_t i = 0; i < order.size(); ++i) {
            w.add_edge(order[i], order[(i + 1) % order.size()]);
          }
          break;
        default: {  // a simple path between two named nodes, one node left out
          Clause path = clause(ClauseKind::ContainsPath);
          path.a = order.front();
          path.b = order[order.size() - 2];
          p.goal = {path, clause(ClauseKind::Acyclic), clause(ClauseKind::EdgeCount, n - 2),
                    clause(ClauseKind::NodeCount, n)};
          for (std::size_t i = 1; i + 1 < order.size(); ++i) w.add_edge(order[i - 1], order[i]);
          break;
        }
      }
      p.witness_edits = w.edge_count();
      p.witness = std::move(w);
      break;
    }
  }

  layout_sphere(p.initial, seed ^ 0x9e3779b97f4a7c15ULL);
  if (p.witness) {
    for (const auto& [id, pos] : p.initial.nodes()) {
      if (p.witness->has_node(id)) p.witness->set_position(id, pos);
    }
  }
  return p;
}

void layout_sphere(SkyGraph& g, std::uint64_t seed, double min_distance) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> ids;
  for (const auto& [id, pos] : g.nodes()) ids.push_back(id);
  const std::size_t n = ids.size();
  if (n == 0) return;

  auto unit = [&] {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  };
  double radius = std::max(min_distance,
                           1.5 * min_distance * std::sqrt(static_cast<double>(n) / (4 * std::numbers::pi)));
  std::vector<Vec3> p(n);
  for (auto& v : p) {
    const double zc = 2 * unit() - 1, phi = 2 * std::numbers::pi * unit();
    const double r = std::sqrt(1 - zc * zc);
    v = {r * std::cos(phi), zc, r * std::sin(phi)};
  }
  auto project = [](Vec3& v, double to) {
    const double len = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    if (len < 1e-12) v = {0, 1, 0};
    else v = {v.x / len, v.y / len, v.z / len};
    v = {v.x * to, v.y * to, v.z * to};
  };
  for (auto& v : p) project(v, radius);

  // A little slack so rounding in the final positions cannot undercut the minimum.
  const double target = min_distance * 1.0001;
  for (;;) {
    bool ok = false;
    for (int iter = 0; iter < 200 && !ok; ++iter) {
      ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          Vec3 d{p[j].x - p[i].x, p[j].y - p[i].y, p[j].z - p[i].z};
          double len = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
          if (len >= target) continue;
          ok = false;
          if (len < 1e-9) {
            d = {1, 0, 0};
            len = 1;
          }
          const double push = (target - len) / 2 + 1e-6;
          const Vec3 u{d.x / len * push, d.y / len * push, d.z / len * push};
          p[i] = {p[i].x - u.x, p[i].y - u.y, p[i].z - u.z};
          p[j] = {p[j].x + u.x, p[j].y + u.y, p[j].z + u.z};
          project(p[i], radius);
          project(p[j], radius);
        }
      }
    }
    if (ok) break;
    radius *= 1.25;
    for (auto& v : p) project(v, radius);
  }
  for (std::size_t i = 0; i < n; ++i) g.set_position(ids[i], p[i]);
}

std::string save_graph(const SkyGraph& g) {
  std::string out = std::string("directed: ") + (g.directed() ? "true" : "false") + "\n";
  out += "nodes " + std::to_string(g.node_count()) + "\n";
  for (const auto& [id, v] : g.nodes()) {
    out += id + " " + text::format_double(v.x) + " " + text::format_double(v.y) + " " +
           text::format_double(v.z) + "\n";
  }
  out += "edges " + std::to_string(g.edge_count()) + "\n";
  for (const auto& e : g.edges()) out += e.from + " " + e.to + "\n";
  return out;
}

namespace {

struct LineReader {
  std::vector<std::string> lines;
  std::size_t i = 0;
  int offset = 0;

  // Next non-blank tokenized line; ParseError at end of input.
  std::vector<std::string> next(const char* expecting) {
    while (i < lines.size()) {
      auto t = text::tokenize(lines[i++]);
      if (!t.empty()) return t;
    }
    throw ParseError(line(), std::string("unexpected end of document, expected ") + expecting);
  }
  bool done() {
    while (i < lines.size() && text::tokenize(lines[i]).empty()) ++i;
    return i >= lines.size();
  }
  int line() const { return offset + static_cast<int>(i); }
};

SkyGraph read_graph(LineReader& in) {
  auto t = in.next("'directed:' header");
  if (t.size() != 2 || t[0] != "directed:" || (t[1] != "true" && t[1] != "false")) {
    throw ParseError(in.line(), "expected 'directed: true|false'");
  }
  SkyGraph g(t[1] == "true");
  auto count = [&](const char* word) {
    auto h = in.next(word);
    if (h.size() != 2 || h[0] != word) {
      throw ParseError(in.line(), std::string("expected '") + word + " <count>'");
    }
    const auto n = text::parse_int(h[1], in.line());
    if (n < 0) throw ParseError(in.line(), "negative count");
    return n;
  };
  try {
    for (auto n = count("nodes"); n > 0; --n) {
      auto r = in.next("node line");
      if (r.size() != 4) throw ParseError(in.line(), "node lines are 'id x y z'");
      g.add_node(r[0], {text::parse_double(r[1], in.line()), text::parse_double(r[2], in.line()),
                        text::parse_double(r[3], in.line())});
    }
    for (auto m = count("edges"); m > 0; --m) {
      auto r = in.next("edge line");
      if (r.size() != 2) throw ParseError(in.line(), "edge lines are 'from to'");
      g.add_edge(r[0], r[1]);
    }
  } catch (const ConstraintError& e) {
    throw ParseError(in.line(), e.what());
  }
  return g;
}

}  // namespace

SkyGraph load_graph(std::string_view doc) {
  LineReader in{text::split_lines(doc)};
  auto g = read_graph(in);
  if (!in.done()) throw ParseError(in.line() + 1, "trailing content after edge list");
  return g;
}

std::string save_puzzle(const Puzzle& p) {
  std::string out = "puzzle\nkind " + std::string(to_string(p.kind)) + "\n";
  out += "budget " + (p.budget ? std::to_string(*p.budget) : std::string("none")) + "\n";
  for (const auto& c : p.goal) out += "clause " + c.to_text() + "\n";
  out += "graph\n" + save_graph(p.initial);
  return out;
}

Puzzle load_puzzle(std::string_view doc) {
  LineReader in{text::split_lines(doc)};
  Puzzle p;
  bool kind = false;
  auto t = in.next("'puzzle' header");
  if (t.size() != 1 || t[0] != "puzzle") throw ParseError(in.line(), "expected 'puzzle'");
  for (;;) {
    t = in.next("'graph'");
    const int ln = in.line();
    if (t[0] == "graph" && t.size() == 1) break;
    try {
      if (t[0] == "kind" && t.size() == 2) {
        p.kind = parse_puzzle_kind(t[1]);
        kind = true;
      } else if (t[0] == "budget" && t.size() == 2) {
        if (t[1] == "none") p.budget.reset();
        else {
          const auto b = text::parse_int(t[1], ln);
          if (b < 0) throw ParseError(ln, "budget must be non-negative");
          p.budget = static_cast<std::size_t>(b);
        }
      } else if (t[0] == "clause" && t.size() >= 2) {
        std::string rest;
        for (std::size_t i = 1; i < t.size(); ++i) rest += (i > 1 ? " " : "") + t[i];
        p.goal.push_back(Clause::parse(rest));
      } else {
        throw ParseError(ln, "unknown puzzle line '" + t[0] + "'");
      }
    } catch (const ArgumentError& e) {
      throw ParseError(ln, e.what());
    }
  }
  if (!kind) throw ParseError(in.line(), "puzzle has no kind");
  p.initial = read_graph(in);
  if (!in.done()) throw ParseError(in.line() + 1, "trailing content after edge list");
  p.validate();
  return p;
}

}  // namespace blockpath
