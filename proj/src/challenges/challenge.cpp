#include <algorithm>
#include <cmath>
#include <filesystem>

#include "blockpath/challenges.hpp"
#include "blockpath/error.hpp"
#include "blockpath/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace blockpath {

std::string_view to_string(ChallengeKind kind) {
  switch (kind) {
    case ChallengeKind::MinSteps: return "min_steps";
    case ChallengeKind::PathCostTarget: return "path_cost_target";
    case ChallengeKind::PickEndpoints: return "pick_endpoints";
    case ChallengeKind::PredictNext: return "predict_next";
    case ChallengeKind::SkyPuzzle: return "sky_puzzle";
  }
  return "min_steps";
}

ChallengeKind parse_challenge_kind(std::string_view name) {
  for (auto k : {ChallengeKind::MinSteps, ChallengeKind::PathCostTarget,
                 ChallengeKind::PickEndpoints, ChallengeKind::PredictNext,
                 ChallengeKind::SkyPuzzle}) {
    if (to_string(k) == name) return k;
  }
  throw ArgumentError("unknown challenge kind '" + std::string(name) + "'");
}

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Less: return "<";
    case Comparator::LessEqual: return "<=";
    case Comparator::Greater: return ">";
    case Comparator::GreaterEqual: return ">=";
    case Comparator::Equal: return "==";
  }
  return "==";
}

Comparator parse_comparator(std::string_view t) {
  for (auto c : {Comparator::Less, Comparator::LessEqual, Comparator::Greater,
                 Comparator::GreaterEqual, Comparator::Equal}) {
    if (to_string(c) == t) return c;
  }
  throw ArgumentError("unknown comparator '" + std::string(t) + "'");
}

bool compare(double lhs, Comparator c, double rhs) {
  switch (c) {
    case Comparator::Less: return lhs < rhs;
    case Comparator::LessEqual: return lhs <= rhs;
    case Comparator::Greater: return lhs > rhs;
    case Comparator::GreaterEqual: return lhs >= rhs;
    case Comparator::Equal: return lhs == rhs;
  }
  return false;
}

void Challenge::validate() const {
  const auto where = "challenge '" + id + "'";
  if (id.empty()) throw ConfigError("challenge has no id");
  if (kind != ChallengeKind::SkyPuzzle && map_ref.empty()) throw ConfigError(where + " has no map");
  if (algorithm.label.empty()) throw ConfigError(where + " algorithm has no label");
  if (start.has_value() != goal.has_value()) {
    throw ConfigError(where + " must fix both endpoints or neither");
  }
  switch (kind) {
    case ChallengeKind::PathCostTarget:
    case ChallengeKind::PickEndpoints:
      if (!std::isfinite(target_cost) || target_cost < 0) {
        throw ConfigError(where + " needs a finite, non-negative target cost");
      }
      break;
    case ChallengeKind::PredictNext:
      if (cursor < -1) throw ConfigError(where + " cursor must be >= -1");
      break;
    case ChallengeKind::SkyPuzzle:
      if (!puzzle) throw ConfigError(where + " has no puzzle");
      puzzle->validate();
      break;
    case ChallengeKind::MinSteps: break;
  }
}

namespace {

Cell cell_from(const json& j) { return Cell{j.at(0).get<int>(), j.at(1).get<int>()}; }

AlgorithmSpec spec_from(const json& j) {
  if (j.is_string()) return AlgorithmSpec::make(parse_algorithm(j.get<std::string>()));
  const auto kind = parse_algorithm(j.at("kind").get<std::string>());
  const auto h = parse_heuristic(j.value("heuristic", std::string("octile")));
  return AlgorithmSpec::make(kind, h, j.value("label", std::string()));
}

}  // namespace

Challenge parse_challenge(std::string_view doc, const std::string& puzzle_dir) {
  Challenge c;
  try {
    const auto j = json::parse(doc);
    c.id = j.at("id").get<std::string>();
    c.title = j.value("title", c.id);
    c.prompt = j.value("prompt", std::string());
    c.kind = parse_challenge_kind(j.at("kind").get<std::string>());
    c.map_ref = j.value("map", std::string());
    if (j.contains("algorithm")) c.algorithm = spec_from(j.at("algorithm"));
    if (j.contains("gate") && !j.at("gate").is_null()) c.gate = j.at("gate").get<std::string>();
    c.points = j.value("points", 0);
    if (j.contains("start")) c.start = cell_from(j.at("start"));
    if (j.contains("goal")) c.goal = cell_from(j.at("goal"));
    const json params = j.value("params", json::object());
    switch (c.kind) {
      case ChallengeKind::MinSteps:
        c.min_steps = params.at("n").get<std::size_t>();
        break;
      case ChallengeKind::PathCostTarget:
        c.comparator = parse_comparator(params.at("comparator").get<std::string>());
        c.target_cost = params.at("target").get<double>();
        break;
      case ChallengeKind::PickEndpoints:
        c.target_cost = params.at("cost").get<double>();
        break;
      case ChallengeKind::PredictNext:
        c.cursor = params.at("cursor").get<long>();
        break;
      case ChallengeKind::SkyPuzzle:
        if (params.contains("puzzle_file")) {
          const auto path = fs::path(puzzle_dir) / params.at("puzzle_file").get<std::string>();
          c.puzzle = load_puzzle(text::read_file(path.string()));
        } else {
          const auto& g = params.at("generate");
          c.puzzle = generate_puzzle(parse_puzzle_kind(g.at("kind").get<std::string>()),
                                     g.at("size").get<int>(), g.at("seed").get<std::uint64_t>());
        }
        break;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("challenge document: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("challenge document: ") + e.what());
  }
  c.validate();
  return c;
}

ChallengeCatalog ChallengeCatalog::load_dir(const std::string& dir) {
  ChallengeCatalog cat;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("challenge directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      cat.add(parse_challenge(text::read_file(f.string()), dir));
    } catch (const ConfigError& e) {
      throw ConfigError(f.filename().string() + ": " + e.what());
    }
  }
  return cat;
}

void ChallengeCatalog::add(Challenge c) {
  c.validate();
  if (items_.count(c.id)) throw ConfigError("duplicate challenge id '" + c.id + "'");
  auto id = c.id;
  items_.emplace(std::move(id), std::move(c));
}

const Challenge& ChallengeCatalog::get(const std::string& id) const {
  auto it = items_.find(id);
  if (it == items_.end()) throw NotFoundError("no challenge '" + id + "'");
  return it->second;
}

std::vector<std::string> ChallengeCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, c] : items_) out.push_back(id);
  return out;
}

void ChallengeCatalog::check_references(
    const std::function<bool(const std::string&)>& map_exists,
    const std::function<bool(const std::string&)>& book_exists) const {
  for (const auto& [id, c] : items_) {
    if (!c.map_ref.empty() && !map_exists(c.map_ref)) {
      throw ConfigError("challenge '" + id + "' references unknown map '" + c.map_ref + "'");
    }
    if (c.gate && !book_exists(*c.gate)) {
      throw ConfigError("challenge '" + id + "' is gated by unknown book '" + *c.gate + "'");
    }
  }
}

const ExecutionTrace* find_trace(const Challenge& challenge,
                                 const std::vector<ExecutionTrace>& traces) {
  for (const auto& t : traces) {
    if (t.spec.label == challenge.algorithm.label) return &t;
  }
  return nullptr;
}

std::optional<GridNode> next_expansion(const ExecutionTrace& trace, long cursor) {
  for (std::size_t s = static_cast<std::size_t>(std::max(0L, cursor + 1)); s < trace.events.size(); ++s) {
    if (trace.events[s].kind == TraceEventKind::ExpandCurrent) return trace.events[s].node;
  }
  return std::nullopt;
}

std::optional<double> shortest_cost(const TerrainSnapshot& snapshot, const WeightTable& table,
                                    Cell from, Cell to, const RunOptions& options) {
  auto t = run_algorithm(AlgorithmSpec::make(AlgorithmKind::Dijkstra), snapshot, table,
                         node_at(snapshot, from.x, from.z), node_at(snapshot, to.x, to.z),
                         options);
  if (!t.found()) return std::nullopt;
  return t.metrics.path_cost;
}

std::vector<std::pair<Cell, Cell>> endpoint_pairs_with_cost(const TerrainSnapshot& snapshot,
                                                            const WeightTable& table,
                                                            double cost,
                                                            const RunOptions& options,
                                                            std::size_t limit) {
  const auto& b = snapshot.bounds();
  if (b.width > kEndpointScanLimit || b.depth > kEndpointScanLimit) {
    throw ArgumentError("endpoint scan is limited to " + std::to_string(kEndpointScanLimit) +
                        "x" + std::to_string(kEndpointScanLimit) + " maps");
  }
  std::vector<std::pair<Cell, Cell>> out;
  for (int az = b.z; az < b.z + b.depth; ++az) {
    for (int ax = b.x; ax < b.x + b.width; ++ax) {
      const auto a = node_at(snapshot, ax, az);
      for (int gz = b.z; gz < b.z + b.depth; ++gz) {
        for (int gx = b.x; gx < b.x + b.width; ++gx) {
          const auto g = node_at(snapshot, gx, gz);
          if (heuristic_value(HeuristicKind::Octile, a, g, table) > cost) continue;
          std::optional<double> c;
          try {
            c = shortest_cost(snapshot, table, a.cell(), g.cell(), options);
          } catch (const ConfigError&) {
            continue;  // region too small to hold both endpoints
          }
          if (c && *c == cost) {
            out.emplace_back(a.cell(), g.cell());
            if (out.size() >= limit) return out;
          }
        }
      }
    }
  }
  return out;
}

namespace {

std::string cell_text(Cell c) {
  return "(" + std::to_string(c.x) + ", " + std::to_string(c.z) + ")";
}

Verdict fail(std::string why) { return Verdict{false, std::move(why), 0, std::nullopt}; }

}  // namespace

Verdict evaluate(const Challenge& ch, const EvaluationContext& ctx) {
  if (ch.gate && !ctx.gate_passed) {
    throw GateError("pass the quiz in book '" + *ch.gate + "' before attempting this challenge");
  }
  Verdict v;
  if (ch.kind == ChallengeKind::SkyPuzzle) {
    if (!ctx.graph) throw StateError("no puzzle graph loaded");
    const auto r = check_solution(*ch.puzzle, *ctx.graph, ctx.edits);
    v = r.kind == VerdictKind::Solved ? Verdict{true, {}, 0, std::nullopt} : fail(r.reason);
    if (v.pass) v.points = ch.points;
    return v;
  }

  if (!ctx.world || !ctx.table) throw StateError("session has no world");
  if (!ctx.run_snapshot || !ctx.traces) {
    throw StateError("run " + ch.algorithm.label + " before evaluating");
  }
  if (ctx.run_snapshot->world_version() != ctx.world->version()) {
    throw StalenessError("terrain changed since the last run; re-run the algorithm");
  }
  const auto* trace = find_trace(ch, *ctx.traces);
  if (!trace) throw StateError("the latest run did not include " + ch.algorithm.label);
  v.metrics = trace->metrics;

  if (ch.start && (trace->start.cell() != *ch.start || trace->goal.cell() != *ch.goal)) {
    v.pass = false;
    v.reason = "run from " + cell_text(*ch.start) + " to " + cell_text(*ch.goal);
    return v;
  }

  switch (ch.kind) {
    case ChallengeKind::MinSteps:
      if (!trace->found()) v.reason = "no path found";
      else if (trace->metrics.path_steps < ch.min_steps) {
        v.reason = "path has " + std::to_string(trace->metrics.path_steps) +
                   " steps, needs at least " + std::to_string(ch.min_steps);
      }
      break;
    case ChallengeKind::PathCostTarget:
      if (!trace->found()) v.reason = "no path found";
      else if (!compare(trace->metrics.path_cost, ch.comparator, ch.target_cost)) {
        v.reason = "path cost " + text::format_double(trace->metrics.path_cost) + " is not " +
                   std::string(to_string(ch.comparator)) + " " +
                   text::format_double(ch.target_cost);
      }
      break;
    case ChallengeKind::PredictNext: {
      if (!ctx.predicted) throw StateError("submit a prediction first");
      const auto next = next_expansion(*trace, ch.cursor);
      if (!next) v.reason = "no expansion follows step " + std::to_string(ch.cursor);
      else if (next->cell() != *ctx.predicted) {
        v.reason = "the next expanded node is not " + cell_text(*ctx.predicted);
      }
      break;
    }
    case ChallengeKind::PickEndpoints: {
      if (!ctx.endpoints) throw StateError("submit endpoints first");
      const auto [a, b] = *ctx.endpoints;
      const auto c = shortest_cost(*ctx.run_snapshot, *ctx.table, a, b, ctx.options);
      if (c && *c == ch.target_cost) break;
      const auto& bounds = ctx.run_snapshot->bounds();
      if (bounds.width <= kEndpointScanLimit && bounds.depth <= kEndpointScanLimit &&
          endpoint_pairs_with_cost(*ctx.run_snapshot, *ctx.table, ch.target_cost, ctx.options)
              .empty()) {
        v.reason = "no endpoint pair achieves cost " + text::format_double(ch.target_cost);
      } else if (!c) {
        v.reason = cell_text(b) + " is unreachable from " + cell_text(a);
      } else {
        v.reason = "shortest cost is " + text::format_double(*c) + ", expected " +
                   text::format_double(ch.target_cost);
      }
      break;
    }
    case ChallengeKind::SkyPuzzle: break;
  }
  v.pass = v.reason.empty();
  if (v.pass) v.points = ch.points;
  return v;
}

}  // namespace blockpath
