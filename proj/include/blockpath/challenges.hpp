#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockpath/algorithms.hpp"
#include "blockpath/skygraph.hpp"

namespace blockpath {

enum class ChallengeKind { MinSteps, PathCostTarget, PickEndpoints, PredictNext, SkyPuzzle };

std::string_view to_string(ChallengeKind kind);
ChallengeKind parse_challenge_kind(std::string_view name);

enum class Comparator { Less, LessEqual, Greater, GreaterEqual, Equal };

std::string_view to_string(Comparator c);
Comparator parse_comparator(std::string_view text);
bool compare(double lhs, Comparator c, double rhs);

struct Challenge {
  std::string id;
  std::string title;
  std::string prompt;
  ChallengeKind kind = ChallengeKind::MinSteps;
  std::string map_ref;  // empty for sky puzzles
  AlgorithmSpec algorithm = AlgorithmSpec::make(AlgorithmKind::Dijkstra);
  std::optional<std::string> gate;  // book id
  int points = 0;
  // Endpoints fixed by the challenge; runs with other endpoints fail.
  std::optional<Cell> start, goal;

  std::size_t min_steps = 0;                      // MinSteps
  Comparator comparator = Comparator::Greater;    // PathCostTarget
  double target_cost = 0;                         // PathCostTarget, PickEndpoints
  long cursor = -1;                               // PredictNext
  std::optional<Puzzle> puzzle;                   // SkyPuzzle

  // ConfigError on missing or ill-formed kind parameters.
  void validate() const;
};

// JSON challenge document; puzzle_dir resolves "puzzle_file" references.
Challenge parse_challenge(std::string_view json, const std::string& puzzle_dir = ".");

class ChallengeCatalog {
 public:
  // Loads every *.json file in the directory.
  static ChallengeCatalog load_dir(const std::string& dir);

  void add(Challenge c);
  bool contains(const std::string& id) const { return items_.count(id) > 0; }
  const Challenge& get(const std::string& id) const;  // NotFoundError
  std::vector<std::string> ids() const;

  // ConfigError naming the first challenge whose map or gate is unknown.
  void check_references(const std::function<bool(const std::string&)>& map_exists,
                        const std::function<bool(const std::string&)>& book_exists) const;

 private:
  std::map<std::string, Challenge> items_;
};

// Everything evaluate reads from a session.
struct EvaluationContext {
  const WorldModel* world = nullptr;
  const WeightTable* table = nullptr;
  // Snapshot and traces of the latest run, if any.
  const TerrainSnapshot* run_snapshot = nullptr;
  const std::vector<ExecutionTrace>* traces = nullptr;
  bool gate_passed = true;

  std::optional<Cell> predicted;                    // PredictNext
  std::optional<std::pair<Cell, Cell>> endpoints;   // PickEndpoints
  const SkyGraph* graph = nullptr;                  // SkyPuzzle
  std::size_t edits = 0;
  RunOptions options;
};

struct Verdict {
  bool pass = false;
  std::string reason;  // empty on pass
  int points = 0;      // awarded on pass
  std::optional<RunMetrics> metrics;
};

inline constexpr int kEndpointScanLimit = 16;

// Throws GateError, StalenessError, or StateError (no run yet). Sky
// puzzles need neither a run nor fresh terrain.
Verdict evaluate(const Challenge& challenge, const EvaluationContext& ctx);

// The trace a challenge reads: the one labelled like its algorithm.
const ExecutionTrace* find_trace(const Challenge& challenge,
                                 const std::vector<ExecutionTrace>& traces);
// Node of the next ExpandCurrent after the cursor, if any.
std::optional<GridNode> next_expansion(const ExecutionTrace& trace, long cursor);

// Region-confined shortest cost from Dijkstra; nullopt if unreachable.
std::optional<double> shortest_cost(const TerrainSnapshot& snapshot, const WeightTable& table,
                                    Cell from, Cell to, const RunOptions& options = {});
// Ordered endpoint pairs whose shortest cost is exactly `cost`. Pairs whose
// lower bound already exceeds the cost are skipped. ArgumentError on maps
// larger than kEndpointScanLimit in either direction.
std::vector<std::pair<Cell, Cell>> endpoint_pairs_with_cost(const TerrainSnapshot& snapshot,
                                                            const WeightTable& table,
                                                            double cost,
                                                            const RunOptions& options = {},
                                                            std::size_t limit = 1);

struct AttemptRecord {
  std::string challenge;
  std::int64_t timestamp_ms = 0;
  bool pass = false;
  std::string reason;
  std::size_t edits = 0;
  std::optional<RunMetrics> metrics;
};

std::string to_jsonl(const AttemptRecord& r);
AttemptRecord attempt_from_jsonl(std::string_view line);

// Append-only attempt log. With a path, every record is appended to a
// line-delimited file and existing records are loaded on construction.
class TelemetryStore {
 public:
  using Clock = std::function<std::int64_t()>;  // milliseconds

  explicit TelemetryStore(std::optional<std::string> path = std::nullopt, Clock clock = {});

  // Keeps the record in memory even when the write fails, then throws IoError.
  AttemptRecord record(const std::string& challenge, const Verdict& verdict, std::size_t edits);

  std::size_t failed_attempts(const std::string& challenge) const;
  bool solved(const std::string& challenge) const;
  std::vector<AttemptRecord> attempts() const;  // timestamp order
  std::string export_jsonl() const;

 private:
  std::optional<std::string> path_;
  Clock clock_;
  mutable std::mutex mu_;
  std::vector<AttemptRecord> records_;
};

}  // namespace blockpath
