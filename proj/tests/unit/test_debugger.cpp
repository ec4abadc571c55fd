#include <random>
#include <set>

#include "blockpath/debugger.hpp"
#include "blockpath/error.hpp"
#include "doctest.h"
#include "support/fold_oracle.hpp"
#include "support/random_maps.hpp"

using namespace blockpath;

namespace {

std::vector<ExecutionTrace> three_runs(std::uint64_t seed, int size = 8) {
  std::mt19937_64 rng(seed);
  auto world = testing::random_world(rng, size, size, testing::kFourBlocks, 1);
  auto s = world.scan_surface();
  auto a = node_at(s, testing::uniform_int(rng, 0, size - 1),
                   testing::uniform_int(rng, 0, size - 1));
  auto b = node_at(s, testing::uniform_int(rng, 0, size - 1),
                   testing::uniform_int(rng, 0, size - 1));
  return run_parallel({AlgorithmSpec::make(AlgorithmKind::BFS),
                       AlgorithmSpec::make(AlgorithmKind::Dijkstra),
                       AlgorithmSpec::make(AlgorithmKind::AStar)},
                      s, WeightTable::defaults(), a, b)
      .traces;
}

std::vector<ExecutionTrace> flat_run(AlgorithmKind kind, int w, int d, Cell a, Cell b) {
  WorldModel world(w, d, BlockType{"dirt"}, 1);
  auto s = world.scan_surface();
  return {run_algorithm(AlgorithmSpec::make(kind), s, WeightTable::defaults(),
                        node_at(s, a.x, a.z), node_at(s, b.x, b.z))};
}

void check_disjoint(const VisualState& state) {
  for (const auto& t : state.traces) {
    std::set<Cell> visited(t.visited.begin(), t.visited.end());
    for (const auto& c : t.frontier) CHECK(visited.count(c) == 0);
    if (t.current) {
      CHECK(visited.count(*t.current) == 0);
      for (const auto& c : t.frontier) CHECK(c != *t.current);
    }
  }
}

}  // namespace

TEST_CASE("first step shows the start as current") {
  auto traces = flat_run(AlgorithmKind::Dijkstra, 5, 5, {0, 0}, {4, 4});
  DebugSession dbg(traces);
  auto empty = dbg.materialize();
  CHECK(empty.traces[0].cursor == -1);
  CHECK(empty.traces[0].visited.empty());
  CHECK_FALSE(empty.traces[0].current);

  auto r = dbg.step_forward();
  CHECK(r.moved);
  const auto& v = r.state.traces[0];
  REQUIRE(v.current);
  CHECK(*v.current == Cell{0, 0});
  CHECK(v.visited.empty());
  auto ins = dbg.inspect("dijkstra");
  CHECK(ins.g_cost == 0.0);
  CHECK(ins.visited_count == 1);
  CHECK(ins.status == TraceEventKind::ExpandCurrent);
}

TEST_CASE("stepping to the end populates the path and stays paused") {
  auto traces = flat_run(AlgorithmKind::AStar, 6, 6, {0, 0}, {5, 3});
  DebugSession dbg(traces);
  while (!dbg.at_end()) {
    CHECK(dbg.materialize().traces[0].path.empty());
    dbg.step_forward();
  }
  auto state = dbg.materialize();
  CHECK(dbg.mode() == PlaybackMode::Paused);
  CHECK(state.traces[0].finished);
  CHECK(state.traces[0].path.size() == traces[0].path.size());
  CHECK_FALSE(state.traces[0].current);

  auto ins = dbg.inspect("astar");
  CHECK(ins.status == TraceEventKind::FinishFound);
  CHECK(ins.g_cost == traces[0].metrics.path_cost);

  auto noop = dbg.step_forward();
  CHECK_FALSE(noop.moved);
  CHECK(noop.state == state);
}

TEST_CASE("h at the goal expansion is zero") {
  for (auto h : {HeuristicKind::Octile, HeuristicKind::Euclidean}) {
    WorldModel world(6, 6, BlockType{"dirt"}, 1);
    auto s = world.scan_surface();
    auto t = run_algorithm(AlgorithmSpec::make(AlgorithmKind::AStar, h), s,
                           WeightTable::defaults(), node_at(s, 0, 1), node_at(s, 5, 4));
    DebugSession dbg({t});
    while (!dbg.at_end()) dbg.step_forward();
    dbg.step_back();  // the goal's ExpandCurrent
    auto ins = dbg.inspect("astar");
    CHECK(ins.status == TraceEventKind::ExpandCurrent);
    CHECK(ins.node.cell() == Cell{5, 4});
    CHECK(ins.h_value == 0.0);
  }
}

TEST_CASE("back from cursor 0 returns to the empty state; boundary is a no-op") {
  auto traces = flat_run(AlgorithmKind::BFS, 4, 4, {0, 0}, {3, 3});
  DebugSession dbg(traces);
  auto origin = dbg.materialize();
  auto noop = dbg.step_back();
  CHECK_FALSE(noop.moved);
  CHECK(noop.state == origin);
  for (int i = 0; i < 5; ++i) dbg.step_forward();
  for (int i = 0; i < 5; ++i) CHECK(dbg.step_back().moved);
  CHECK(dbg.materialize() == origin);
  CHECK(dbg.tick() == -1);
  CHECK_THROWS_AS(dbg.inspect("bfs"), StateError);
  CHECK_THROWS_AS(dbg.inspect("nope"), NotFoundError);
}

TEST_CASE("shorter trace freezes while the longer advances") {
  auto traces = three_runs(5, 10);
  std::size_t shortest = 0, longest = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].events.size() < traces[shortest].events.size()) shortest = i;
    if (traces[i].events.size() > traces[longest].events.size()) longest = i;
  }
  REQUIRE(traces[shortest].events.size() < traces[longest].events.size());
  DebugSession dbg(traces);
  while (dbg.cursor(shortest) < static_cast<long>(traces[shortest].last_step())) {
    dbg.step_forward();
  }
  auto frozen = dbg.materialize().traces[shortest];
  auto before = dbg.cursor(longest);
  dbg.step_forward();
  CHECK(dbg.materialize().traces[shortest] == frozen);
  CHECK(dbg.cursor(longest) == before + 1);
  // stepping back past the freeze point moves the short trace again
  dbg.step_back();
  dbg.step_back();
  CHECK(dbg.materialize().traces[shortest] != frozen);
}

TEST_CASE("property: random stepping always equals the fold from scratch") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    auto traces = three_runs(1000 + static_cast<std::uint64_t>(trial), 12);
    DebugSession dbg(traces);
    for (int cmd = 0; cmd < 200; ++cmd) {
      const bool fwd = testing::uniform_int(rng, 0, 2) > 0;
      const auto before = dbg.materialize();
      auto r = fwd ? dbg.step_forward() : dbg.step_back();
      REQUIRE(r.state == testing::fold_all(traces, dbg.tick()));
      check_disjoint(r.state);
      if (r.moved) {
        // undo and redo reproduce the neighbouring states exactly
        auto undo = fwd ? dbg.step_back() : dbg.step_forward();
        CHECK(undo.state == before);
        auto redo = fwd ? dbg.step_forward() : dbg.step_back();
        CHECK(redo.state == r.state);
      }
    }
  }
}

TEST_CASE("checkpoints agree with plain folding at every cursor of a long trace") {
  auto traces = flat_run(AlgorithmKind::Dijkstra, 24, 24, {0, 0}, {23, 23});
  REQUIRE(traces[0].events.size() > 3 * DebugSession::kCheckpointInterval);
  DebugSession dbg(traces);
  while (!dbg.at_end()) {
    auto r = dbg.step_forward();
    REQUIRE(r.state.traces[0] == testing::fold_from_scratch(traces[0], dbg.tick()));
  }
}

TEST_CASE("playback visits the same states as manual stepping") {
  auto traces = three_runs(9);
  DebugSession manual(traces), played(traces);
  std::vector<VisualState> a, b;
  while (!manual.at_end()) a.push_back(manual.step_forward().state);
  CHECK(played.set_mode(PlaybackMode::Playing) == PlaybackMode::Playing);
  CHECK_THROWS_AS(played.step_forward(), StateError);
  while (played.mode() == PlaybackMode::Playing) {
    auto r = played.advance_playback();
    if (r.moved) b.push_back(r.state);
  }
  CHECK(a == b);
  CHECK(played.set_mode(PlaybackMode::Playing) == PlaybackMode::Paused);
}

TEST_CASE("continue after rewinding resumes from the rewound cursor") {
  auto traces = three_runs(10);
  DebugSession dbg(traces);
  for (int i = 0; i < 8; ++i) dbg.step_forward();
  for (int i = 0; i < 3; ++i) dbg.step_back();
  dbg.set_mode(PlaybackMode::Playing);
  CHECK(dbg.set_mode(PlaybackMode::Playing) == PlaybackMode::Playing);
  dbg.advance_playback();
  CHECK(dbg.tick() == 5);
  CHECK(dbg.set_mode(PlaybackMode::Paused) == PlaybackMode::Paused);
  CHECK_FALSE(dbg.advance_playback().moved);
  CHECK(dbg.tick() == 5);
}

TEST_CASE("speed validation and interval") {
  auto traces = flat_run(AlgorithmKind::BFS, 3, 3, {0, 0}, {2, 2});
  DebugSession dbg(traces);
  CHECK(dbg.set_speed(1) == 1.0);
  CHECK(dbg.tick_interval() == std::chrono::seconds(1));
  CHECK(dbg.set_speed(100) == 100.0);
  CHECK_THROWS_AS(dbg.set_speed(0), ArgumentError);
  CHECK_THROWS_AS(dbg.set_speed(-3), ArgumentError);
  CHECK_THROWS_AS(dbg.set_speed(100.5), ArgumentError);
  CHECK(dbg.speed() == 100.0);
  CHECK_THROWS_AS(DebugSession({}), ArgumentError);
}

TEST_CASE("start = goal trace shows the start as visited") {
  auto traces = flat_run(AlgorithmKind::AStar, 3, 3, {1, 1}, {1, 1});
  DebugSession dbg(traces);
  auto r = dbg.step_forward();
  CHECK(r.state.traces[0].visited == std::vector<Cell>{{1, 1}});
  CHECK(r.state.traces[0].path == std::vector<Cell>{{1, 1}});
  CHECK(dbg.at_end());
}

TEST_CASE("events_at_tick lists only traces still moving") {
  auto traces = three_runs(5, 10);
  DebugSession dbg(traces);
  CHECK(dbg.events_at_tick().empty());
  dbg.step_forward();
  CHECK(dbg.events_at_tick().size() == traces.size());
  while (!dbg.at_end()) dbg.step_forward();
  std::size_t moving = 0;
  for (const auto& t : traces) moving += static_cast<long>(t.last_step()) == dbg.tick();
  CHECK(dbg.events_at_tick().size() == moving);
}
