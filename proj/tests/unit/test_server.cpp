#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "blockpath/error.hpp"
#include "blockpath/protocol.hpp"
#include "blockpath/server.hpp"
#include "doctest.h"
#include "support/engine_client.hpp"

using namespace blockpath;
using blockpath::testing::EngineClient;
using blockpath::testing::types_of;
using protocol::Json;
using protocol::Message;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("blockpath-server-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ServerConfig fixture_config(const std::string& name, bool persistent = false) {
  const auto root = scratch(name);
  ServerConfig c;
  c.content_dir = testing::write_fixture_content(root / "content").string();
  if (persistent) c.data_dir = (root / "data").string();
  c.report_wall_time = false;
  c.clock = [n = std::make_shared<std::int64_t>(1000)] { return (*n)++; };
  return c;
}

std::string error_code(const std::vector<Message>& ms) {
  for (const auto& m : ms) {
    if (m.type == "error") return m.payload.at("code").get<std::string>();
  }
  return "";
}

}  // namespace

TEST_CASE("messages round-trip through the wire format") {
  std::vector<Message> samples = {
      {"ack", 3, "s1", Json{{"command", "run"}, {"labels", Json::array({"bfs"})}}},
      {"error", std::nullopt, std::nullopt, Json{{"code", "protocol_error"}, {"message", "x"}}},
      {"trace_steps", 9, "s2", Json{{"steps", Json::array({Json{{"tick", 0}, {"events", Json::array()}}})}}},
      {"terrain_changed", 1, "s1", Json{{"x", 1}, {"z", 2}, {"height", 2}, {"stale", true}}},
      {"metrics_report", 4, "s1", Json{{"rows", Json::array()}, {"cost", nullptr}, {"r", 0.25}}},
  };
  for (const auto& m : samples) {
    const auto line = protocol::serialize(m);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(protocol::parse_message(line) == m);
    CHECK(protocol::serialize(protocol::parse_message(line)) == line);
  }
  CHECK_THROWS_AS(protocol::parse_message("{not json"), ProtocolError);
  CHECK_THROWS_AS(protocol::parse_message(R"({"seq": 1})"), ProtocolError);
  CHECK_THROWS_AS(protocol::parse_message(R"({"type": "run", "extra": 1})"), ProtocolError);
  CHECK_THROWS_AS(protocol::parse_message(R"({"type": "run", "seq": "1"})"), ProtocolError);
  CHECK_THROWS_AS(protocol::parse_message("[1, 2]"), ProtocolError);
}

TEST_CASE("trace events and graphs encode and decode") {
  WorldModel w(4, 4, BlockType{"dirt"}, 1);
  auto snap = w.scan_surface();
  auto t = run_algorithm(AlgorithmSpec::make(AlgorithmKind::AStar), snap, WeightTable::defaults(),
                         node_at(snap, 0, 0), node_at(snap, 3, 3));
  const auto ev = protocol::to_json(t.events.front());
  CHECK(ev.at("algo") == "astar");
  CHECK(ev.at("step") == 0);
  CHECK(ev.at("node") == Json::array({0, 0, 1}));
  CHECK(protocol::parse_message(protocol::serialize({"x", 1, std::nullopt, ev})).payload == ev);
  CHECK(protocol::cost_json(INFINITY).is_null());

  auto p = generate_puzzle(PuzzleKind::CycleBreaker, 6, 3);
  CHECK(protocol::graph_from_json(protocol::to_json(p.initial)) == p.initial);
  const auto pj = protocol::to_json(p);
  CHECK_FALSE(pj.contains("witness"));
}

TEST_CASE("commands are validated against the catalogue") {
  auto cmd = [](const std::string& type, Json payload, bool session = true) {
    return Message{type, 1, session ? std::optional<std::string>("s1") : std::nullopt,
                   std::move(payload)};
  };
  CHECK_NOTHROW(protocol::validate_command(cmd("create_session", Json::object(), false)));
  CHECK_NOTHROW(protocol::validate_command(
      cmd("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({1, 2})}})));
  CHECK_THROWS_AS(protocol::validate_command(cmd("teleport", Json::object())), ProtocolError);
  CHECK_THROWS_AS(protocol::validate_command(cmd("get_state", Json::object(), false)), ProtocolError);
  CHECK_THROWS_AS(protocol::validate_command(cmd("set_speed", Json::object())), ProtocolError);
  CHECK_THROWS_AS(protocol::validate_command(cmd("set_speed", Json{{"speed", "fast"}})), ProtocolError);
  CHECK_THROWS_AS(protocol::validate_command(cmd("set_speed", Json{{"speed", 2}, {"x", 1}})),
                  ProtocolError);
  CHECK_THROWS_AS(protocol::validate_command(
                      cmd("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({1.5, 2})}})),
                  ProtocolError);
  Message no_seq{"get_state", std::nullopt, "s1", Json::object()};
  CHECK_THROWS_AS(protocol::validate_command(no_seq), ProtocolError);

  // every catalogued command with its required fields filled in passes
  for (const auto& spec : protocol::command_catalogue()) {
    Json payload = Json::object();
    for (const auto& f : spec.fields) {
      if (!f.required) continue;
      switch (f.type) {
        case protocol::FieldType::String: payload[f.name] = "a"; break;
        case protocol::FieldType::Integer: payload[f.name] = 1; break;
        case protocol::FieldType::Number: payload[f.name] = 1.5; break;
        case protocol::FieldType::Boolean: payload[f.name] = true; break;
        case protocol::FieldType::Array: payload[f.name] = Json::array(); break;
        case protocol::FieldType::Object: payload[f.name] = Json::object(); break;
        case protocol::FieldType::Cell: payload[f.name] = Json::array({0, 0}); break;
      }
    }
    CHECK_NOTHROW(protocol::validate_command(cmd(spec.type, payload, spec.needs_session)));
  }
}

TEST_CASE("schema errors and unknown sessions come back as coded error events") {
  Engine engine(fixture_config("errors"));
  EngineClient c(engine);
  c.send_raw("this is not json");
  c.send_raw(R"({"type":"get_state","seq":5,"session":"s99","payload":{}})");
  c.send_raw(R"({"type":"warp","seq":6,"session":"s1","payload":{}})");
  const auto evs = c.events();
  REQUIRE(evs.size() == 3);
  CHECK(evs[0].payload.at("code") == "protocol_error");
  CHECK_FALSE(evs[0].seq.has_value());
  CHECK(evs[1].payload.at("code") == "unknown_session");
  CHECK(evs[1].seq == 5);
  CHECK(evs[2].payload.at("code") == "protocol_error");
}

TEST_CASE("an instant run emits its events in order") {
  auto cfg = fixture_config("instant");
  cfg.batch_size = 4;
  Engine engine(cfg);
  EngineClient c(engine);
  const auto sid = c.open();
  CHECK(sid == "s1");
  auto load = c.call("load_map", Json{{"map", "soul_sand_5x5"}});
  CHECK(types_of(load) == std::vector<std::string>{"ack", "terrain"});
  CHECK(load[1].payload.at("width") == 5);
  CHECK(load[1].session == sid);

  CHECK(error_code(c.call("run", Json{{"algorithms", Json::array({"bfs"})}})) == "state_error");
  c.call("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({0, 2})}});
  c.call("select_endpoint", Json{{"which", "goal"}, {"cell", Json::array({4, 2})}});
  const auto evs = c.call("run", Json{{"algorithms", Json::array({"bfs", "dijkstra", "astar:euclidean"})},
                                      {"mode", "instant"}});
  REQUIRE(evs.size() >= 4);
  CHECK(evs[0].type == "ack");
  CHECK(evs[1].type == "run_started");
  CHECK(evs[evs.size() - 2].type == "run_finished");
  CHECK(evs.back().type == "metrics_report");
  std::int64_t expect_tick = 0;
  for (std::size_t i = 2; i + 2 < evs.size(); ++i) {
    REQUIRE(evs[i].type == "trace_steps");
    const auto& steps = evs[i].payload.at("steps");
    CHECK(steps.size() <= 4);
    for (const auto& s : steps) CHECK(s.at("tick") == expect_tick++);
  }
  std::int64_t longest = 0;
  for (const auto& n : evs[1].payload.at("steps")) longest = std::max(longest, n.get<std::int64_t>());
  CHECK(expect_tick == longest);
  const auto& results = evs[evs.size() - 2].payload.at("results");
  REQUIRE(results.size() == 3);
  CHECK(results[1].at("metrics").at("path_cost") == 4.0);
  CHECK(results[1].at("metrics").at("wall_time_ms") == 0);
  CHECK(results[2].at("label") == "astar");

  // after an instant run the debugger sits at the end
  auto back = c.call("step_back");
  CHECK(back[0].payload.at("moved") == true);
  auto fwd = c.call("step_fwd");
  CHECK(fwd[0].payload.at("tick") == longest - 1);
  CHECK(c.call("step_fwd")[0].payload.at("moved") == false);

  auto ins = c.call("inspect", Json{{"label", "dijkstra"}});
  CHECK(ins[0].payload.at("node") == Json::array({4, 2, 1}));
  CHECK(ins[0].payload.at("h") == 0.0);
  CHECK(error_code(c.call("inspect", Json{{"label", "nope"}})) == "not_found");
}

TEST_CASE("debugger commands without a run report state errors") {
  Engine engine(fixture_config("norun"));
  EngineClient c(engine);
  c.open();
  for (const auto* t : {"step_fwd", "step_back", "break", "continue"}) {
    auto evs = c.call(t);
    REQUIRE(evs.size() == 1);
    CHECK(evs[0].type == "error");
    CHECK(evs[0].payload.at("code") == "state_error");
  }
  CHECK(error_code(c.call("set_speed", Json{{"speed", 0}})) == "argument_error");
  CHECK(error_code(c.call("set_speed", Json{{"speed", 101}})) == "argument_error");
  CHECK(c.call("set_speed", Json{{"speed", 100}})[0].type == "ack");
}

TEST_CASE("break stops playback and nothing follows the acknowledgement") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto cfg = fixture_config("break");
    cfg.batch_size = 2;
    cfg.default_width = 16;
    cfg.default_depth = 16;
    Engine engine(cfg);
    EngineClient c(engine);
    c.open();
    c.call("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({0, 0})}});
    c.call("select_endpoint", Json{{"which", "goal"}, {"cell", Json::array({15, 15})}});
    const auto run = c.send("run", Json{{"algorithms", Json::array({"bfs", "dijkstra"})}, {"speed", 100}});
    c.wait_for([&](const Message& m) { return m.type == "trace_steps" && m.seq == run; });
    std::this_thread::sleep_for(std::chrono::milliseconds(rng() % 60));
    const auto brk = c.send("break");
    c.drain();
    const auto ack = c.wait_for([&](const Message& m) { return m.seq == brk; });
    CHECK(ack.type == "ack");
    const auto after_ack = c.count();
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    CHECK(c.count() == after_ack);
    // the last event is the acknowledgement itself
    CHECK(c.events().back().seq == brk);
    const long tick = ack.payload.at("tick").get<long>();
    long delivered = -1;
    for (const auto& m : c.events_for(run)) {
      if (m.type != "trace_steps") continue;
      for (const auto& s : m.payload.at("steps")) delivered = s.at("tick").get<long>();
    }
    CHECK(delivered == tick);

    // step back twice, continue, and playback resumes from the rewound tick
    c.call("step_back");
    c.call("step_back");
    const auto cont = c.send("continue");
    const auto first = c.wait_for(
        [&](const Message& m) { return m.type == "trace_steps" && m.seq == cont; });
    CHECK(first.payload.at("steps")[0].at("tick") == tick - 1);
    c.call("break");
  }
}

TEST_CASE("continue at the end stays paused") {
  Engine engine(fixture_config("contend"));
  EngineClient c(engine);
  c.open();
  c.call("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({0, 0})}});
  c.call("select_endpoint", Json{{"which", "goal"}, {"cell", Json::array({1, 1})}});
  c.call("run", Json{{"algorithms", Json::array({"dijkstra"})}, {"mode", "instant"}});
  auto evs = c.call("continue");
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].payload.at("mode") == "paused");
}

TEST_CASE("playback runs to the end and reports once") {
  Engine engine(fixture_config("playall"));
  EngineClient c(engine);
  c.open();
  c.call("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({0, 0})}});
  c.call("select_endpoint", Json{{"which", "goal"}, {"cell", Json::array({3, 3})}});
  const auto run = c.send("run", Json{{"algorithms", Json::array({"astar"})}, {"speed", 100}});
  c.wait_for([&](const Message& m) { return m.type == "metrics_report"; });
  c.drain();
  const auto evs = c.events_for(run);
  long ticks = 0;
  int finished = 0;
  for (const auto& m : evs) {
    if (m.type == "trace_steps") ticks += static_cast<long>(m.payload.at("steps").size());
    if (m.type == "run_finished") ++finished;
  }
  CHECK(finished == 1);
  CHECK(ticks == evs[1].payload.at("steps")[0].get<long>());
}

TEST_CASE("speed 1 ticks about once a second") {
  Engine engine(fixture_config("timing"));
  EngineClient c(engine);
  c.open();
  c.call("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({0, 0})}});
  c.call("select_endpoint", Json{{"which", "goal"}, {"cell", Json::array({5, 5})}});
  const auto run = c.send("run", Json{{"algorithms", Json::array({"bfs"})}, {"speed", 1}});
  std::vector<std::chrono::steady_clock::time_point> at;
  std::size_t seen = 0;
  while (at.size() < 3) {
    c.wait_for([&](const Message& m) { return m.type == "trace_steps"; }, std::chrono::seconds(5));
    const auto batches = c.events_for(run);
    std::size_t n = 0;
    for (const auto& m : batches) n += m.type == "trace_steps";
    if (n > seen) {
      for (; seen < n; ++seen) at.push_back(std::chrono::steady_clock::now());
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  c.call("break");
  for (std::size_t i = 1; i < at.size(); ++i) {
    const auto gap = std::chrono::duration<double>(at[i] - at[i - 1]).count();
    CHECK(gap > 0.7);
    CHECK(gap < 1.5);
  }
  // each batch at this speed holds a single step
  for (const auto& m : c.events_for(run)) {
    if (m.type == "trace_steps") CHECK(m.payload.at("steps").size() == 1);
  }
}

TEST_CASE("editing terrain after a run makes evaluation stale until re-run") {
  auto cfg = fixture_config("stale");
  Engine engine(cfg);
  EngineClient c(engine);
  c.open();
  // the gate blocks evaluation first
  auto start = c.call("start_challenge", Json{{"id", "soul"}});
  CHECK(types_of(start) == std::vector<std::string>{"ack", "terrain"});
  CHECK(start[0].payload.at("gate_passed") == false);
  CHECK(error_code(c.call("evaluate")) == "gate_locked");
  auto book = c.call("open_book", Json{{"id", "dijkstra"}});
  CHECK(book[1].type == "book");
  CHECK_FALSE(book[1].payload.dump().find("option*") != std::string::npos);
  auto quiz = c.call("submit_answers", Json{{"book", "dijkstra"}, {"answers", Json::array({1})}});
  CHECK(quiz[1].payload.at("gate_passed") == true);

  CHECK(error_code(c.call("evaluate")) == "state_error");
  const Json dijkstra = Json{{"algorithms", Json::array({"dijkstra"})}, {"mode", "instant"}};
  c.call("run", dijkstra);
  auto v0 = c.call("evaluate");
  CHECK(v0[1].payload.at("pass") == false);
  CHECK(v0[1].payload.at("reason") == "path cost 4 is not > 4");
  CHECK(v0[1].payload.at("failed_attempts") == 1);

  for (int x = 1; x <= 3; ++x) {
    auto e = c.call("set_block", Json{{"x", x}, {"z", 2}, {"y", 1}, {"block", "soul_sand"}});
    CHECK(e[1].type == "terrain_changed");
    CHECK(e[1].payload.at("stale") == true);
    CHECK(error_code(c.call("evaluate")) == "stale_run");
  }
  c.call("run", dijkstra);
  auto v1 = c.call("evaluate");
  CHECK(v1[1].payload.at("pass") == true);
  CHECK(v1[1].payload.at("points") == 10);
  CHECK(v1[1].payload.at("solved") == true);
}

TEST_CASE("sky puzzles run through the session") {
  Engine engine(fixture_config("puzzle"));
  EngineClient c(engine);
  c.open();
  auto start = c.call("start_challenge", Json{{"id", "cycles"}});
  CHECK(types_of(start) == std::vector<std::string>{"ack", "puzzle"});
  const auto puzzle = generate_puzzle(PuzzleKind::CycleBreaker, 5, 7);
  CHECK(protocol::graph_from_json(start[1].payload.at("graph")) == puzzle.initial);
  CHECK(c.call("evaluate")[1].payload.at("pass") == false);
  Edge w;
  for (const auto& e : puzzle.initial.edges()) {
    if (!puzzle.witness->edges().count(e)) w = e;
  }
  auto e = c.call("edit", Json{{"action", "remove_edge"}, {"a", w.from}, {"b", w.to}});
  CHECK(types_of(e) == std::vector<std::string>{"ack", "graph"});
  CHECK(c.call("check")[1].payload.at("verdict") == "solved");
  CHECK(c.call("evaluate")[1].payload.at("pass") == true);
  CHECK(error_code(c.call("edit", Json{{"action", "remove_edge"}, {"a", w.from}, {"b", w.to}})) ==
        "constraint_error");

  auto gen = c.call("load_puzzle",
                    Json{{"generate", Json{{"kind", "critical_edges"}, {"size", 6}, {"seed", 2}}}});
  CHECK(gen[1].type == "puzzle");
  CHECK(c.call("check")[1].payload.at("verdict") == "not_solved");
}

TEST_CASE("sessions are isolated") {
  Engine engine(fixture_config("iso"));
  EngineClient a(engine), b(engine);
  const auto sa = a.open();
  const auto sb = b.open();
  CHECK(sa != sb);
  const auto before = b.call("get_state")[1].payload.at("terrain");
  a.call("set_block", Json{{"x", 3}, {"z", 3}, {"y", 2}, {"block", "stone"}});
  a.call("select_endpoint", Json{{"which", "start"}, {"cell", Json::array({0, 0})}});
  const auto after = b.call("get_state")[1].payload;
  CHECK(after.at("terrain") == before);
  CHECK(after.at("start").is_null());
  CHECK(a.call("get_state")[1].payload.at("terrain") != before);
  CHECK(engine.session_count() == 2);
  a.call("close_session");
  CHECK(engine.session_count() == 1);
  CHECK(error_code(a.call("get_state")) == "unknown_session");
}

TEST_CASE("concurrent clients each see their own commands in order") {
  Engine engine(fixture_config("concurrent"));
  std::vector<std::unique_ptr<EngineClient>> clients;
  for (int i = 0; i < 6; ++i) {
    clients.push_back(std::make_unique<EngineClient>(engine));
    clients.back()->open();
  }
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&, i] {
      auto& c = *clients[i];
      for (int k = 0; k < 30; ++k) {
        c.send("set_block", Json{{"x", k % 12}, {"z", i}, {"y", 2}, {"block", "stone"}});
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& c : clients) {
    c->drain();
    std::int64_t last = 0;
    std::uint64_t version = 0;
    for (const auto& m : c->events()) {
      CHECK(m.session == c->session());
      CHECK(m.seq >= last);
      last = *m.seq;
      if (m.type == "terrain_changed") {
        CHECK(m.payload.at("world_version").get<std::uint64_t>() > version);
        version = m.payload.at("world_version").get<std::uint64_t>();
      }
    }
  }
}

TEST_CASE("telemetry survives an engine restart") {
  auto cfg = fixture_config("telemetry", true);
  for (int round = 0; round < 2; ++round) {
    Engine engine(cfg);
    EngineClient c(engine);
    c.open("ada");
    c.call("start_challenge", Json{{"id", "cycles"}});
    auto v = c.call("evaluate");
    CHECK(v[1].payload.at("failed_attempts") == round + 1);
  }
  Engine engine(cfg);
  EngineClient c(engine);
  c.open("ada");
  CHECK(c.call("start_challenge", Json{{"id", "cycles"}})[0].payload.at("failed_attempts") == 2);
  EngineClient other(engine);
  other.open("bo");
  CHECK(other.call("start_challenge", Json{{"id", "cycles"}})[0].payload.at("failed_attempts") == 0);
  CHECK(fs::exists(fs::path(*cfg.data_dir) / "telemetry" / "ada.jsonl"));
}

TEST_CASE("maps save to the data directory and reload") {
  auto cfg = fixture_config("maps", true);
  Engine engine(cfg);
  EngineClient c(engine);
  c.open();
  c.call("set_block", Json{{"x", 2}, {"z", 2}, {"y", 2}, {"block", "stone"}});
  CHECK(c.call("save_map", Json{{"name", "mine"}})[0].type == "ack");
  CHECK(error_code(c.call("save_map", Json{{"name", "../x"}})) == "argument_error");
  CHECK(error_code(c.call("load_map", Json{{"map", "missing"}})) == "not_found");
  auto l = c.call("load_map", Json{{"map", "mine"}});
  CHECK(l[1].payload.at("heights")[2 * 12 + 2] == 2);
  auto list = c.call("list_content");
  CHECK(list[0].payload.at("maps") == Json::array({"mine", "soul_sand_5x5"}));
  CHECK(list[0].payload.at("challenges") == Json::array({"cycles", "soul", "steps"}));
}

TEST_CASE("tcp transport carries newline-delimited json") {
  Engine engine(fixture_config("tcp"));
  TcpServer server(engine, "127.0.0.1", 0);
  REQUIRE(server.port() > 0);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(server.port()));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  const std::string req =
      R"({"type":"create_session","seq":1,"payload":{}})"
      "\n"
      R"({"type":"get_state","seq":2,"session":"s1","payload":{}})"
      "\n";
  REQUIRE(::send(fd, req.data(), req.size(), 0) == static_cast<ssize_t>(req.size()));
  std::string buf;
  char chunk[4096];
  std::vector<Message> got;
  while (got.size() < 3) {
    const auto n = ::recv(fd, chunk, sizeof chunk, 0);
    REQUIRE(n > 0);
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buf.find('\n')) != std::string::npos) {
      got.push_back(protocol::parse_message(buf.substr(0, pos)));
      buf.erase(0, pos + 1);
    }
  }
  CHECK(got[0].payload.at("session") == "s1");
  CHECK(got[1].type == "ack");
  CHECK(got[2].type == "state");
  ::close(fd);
  server.stop();
}

TEST_CASE("listen addresses") {
  CHECK(parse_listen_address(":7000") == std::pair<std::string, int>{"127.0.0.1", 7000});
  CHECK(parse_listen_address("0.0.0.0:80") == std::pair<std::string, int>{"0.0.0.0", 80});
  CHECK_THROWS_AS(parse_listen_address("7000"), ArgumentError);
  CHECK_THROWS_AS(parse_listen_address("h:x"), ArgumentError);
  CHECK_THROWS_AS(parse_listen_address("h:70000"), ArgumentError);
}

TEST_CASE("shipped content loads and every challenge is solvable") {
  const fs::path root = fs::path(BP_SOURCE_DIR) / "content";
  ServerConfig cfg;
  cfg.content_dir = root.string();
  cfg.report_wall_time = false;
  Engine engine(cfg);
  EngineClient c(engine);
  const auto list = c.call("list_content");
  REQUIRE(list.size() == 1);
  const auto& ids = list[0].payload.at("challenges");
  CHECK(ids.size() >= 5);

  const auto books = BookLibrary::load_dir((root / "books").string());
  for (const auto& id : books.ids()) {
    const auto& b = books.get(id);
    std::vector<std::size_t> right;
    for (const auto& q : b.quiz) right.push_back(q.correct);
    CHECK(grade_quiz(b, right).gate_passed);
  }

  const auto catalog = ChallengeCatalog::load_dir((root / "challenges").string());
  const auto table = load_weights_file((root / "weights" / "default.txt").string());
  for (const auto& id : catalog.ids()) {
    CAPTURE(id);
    const auto& ch = catalog.get(id);
    if (ch.kind == ChallengeKind::SkyPuzzle) {
      CHECK(check_solution(*ch.puzzle, *ch.puzzle->witness, ch.puzzle->witness_edits).kind ==
            VerdictKind::Solved);
      continue;
    }
    auto world = load_map_file((root / "maps" / (ch.map_ref + ".map")).string());
    auto snap = world.scan_surface();
    if (ch.kind == ChallengeKind::PickEndpoints) {
      CHECK_FALSE(endpoint_pairs_with_cost(snap, table, ch.target_cost).empty());
    }
    if (ch.kind == ChallengeKind::PredictNext) {
      auto t = run_algorithm(ch.algorithm, snap, table, node_at(snap, ch.start->x, ch.start->z),
                             node_at(snap, ch.goal->x, ch.goal->z));
      CHECK(next_expansion(t, ch.cursor).has_value());
    }
    if (ch.kind == ChallengeKind::MinSteps) {
      auto t = run_algorithm(ch.algorithm, snap, table, node_at(snap, 0, 0),
                             node_at(snap, world.width() - 1, world.depth() - 1));
      CHECK(t.metrics.path_steps >= ch.min_steps);
    }
  }
}

TEST_CASE("the shipped soul-sand challenge plays end to end") {
  ServerConfig cfg;
  cfg.content_dir = (fs::path(BP_SOURCE_DIR) / "content").string();
  cfg.report_wall_time = false;
  Engine engine(cfg);
  EngineClient c(engine);
  c.open();
  c.call("start_challenge", Json{{"id", "soul_sand"}});
  c.call("submit_answers", Json{{"book", "dijkstra"}, {"answers", Json::array({1, 0})}});
  const Json run{{"algorithms", Json::array({"dijkstra"})}, {"mode", "instant"}};
  c.call("run", run);
  CHECK(c.call("evaluate")[1].payload.at("pass") == false);
  for (int x = 1; x <= 3; ++x) {
    c.call("set_block", Json{{"x", x}, {"z", 2}, {"y", 1}, {"block", "soul_sand"}});
  }
  c.call("run", run);
  CHECK(c.call("evaluate")[1].payload.at("pass") == true);
}

namespace {

// Rows of the markdown table between <!-- name:begin --> and <!-- name:end -->,
// header and rule lines dropped, cells trimmed.
std::vector<std::vector<std::string>> doc_table(const std::string& doc, const std::string& name) {
  const auto begin = doc.find("<!-- " + name + ":begin -->");
  const auto end = doc.find("<!-- " + name + ":end -->");
  REQUIRE(begin != std::string::npos);
  REQUIRE(end != std::string::npos);
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(doc.substr(begin, end - begin));
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '|') continue;
    if (seen++ < 2) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream cs(line.substr(1));
    while (std::getline(cs, cell, '|')) {
      const auto a = cell.find_first_not_of(' ');
      const auto b = cell.find_last_not_of(' ');
      cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    rows.push_back(cells);
  }
  return rows;
}

std::string unquote(const std::string& s) {
  return s.size() >= 2 && s.front() == '`' && s.back() == '`' ? s.substr(1, s.size() - 2) : s;
}

}  // namespace

TEST_CASE("the protocol document matches the command catalogue") {
  const auto doc = text::read_file(std::string(BP_SOURCE_DIR) + "/docs/protocol.md");
  const auto rows = doc_table(doc, "commands");
  const auto& catalogue = protocol::command_catalogue();
  REQUIRE(rows.size() == catalogue.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& spec = catalogue[i];
    CAPTURE(spec.type);
    CHECK(unquote(rows[i][0]) == spec.type);
    CHECK(rows[i][1] == (spec.needs_session ? "yes" : "no"));
    std::string fields;
    for (const auto& f : spec.fields) {
      if (!fields.empty()) fields += ", ";
      auto type = std::string(protocol::to_string(f.type));
      type = type.substr(0, type.find(' '));
      fields += "`" + f.name + (f.required ? "" : "?") + "` " + type;
    }
    CHECK(rows[i][2] == fields);
  }

  const auto events = doc_table(doc, "events");
  REQUIRE(events.size() == protocol::event_types().size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(unquote(events[i][0]) == protocol::event_types()[i]);
  }

  std::set<std::string> documented;
  for (const auto& r : doc_table(doc, "errors")) documented.insert(unquote(r[0]));
  const std::vector<std::string> codes = {
      ArgumentError("").code(),   BoundsError("").code(),   RegistryError("").code(),
      StateError("").code(),      ConfigError("").code(),   OracleError("").code(),
      ConstraintError("").code(), StalenessError("").code(), GateError("").code(),
      IoError("").code(),         NotFoundError("").code(), SessionError("").code(),
      ProtocolError("").code(),   ParseError(1, "").code(), "internal_error"};
  CHECK(documented == std::set<std::string>(codes.begin(), codes.end()));
}
