#include <condition_variable>
#include <deque>
#include <filesystem>
#include <future>
#include <map>
#include <set>
#include <mutex>
#include <stop_token>

#include "blockpath/error.hpp"
#include "blockpath/protocol.hpp"
#include "blockpath/server.hpp"
#include "blockpath/text.hpp"

namespace fs = std::filesystem;

namespace blockpath {

using protocol::Json;
using protocol::Message;

namespace {

constexpr const char* kTickType = "_tick";
constexpr const char* kBarrierType = "_barrier";

bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

AlgorithmSpec spec_from(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto colon = s.find(':');
    if (colon == std::string::npos) return AlgorithmSpec::make(parse_algorithm(s));
    return AlgorithmSpec::make(parse_algorithm(s.substr(0, colon)),
                               parse_heuristic(s.substr(colon + 1)));
  }
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ProtocolError("algorithms are names or {kind, heuristic, label} objects");
  }
  const auto h = j.contains("heuristic") ? parse_heuristic(j.at("heuristic").get<std::string>())
                                         : HeuristicKind::Octile;
  return AlgorithmSpec::make(parse_algorithm(j.at("kind").get<std::string>()), h,
                             j.value("label", std::string()));
}

}  // namespace

class Session;

struct Engine::Impl {
  ServerConfig config;
  BookLibrary books;
  ChallengeCatalog challenges;
  WeightTable default_weights = WeightTable::defaults();
  GateStore gates;

  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::vector<std::shared_ptr<Session>> retired;
  std::uint64_t next_id = 1;
  std::map<std::string, std::shared_ptr<TelemetryStore>> telemetry;

  explicit Impl(ServerConfig c);

  std::optional<std::string> map_path(const std::string& id) const {
    if (!valid_name(id)) return std::nullopt;
    std::error_code ec;
    if (config.data_dir) {
      auto p = fs::path(*config.data_dir) / "maps" / (id + ".map");
      if (fs::is_regular_file(p, ec)) return p.string();
    }
    auto p = fs::path(config.content_dir) / "maps" / (id + ".map");
    if (fs::is_regular_file(p, ec)) return p.string();
    return std::nullopt;
  }

  std::vector<std::string> map_ids() const {
    std::set<std::string> ids;
    std::vector<fs::path> dirs{fs::path(config.content_dir) / "maps"};
    if (config.data_dir) dirs.push_back(fs::path(*config.data_dir) / "maps");
    for (const auto& d : dirs) {
      std::error_code ec;
      if (!fs::is_directory(d, ec)) continue;
      for (const auto& e : fs::directory_iterator(d)) {
        if (e.path().extension() == ".map") ids.insert(e.path().stem().string());
      }
    }
    return {ids.begin(), ids.end()};
  }

  std::shared_ptr<TelemetryStore> telemetry_for(const std::string& student) {
    std::lock_guard lock(mu);
    auto& slot = telemetry[student];
    if (!slot) {
      std::optional<std::string> path;
      if (config.data_dir) {
        path = (fs::path(*config.data_dir) / "telemetry" / (student + ".jsonl")).string();
      }
      slot = std::make_shared<TelemetryStore>(path, config.clock);
    }
    return slot;
  }
};

// One client session: world, run, debugger, challenge and puzzle state,
// plus the serial executor that owns them.
class Session {
 public:
  Session(Engine::Impl& engine, std::string id, std::string student)
      : engine_(engine),
        id_(std::move(id)),
        student_(std::move(student)),
        world_(engine.config.default_width, engine.config.default_depth, BlockType{"grass"}, 1),
        table_(engine.default_weights),
        speed_(engine.config.default_speed),
        telemetry_(engine.telemetry_for(student_)) {
    worker_ = std::thread([this] { work(); });
    ticker_ = std::jthread([this](std::stop_token st) { tick_loop(st); });
  }

  ~Session() { stop(); }

  void post(Message m, EventSink sink) {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      queue_.emplace_back(std::move(m), std::move(sink));
    }
    cv_.notify_one();
  }

  void drain() {
    std::promise<void> done;
    auto f = done.get_future();
    {
      std::lock_guard lock(mu_);
      if (stopping_ || !worker_.joinable()) return;
      Message m;
      m.type = kBarrierType;
      queue_.emplace_back(std::move(m), EventSink{});
      barriers_.push_back(std::move(done));
    }
    cv_.notify_one();
    f.wait();
  }

  void stop() {
    ticker_.request_stop();
    tick_cv_.notify_all();
    if (ticker_.joinable()) ticker_.join();
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_one();
    if (worker_.joinable()) worker_.join();
  }

 private:
  // -- executor --------------------------------------------------------

  void work() {
    for (;;) {
      std::pair<Message, EventSink> item;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        item = std::move(queue_.front());
        queue_.pop_front();
      }
      if (item.first.type == kBarrierType) {
        std::promise<void> p;
        {
          std::lock_guard lock(mu_);
          p = std::move(barriers_.front());
          barriers_.pop_front();
        }
        p.set_value();
        continue;
      }
      execute(item.first, item.second);
    }
  }

  void tick_loop(std::stop_token st) {
    std::unique_lock lock(tick_mu_);
    while (!st.stop_requested()) {
      tick_cv_.wait(lock, st, [&] { return playing_.load(); });
      if (st.stop_requested()) return;
      const auto interval = std::chrono::nanoseconds(interval_ns_.load());
      tick_cv_.wait_for(lock, st, interval, [] { return false; });
      if (st.stop_requested()) return;
      if (!playing_ || tick_pending_.exchange(true)) continue;
      Message m;
      m.type = kTickType;
      m.seq = static_cast<std::int64_t>(generation_.load());
      post(std::move(m), EventSink{});
    }
  }

  void set_playing(bool on) {
    {
      std::lock_guard lock(tick_mu_);
      playing_ = on;
      if (debugger_) interval_ns_ = debugger_->tick_interval().count();
    }
    tick_cv_.notify_all();
  }

  // -- events ----------------------------------------------------------

  void emit(const EventSink& sink, const std::string& type, std::optional<std::int64_t> seq,
            Json payload = Json::object()) {
    if (!sink) return;
    sink(protocol::serialize(Message{type, seq, id_, std::move(payload)}));
  }

  void execute(const Message& m, const EventSink& sink) {
    if (m.type == kTickType) {
      tick_pending_ = false;
      on_tick(static_cast<std::uint64_t>(*m.seq));
      return;
    }
    try {
      dispatch(m, sink);
    } catch (const Error& e) {
      emit(sink, "error", m.seq, Json{{"code", e.code()}, {"message", e.what()}});
    } catch (const Json::exception& e) {
      emit(sink, "error", m.seq, Json{{"code", "protocol_error"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      emit(sink, "error", m.seq, Json{{"code", "internal_error"}, {"message", e.what()}});
    }
  }

  void dispatch(const Message& m, const EventSink& sink) {
    const auto& p = m.payload;
    const auto& t = m.type;
    if (t == "create_session") return ack(sink, m, Json{{"session", id_}, {"student", student_}});
    if (t == "close_session") {
      stop_playback(nullptr);
      return ack(sink, m);
    }
    if (t == "get_state") {
      ack(sink, m);
      return emit(sink, "state", m.seq, state_json());
    }
    if (t == "load_map") return load_map(m, sink);
    if (t == "save_map") return save_map(m, sink);
    if (t == "set_block") return set_block(m, sink);
    if (t == "set_weights") {
      table_ = load_weights(p.at("document").get<std::string>(), world_.registry());
      return ack(sink, m);
    }
    if (t == "select_endpoint") return select_endpoint(m, sink);
    if (t == "run") return run(m, sink);
    if (t == "break") {
      need_debugger();
      stop_playback(&sink);
      return ack(sink, m, Json{{"mode", "paused"}, {"tick", debugger_->tick()}});
    }
    if (t == "continue") return resume(m, sink);
    if (t == "step_fwd" || t == "step_back") return step(m, sink, t == "step_fwd");
    if (t == "set_speed") {
      const double s = p.at("speed").get<double>();
      check_speed(s);
      if (debugger_) debugger_->set_speed(s);
      speed_ = s;
      if (debugger_) interval_ns_ = debugger_->tick_interval().count();
      return ack(sink, m, Json{{"speed", speed_}});
    }
    if (t == "inspect") {
      const auto ins = need_debugger().inspect(p.at("label").get<std::string>());
      return ack(sink, m,
                 Json{{"label", p.at("label")}, {"node", protocol::node_json(ins.node)},
                      {"g", protocol::cost_json(ins.g_cost)}, {"h", ins.h_value},
                      {"status", std::string(to_string(ins.status))},
                      {"visited_count", ins.visited_count}});
    }
    if (t == "start_challenge") return start_challenge(m, sink);
    if (t == "submit_prediction") {
      need_challenge();
      predicted_ = protocol::cell_from(p.at("cell"));
      return ack(sink, m);
    }
    if (t == "submit_endpoints") {
      need_challenge();
      picked_ = std::pair{protocol::cell_from(p.at("start")), protocol::cell_from(p.at("goal"))};
      return ack(sink, m);
    }
    if (t == "evaluate") return evaluate_challenge(m, sink);
    if (t == "load_puzzle") return load_puzzle_cmd(m, sink);
    if (t == "edit") return edit_graph(m, sink);
    if (t == "check") {
      if (!puzzle_) throw StateError("no puzzle loaded");
      const auto v = check_solution(*puzzle_, *graph_, edits_);
      ack(sink, m);
      return emit(sink, "puzzle_verdict", m.seq,
                  Json{{"verdict", std::string(to_string(v.kind))}, {"reason", v.reason},
                       {"edits", edits_},
                       {"budget", puzzle_->budget ? Json(*puzzle_->budget) : Json(nullptr)}});
    }
    if (t == "open_book") {
      const auto& book = engine_.books.get(p.at("id").get<std::string>());
      ack(sink, m);
      auto j = protocol::book_json(book);
      j["gate_passed"] = engine_.gates.passed(student_, book.id);
      return emit(sink, "book", m.seq, std::move(j));
    }
    if (t == "submit_answers") return submit_answers(m, sink);
    throw ProtocolError("unhandled command '" + t + "'");
  }

  void ack(const EventSink& sink, const Message& m, Json payload = Json::object()) {
    payload["command"] = m.type;
    emit(sink, "ack", m.seq, std::move(payload));
  }

  // -- terrain ---------------------------------------------------------

  void reset_run() {
    stop_playback(nullptr);
    debugger_.reset();
    traces_.clear();
    run_snapshot_.reset();
    finish_reported_ = false;
  }

  void replace_world(WorldModel w) {
    reset_run();
    world_ = std::move(w);
    start_.reset();
    goal_.reset();
    terrain_edits_ = 0;
  }

  Json terrain_json() {
    // A full capture for display; revision bumps are harmless here.
    return protocol::to_json(world_.scan_surface());
  }

  void load_map(const Message& m, const EventSink& sink) {
    const auto& p = m.payload;
    if (p.contains("map") == p.contains("document")) {
      throw ProtocolError("load_map takes exactly one of 'map' or 'document'");
    }
    std::string name = "inline";
    if (p.contains("map")) {
      name = p.at("map").get<std::string>();
      const auto path = engine_.map_path(name);
      if (!path) throw NotFoundError("no map '" + name + "'");
      replace_world(load_map_file(*path));
    } else {
      replace_world(blockpath::load_map(p.at("document").get<std::string>()));
    }
    ack(sink, m, Json{{"map", name}, {"width", world_.width()}, {"depth", world_.depth()}});
    emit(sink, "terrain", m.seq, terrain_json());
  }

  void save_map(const Message& m, const EventSink& sink) {
    const auto name = m.payload.at("name").get<std::string>();
    if (!valid_name(name)) throw ArgumentError("map names use letters, digits, '_' and '-' only");
    if (!engine_.config.data_dir) throw IoError("server has no data directory");
    const auto dir = fs::path(*engine_.config.data_dir) / "maps";
    std::error_code ec;
    fs::create_directories(dir, ec);
    save_map_file(world_, (dir / (name + ".map")).string());
    ack(sink, m, Json{{"name", name}});
  }

  void set_block(const Message& m, const EventSink& sink) {
    const auto& p = m.payload;
    const int x = p.at("x").get<int>(), z = p.at("z").get<int>(), y = p.at("y").get<int>();
    world_.set_block(x, z, y, BlockType{p.at("block").get<std::string>()});
    ++terrain_edits_;
    const bool stale = run_snapshot_ && run_snapshot_->world_version() != world_.version();
    ack(sink, m);
    emit(sink, "terrain_changed", m.seq,
         Json{{"x", x}, {"z", z}, {"height", world_.surface_height(x, z)},
              {"block", world_.surface_block(x, z).id}, {"world_version", world_.version()},
              {"stale", stale}});
  }

  void select_endpoint(const Message& m, const EventSink& sink) {
    const auto which = m.payload.at("which").get<std::string>();
    const auto c = protocol::cell_from(m.payload.at("cell"));
    if (which != "start" && which != "goal") throw ArgumentError("endpoint must be 'start' or 'goal'");
    if (!world_.extent().contains(c.x, c.z)) throw BoundsError("endpoint outside the world");
    (which == "start" ? start_ : goal_) = c;
    ack(sink, m, Json{{"which", which}, {"cell", protocol::cell_json(c)},
                      {"height", world_.surface_height(c.x, c.z)}});
  }

  // -- runs and playback -------------------------------------------------

  void check_speed(double s) const {
    if (!(s > 0) || s > engine_.config.max_speed) {
      throw ArgumentError("speed must be in (0, " + text::format_double(engine_.config.max_speed) + "]");
    }
  }

  DebugSession& need_debugger() {
    if (!debugger_) throw StateError("no active run");
    return *debugger_;
  }

  void run(const Message& m, const EventSink& sink) {
    const auto& p = m.payload;
    if (!start_ || !goal_) throw StateError("select a start and a goal first");
    std::vector<AlgorithmSpec> specs;
    for (const auto& a : p.at("algorithms")) specs.push_back(spec_from(a));
    const auto mode = p.value("mode", std::string("play"));
    if (mode != "play" && mode != "instant" && mode != "paused") {
      throw ArgumentError("run mode must be play, instant or paused");
    }
    const double speed = p.contains("speed") ? p.at("speed").get<double>() : speed_;
    check_speed(speed);

    auto snap = world_.scan_surface();
    auto result = run_parallel(specs, snap, table_, node_at(snap, start_->x, start_->z),
                               node_at(snap, goal_->x, goal_->z));
    reset_run();
    speed_ = speed;
    traces_ = std::move(result.traces);
    report_ = std::move(result.report);
    run_snapshot_ = std::move(snap);
    debugger_.emplace(traces_, speed_, engine_.config.max_speed);
    play_seq_ = m.seq;
    play_sink_ = sink;

    Json labels = Json::array(), steps = Json::array();
    for (const auto& t : traces_) {
      labels.push_back(t.spec.label);
      steps.push_back(t.events.size());
    }
    ack(sink, m, Json{{"labels", labels}});
    const auto& r = traces_.front().region;
    emit(sink, "run_started", m.seq,
         Json{{"labels", labels}, {"start", protocol::node_json(traces_.front().start)},
              {"goal", protocol::node_json(traces_.front().goal)},
              {"region", Json{{"center", Json::array({r.center_x, r.center_z})}, {"radius", r.radius}}},
              {"steps", steps}, {"mode", mode}, {"speed", speed_}, {"world_version", world_.version()}});

    if (mode == "instant") {
      while (!debugger_->at_end()) {
        debugger_->step_forward();
        buffer_tick();
        if (pending_.size() >= engine_.config.batch_size) flush(sink, m.seq);
      }
      flush(sink, m.seq);
      report_finish(sink, m.seq);
    } else if (mode == "play") {
      debugger_->set_mode(PlaybackMode::Playing);
      last_flush_ = std::chrono::steady_clock::now();
      set_playing(true);
    }
  }

  void buffer_tick() {
    Json events = Json::array();
    for (const auto& e : debugger_->events_at_tick()) events.push_back(protocol::to_json(e));
    pending_.push_back(Json{{"tick", debugger_->tick()}, {"events", std::move(events)}});
  }

  void flush(const EventSink& sink, std::optional<std::int64_t> seq) {
    last_flush_ = std::chrono::steady_clock::now();
    if (pending_.empty()) return;
    Json steps = Json::array();
    for (auto& s : pending_) steps.push_back(std::move(s));
    pending_.clear();
    emit(sink, "trace_steps", seq, Json{{"steps", std::move(steps)}});
  }

  void report_finish(const EventSink& sink, std::optional<std::int64_t> seq) {
    if (finish_reported_ || !debugger_ || !debugger_->at_end()) return;
    finish_reported_ = true;
    const bool wall = engine_.config.report_wall_time;
    Json results = Json::array();
    for (const auto& t : traces_) {
      Json path = Json::array();
      for (const auto& n : t.path) path.push_back(protocol::node_json(n));
      results.push_back(Json{{"label", t.spec.label}, {"found", t.found()}, {"path", std::move(path)},
                             {"metrics", protocol::to_json(t.metrics, wall)}});
    }
    emit(sink, "run_finished", seq, Json{{"tick", debugger_->tick()}, {"results", std::move(results)}});
    emit(sink, "metrics_report", seq, protocol::to_json(report_, wall));
  }

  void on_tick(std::uint64_t generation) {
    if (generation != generation_ || !playing_ || !debugger_) return;
    const auto r = debugger_->advance_playback();
    if (r.moved) buffer_tick();
    const auto now = std::chrono::steady_clock::now();
    const bool done = debugger_->mode() == PlaybackMode::Paused;
    if (done || pending_.size() >= engine_.config.batch_size ||
        now - last_flush_ >= engine_.config.batch_interval) {
      flush(play_sink_, play_seq_);
    }
    if (done) {
      set_playing(false);
      emit(play_sink_, "visual_state", play_seq_, visual_json());
      report_finish(play_sink_, play_seq_);
    }
  }

  // Pauses playback; queued ticks from before this point become no-ops.
  void stop_playback(const EventSink* sink) {
    ++generation_;
    set_playing(false);
    if (debugger_) debugger_->set_mode(PlaybackMode::Paused);
    if (sink) flush(play_sink_, play_seq_);
    else pending_.clear();
  }

  void resume(const Message& m, const EventSink& sink) {
    auto& dbg = need_debugger();
    const auto mode = dbg.set_mode(PlaybackMode::Playing);
    play_seq_ = m.seq;
    play_sink_ = sink;
    ack(sink, m, Json{{"mode", std::string(to_string(mode))}, {"tick", dbg.tick()}});
    if (mode == PlaybackMode::Playing) {
      ++generation_;
      last_flush_ = std::chrono::steady_clock::now();
      set_playing(true);
    }
  }

  void step(const Message& m, const EventSink& sink, bool forward) {
    auto& dbg = need_debugger();
    const auto r = forward ? dbg.step_forward() : dbg.step_back();
    ack(sink, m, Json{{"moved", r.moved}, {"tick", dbg.tick()}});
    emit(sink, "visual_state", m.seq, visual_json(&r.state));
    if (forward) report_finish(sink, m.seq);
  }

  Json visual_json(const VisualState* state = nullptr) {
    Json j;
    j["tick"] = debugger_->tick();
    j["last_tick"] = debugger_->last_tick();
    j["mode"] = std::string(to_string(debugger_->mode()));
    j["speed"] = debugger_->speed();
    j["traces"] = protocol::to_json(state ? *state : debugger_->materialize());
    return j;
  }

  // -- challenges, puzzles, books -----------------------------------------

  const Challenge& need_challenge() {
    if (!challenge_) throw StateError("no active challenge");
    return engine_.challenges.get(*challenge_);
  }

  void start_challenge(const Message& m, const EventSink& sink) {
    const auto& ch = engine_.challenges.get(m.payload.at("id").get<std::string>());
    std::optional<WorldModel> map;
    if (!ch.map_ref.empty()) {
      const auto path = engine_.map_path(ch.map_ref);
      if (!path) throw NotFoundError("no map '" + ch.map_ref + "'");
      map = load_map_file(*path);
    }
    challenge_ = ch.id;
    predicted_.reset();
    picked_.reset();
    if (map) replace_world(std::move(*map));
    if (ch.start) {
      start_ = ch.start;
      goal_ = ch.goal;
    }
    if (ch.puzzle) set_puzzle(*ch.puzzle);
    const bool gate = !ch.gate || engine_.gates.passed(student_, *ch.gate);
    ack(sink, m,
        Json{{"id", ch.id}, {"kind", std::string(to_string(ch.kind))}, {"title", ch.title},
             {"prompt", ch.prompt}, {"algorithm", ch.algorithm.label},
             {"gate", ch.gate ? Json(*ch.gate) : Json(nullptr)}, {"gate_passed", gate},
             {"points", ch.points},
             {"start", ch.start ? protocol::cell_json(*ch.start) : Json(nullptr)},
             {"goal", ch.goal ? protocol::cell_json(*ch.goal) : Json(nullptr)},
             {"failed_attempts", telemetry_->failed_attempts(ch.id)}});
    if (map) emit(sink, "terrain", m.seq, terrain_json());
    if (ch.puzzle) emit(sink, "puzzle", m.seq, puzzle_json());
  }

  void evaluate_challenge(const Message& m, const EventSink& sink) {
    const auto& ch = need_challenge();
    EvaluationContext ctx;
    ctx.world = &world_;
    ctx.table = &table_;
    if (run_snapshot_) {
      ctx.run_snapshot = &*run_snapshot_;
      ctx.traces = &traces_;
    }
    ctx.gate_passed = !ch.gate || engine_.gates.passed(student_, *ch.gate);
    ctx.predicted = predicted_;
    ctx.endpoints = picked_;
    ctx.graph = graph_ ? &*graph_ : nullptr;
    ctx.edits = ch.kind == ChallengeKind::SkyPuzzle ? edits_ : terrain_edits_;
    const auto v = evaluate(ch, ctx);

    Json out{{"challenge", ch.id}, {"pass", v.pass}, {"reason", v.reason}, {"points", v.points}};
    try {
      telemetry_->record(ch.id, v, ctx.edits);
    } catch (const IoError& e) {
      out["telemetry_error"] = e.what();
    }
    out["failed_attempts"] = telemetry_->failed_attempts(ch.id);
    out["solved"] = telemetry_->solved(ch.id);
    ack(sink, m);
    emit(sink, "verdict", m.seq, std::move(out));
  }

  void set_puzzle(const Puzzle& p) {
    puzzle_ = p;
    graph_ = p.initial;
    edits_ = 0;
  }

  Json puzzle_json() {
    auto j = protocol::to_json(*puzzle_);
    j["graph"] = protocol::to_json(*graph_);
    j["edits"] = edits_;
    return j;
  }

  void load_puzzle_cmd(const Message& m, const EventSink& sink) {
    const auto& p = m.payload;
    if (p.contains("document") == p.contains("generate")) {
      throw ProtocolError("load_puzzle takes exactly one of 'document' or 'generate'");
    }
    if (p.contains("document")) {
      set_puzzle(load_puzzle(p.at("document").get<std::string>()));
    } else {
      const auto& g = p.at("generate");
      set_puzzle(generate_puzzle(parse_puzzle_kind(g.at("kind").get<std::string>()),
                                 g.at("size").get<int>(), g.at("seed").get<std::uint64_t>()));
    }
    ack(sink, m);
    emit(sink, "puzzle", m.seq, puzzle_json());
  }

  void edit_graph(const Message& m, const EventSink& sink) {
    if (!puzzle_) throw StateError("no puzzle loaded");
    const auto& p = m.payload;
    EditAction a;
    a.kind = parse_edit_kind(p.at("action").get<std::string>());
    a.a = p.at("a").get<std::string>();
    a.b = p.value("b", std::string());
    if (p.contains("position")) {
      const auto& v = p.at("position");
      a.position = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
    }
    graph_ = edit(*graph_, a);
    ++edits_;
    ack(sink, m, Json{{"edits", edits_}});
    emit(sink, "graph", m.seq, Json{{"graph", protocol::to_json(*graph_)}, {"edits", edits_}});
  }

  void submit_answers(const Message& m, const EventSink& sink) {
    const auto& book = engine_.books.get(m.payload.at("book").get<std::string>());
    std::vector<std::size_t> answers;
    for (const auto& a : m.payload.at("answers")) {
      if (!a.is_number_unsigned()) throw ProtocolError("answers are option indices");
      answers.push_back(a.get<std::size_t>());
    }
    const auto r = grade_quiz(book, answers);
    engine_.gates.record(student_, book.id, r);
    Verdict v{r.gate_passed,
              r.gate_passed ? std::string()
                            : "score " + text::format_double(r.score) + " is below " +
                                  text::format_double(book.pass_threshold()),
              0, std::nullopt};
    Json out{{"book", book.id}, {"score", r.score}, {"correct", r.correct},
             {"gate_passed", r.gate_passed}, {"threshold", book.pass_threshold()}};
    Json explanations = Json::array();
    for (const auto& q : book.quiz) explanations.push_back(q.explanation);
    out["explanations"] = std::move(explanations);
    try {
      telemetry_->record("quiz:" + book.id, v, 0);
    } catch (const IoError& e) {
      out["telemetry_error"] = e.what();
    }
    ack(sink, m);
    emit(sink, "quiz_result", m.seq, std::move(out));
  }

  Json state_json() {
    Json j;
    j["session"] = id_;
    j["student"] = student_;
    j["terrain"] = terrain_json();
    j["weights"] = save_weights(table_);
    j["start"] = start_ ? protocol::cell_json(*start_) : Json(nullptr);
    j["goal"] = goal_ ? protocol::cell_json(*goal_) : Json(nullptr);
    if (debugger_) {
      auto v = visual_json();
      Json labels = Json::array();
      for (const auto& t : traces_) labels.push_back(t.spec.label);
      v["labels"] = std::move(labels);
      v["stale"] = run_snapshot_->world_version() != world_.version();
      j["run"] = std::move(v);
    } else {
      j["run"] = nullptr;
    }
    j["challenge"] = challenge_ ? Json(*challenge_) : Json(nullptr);
    j["puzzle"] = puzzle_ ? puzzle_json() : Json(nullptr);
    j["gates"] = engine_.gates.passed_books(student_);
    return j;
  }

  Engine::Impl& engine_;
  const std::string id_;
  const std::string student_;

  WorldModel world_;
  WeightTable table_;
  std::optional<Cell> start_, goal_;
  std::size_t terrain_edits_ = 0;

  std::optional<TerrainSnapshot> run_snapshot_;
  std::vector<ExecutionTrace> traces_;
  ComparisonReport report_;
  std::optional<DebugSession> debugger_;
  bool finish_reported_ = false;
  double speed_;

  std::optional<std::string> challenge_;
  std::optional<Cell> predicted_;
  std::optional<std::pair<Cell, Cell>> picked_;
  std::optional<Puzzle> puzzle_;
  std::optional<SkyGraph> graph_;
  std::size_t edits_ = 0;
  std::shared_ptr<TelemetryStore> telemetry_;

  // playback state, touched only on the worker except for the atomics
  std::vector<Json> pending_;
  std::chrono::steady_clock::time_point last_flush_;
  std::optional<std::int64_t> play_seq_;
  EventSink play_sink_;
  std::atomic<bool> playing_{false};
  std::atomic<bool> tick_pending_{false};
  std::atomic<std::uint64_t> generation_{0};
  std::atomic<long long> interval_ns_{100'000'000};

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<Message, EventSink>> queue_;
  std::deque<std::promise<void>> barriers_;
  bool stopping_ = false;
  std::thread worker_;

  std::mutex tick_mu_;
  std::condition_variable_any tick_cv_;
  std::jthread ticker_;
};

Engine::Impl::Impl(ServerConfig c)
    : config(std::move(c)),
      gates(config.data_dir ? std::optional((fs::path(*config.data_dir) / "gates").string())
                            : std::nullopt) {
  std::error_code ec;
  const auto root = fs::path(config.content_dir);
  if (fs::is_directory(root / "books", ec)) books = BookLibrary::load_dir((root / "books").string());
  if (fs::is_directory(root / "challenges", ec)) {
    challenges = ChallengeCatalog::load_dir((root / "challenges").string());
  }
  const auto weights = root / "weights" / "default.txt";
  if (fs::is_regular_file(weights, ec)) default_weights = load_weights_file(weights.string());
  challenges.check_references([this](const std::string& id) { return map_path(id).has_value(); },
                              [this](const std::string& id) { return books.contains(id); });
}

Engine::Engine(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Engine::~Engine() { shutdown(); }

const ServerConfig& Engine::config() const { return impl_->config; }

std::size_t Engine::session_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->sessions.size();
}

void Engine::handle_line(std::string_view line, const EventSink& sink) {
  auto reply_error = [&](std::optional<std::int64_t> seq, const Error& e) {
    sink(protocol::serialize(
        Message{"error", seq, std::nullopt, Json{{"code", e.code()}, {"message", e.what()}}}));
  };
  Message m;
  try {
    m = protocol::parse_message(line);
    protocol::validate_command(m);
  } catch (const ProtocolError& e) {
    return reply_error(m.seq, e);
  }

  try {
    auto& im = *impl_;
    if (m.type == "list_content") {
      Json payload{{"command", m.type}, {"maps", im.map_ids()}, {"books", im.books.ids()},
                   {"challenges", im.challenges.ids()}};
      sink(protocol::serialize(Message{"ack", m.seq, m.session, std::move(payload)}));
      return;
    }
    std::shared_ptr<Session> s;
    if (m.type == "create_session") {
      const auto student = m.payload.value("student", std::string("guest"));
      validate_student_id(student);
      std::string id;
      {
        std::lock_guard lock(im.mu);
        id = "s" + std::to_string(im.next_id++);
      }
      s = std::make_shared<Session>(im, id, student);
      std::lock_guard lock(im.mu);
      im.sessions[id] = s;
    } else {
      std::lock_guard lock(im.mu);
      auto it = im.sessions.find(*m.session);
      if (it == im.sessions.end()) throw SessionError("unknown session '" + *m.session + "'");
      s = it->second;
      if (m.type == "close_session") {
        im.retired.push_back(s);
        im.sessions.erase(it);
      }
    }
    s->post(std::move(m), sink);
  } catch (const Error& e) {
    reply_error(m.seq, e);
  }
}

void Engine::drain(const std::string& session_id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(impl_->mu);
    auto it = impl_->sessions.find(session_id);
    if (it == impl_->sessions.end()) return;
    s = it->second;
  }
  s->drain();
}

void Engine::shutdown() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(impl_->mu);
    for (auto& [id, s] : impl_->sessions) all.push_back(s);
    for (auto& s : impl_->retired) all.push_back(s);
    impl_->sessions.clear();
    impl_->retired.clear();
  }
  for (auto& s : all) s->stop();
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw ArgumentError("listen address must be host:port");
  std::string host(text.substr(0, colon));
  if (host.empty()) host = "127.0.0.1";
  int port = 0;
  try {
    port = static_cast<int>(text::parse_int(text.substr(colon + 1), 0));
  } catch (const ParseError&) {
    throw ArgumentError("listen port must be a number");
  }
  if (port < 0 || port > 65535) throw ArgumentError("listen port out of range");
  return {host, port};
}

}  // namespace blockpath
