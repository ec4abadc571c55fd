#include <cmath>
#include <map>
#include <set>

#include "blockpath/error.hpp"
#include "blockpath/protocol.hpp"
#include "blockpath/text.hpp"

namespace blockpath::protocol {

Message parse_message(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  Message m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    if (k == "type") {
      if (!v.is_string()) throw ProtocolError("'type' must be a string");
      m.type = v.get<std::string>();
    } else if (k == "seq") {
      if (v.is_null()) continue;
      if (!v.is_number_integer()) throw ProtocolError("'seq' must be an integer");
      m.seq = v.get<std::int64_t>();
    } else if (k == "session") {
      if (v.is_null()) continue;
      if (!v.is_string()) throw ProtocolError("'session' must be a string");
      m.session = v.get<std::string>();
    } else if (k == "payload") {
      if (!v.is_object()) throw ProtocolError("'payload' must be an object");
      m.payload = v;
    } else {
      throw ProtocolError("unknown envelope field '" + k + "'");
    }
  }
  if (m.type.empty()) throw ProtocolError("message has no type");
  return m;
}

std::string serialize(const Message& m) {
  Json j;
  j["type"] = m.type;
  j["seq"] = m.seq ? Json(*m.seq) : Json(nullptr);
  if (m.session) j["session"] = *m.session;
  j["payload"] = m.payload;
  return j.dump();
}

const std::vector<CommandSpec>& command_catalogue() {
  using F = FieldType;
  static const std::vector<CommandSpec> specs = {
      {"create_session", false, {{"student", F::String, false}}},
      {"list_content", false, {}},
      {"close_session", true, {}},
      {"get_state", true, {}},
      {"load_map", true, {{"map", F::String, false}, {"document", F::String, false}}},
      {"save_map", true, {{"name", F::String, true}}},
      {"set_block", true,
       {{"x", F::Integer, true}, {"z", F::Integer, true}, {"y", F::Integer, true},
        {"block", F::String, true}}},
      {"set_weights", true, {{"document", F::String, true}}},
      {"select_endpoint", true, {{"which", F::String, true}, {"cell", F::Cell, true}}},
      {"run", true,
       {{"algorithms", F::Array, true}, {"mode", F::String, false}, {"speed", F::Number, false}}},
      {"break", true, {}},
      {"continue", true, {}},
      {"step_fwd", true, {}},
      {"step_back", true, {}},
      {"set_speed", true, {{"speed", F::Number, true}}},
      {"inspect", true, {{"label", F::String, true}}},
      {"start_challenge", true, {{"id", F::String, true}}},
      {"submit_prediction", true, {{"cell", F::Cell, true}}},
      {"submit_endpoints", true, {{"start", F::Cell, true}, {"goal", F::Cell, true}}},
      {"evaluate", true, {}},
      {"load_puzzle", true, {{"document", F::String, false}, {"generate", F::Object, false}}},
      {"edit", true,
       {{"action", F::String, true}, {"a", F::String, true}, {"b", F::String, false},
        {"position", F::Array, false}}},
      {"check", true, {}},
      {"open_book", true, {{"id", F::String, true}}},
      {"submit_answers", true, {{"book", F::String, true}, {"answers", F::Array, true}}},
  };
  return specs;
}

const std::vector<std::string>& event_types() {
  static const std::vector<std::string> types = {
      "ack",          "error",       "terrain",       "terrain_changed", "run_started",
      "trace_steps",  "run_finished", "metrics_report", "visual_state",   "verdict",
      "puzzle",       "graph",       "puzzle_verdict", "book",           "quiz_result",
      "state",
  };
  return types;
}

std::string_view to_string(FieldType t) {
  switch (t) {
    case FieldType::String: return "string";
    case FieldType::Integer: return "integer";
    case FieldType::Number: return "number";
    case FieldType::Boolean: return "boolean";
    case FieldType::Array: return "array";
    case FieldType::Object: return "object";
    case FieldType::Cell: return "cell [x, z]";
  }
  return "any";
}

namespace {

bool matches(const Json& v, FieldType t) {
  switch (t) {
    case FieldType::String: return v.is_string();
    case FieldType::Integer: return v.is_number_integer();
    case FieldType::Number: return v.is_number();
    case FieldType::Boolean: return v.is_boolean();
    case FieldType::Array: return v.is_array();
    case FieldType::Object: return v.is_object();
    case FieldType::Cell:
      return v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer();
  }
  return false;
}

}  // namespace

void validate_command(const Message& m) {
  static const auto index = [] {
    std::map<std::string, const CommandSpec*> out;
    for (const auto& s : command_catalogue()) out[s.type] = &s;
    return out;
  }();
  auto it = index.find(m.type);
  if (it == index.end()) throw ProtocolError("unknown command '" + m.type + "'");
  const auto& spec = *it->second;
  if (!m.seq) throw ProtocolError("command '" + m.type + "' has no seq");
  if (spec.needs_session && !m.session) throw ProtocolError("command '" + m.type + "' needs a session");
  std::set<std::string> known;
  for (const auto& f : spec.fields) {
    known.insert(f.name);
    if (!m.payload.contains(f.name)) {
      if (f.required) throw ProtocolError("'" + m.type + "' requires field '" + f.name + "'");
      continue;
    }
    if (!matches(m.payload.at(f.name), f.type)) {
      throw ProtocolError("field '" + f.name + "' of '" + m.type + "' must be " +
                          std::string(to_string(f.type)));
    }
  }
  for (auto f = m.payload.begin(); f != m.payload.end(); ++f) {
    if (!known.count(f.key())) {
      throw ProtocolError("'" + m.type + "' has no field '" + f.key() + "'");
    }
  }
}

Json cell_json(Cell c) { return Json::array({c.x, c.z}); }
Json node_json(const GridNode& n) { return Json::array({n.x, n.z, n.height}); }

Cell cell_from(const Json& j) {
  if (!matches(j, FieldType::Cell)) throw ProtocolError("cells are [x, z] integer pairs");
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

Json cost_json(double c) {
  if (std::isinf(c)) return nullptr;
  return c;
}

Json to_json(const TraceEvent& e) {
  Json j;
  j["algo"] = e.algo;
  j["step"] = e.step;
  j["kind"] = std::string(to_string(e.kind));
  j["node"] = node_json(e.node);
  j["g"] = cost_json(e.g_cost);
  j["h"] = e.h_value;
  j["visited"] = e.visited_count;
  j["parent"] = e.parent ? node_json(*e.parent) : Json(nullptr);
  return j;
}

Json to_json(const RunMetrics& m, bool wall_time) {
  Json j;
  j["visited_nodes"] = m.visited_nodes;
  j["expansions"] = m.expansions;
  j["path_cost"] = cost_json(m.path_cost);
  j["path_steps"] = m.path_steps;
  j["wall_time_ms"] =
      wall_time ? std::chrono::duration<double, std::milli>(m.wall_time).count() : 0.0;
  return j;
}

Json to_json(const TraceVisual& v) {
  auto cells = [](const std::vector<Cell>& cs) {
    Json a = Json::array();
    for (const auto& c : cs) a.push_back(cell_json(c));
    return a;
  };
  Json j;
  j["label"] = v.label;
  j["visited_color"] = v.color.visited;
  j["current_color"] = v.color.current;
  j["cursor"] = v.cursor;
  j["visited"] = cells(v.visited);
  j["frontier"] = cells(v.frontier);
  j["current"] = v.current ? cell_json(*v.current) : Json(nullptr);
  j["path"] = cells(v.path);
  if (v.overlay) j["overlay"] = Json{{"anchor", cell_json(v.overlay->anchor)}, {"text", v.overlay->text}};
  else j["overlay"] = nullptr;
  j["finished"] = v.finished;
  return j;
}

Json to_json(const VisualState& s) {
  Json a = Json::array();
  for (const auto& t : s.traces) a.push_back(to_json(t));
  return a;
}

Json to_json(const ComparisonReport& r, bool wall_time) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    auto m = to_json(row.metrics, wall_time);
    Json j;
    j["label"] = row.label;
    for (auto it = m.begin(); it != m.end(); ++it) j[it.key()] = it.value();
    rows.push_back(std::move(j));
  }
  Json ratios = Json::array();
  for (const auto& q : r.ratios) {
    ratios.push_back(Json{{"numerator", q.numerator}, {"denominator", q.denominator}, {"ratio", q.ratio}});
  }
  Json j;
  j["rows"] = std::move(rows);
  j["ratios"] = std::move(ratios);
  j["lines"] = metrics_lines(r);
  return j;
}

std::vector<std::string> metrics_lines(const ComparisonReport& r) {
  std::vector<std::string> out;
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    out.push_back(row.label + ": visited " + std::to_string(m.visited_nodes) + ", expansions " +
                  std::to_string(m.expansions) + ", cost " +
                  (std::isinf(m.path_cost) ? std::string("unreachable")
                                           : text::format_double(m.path_cost)) +
                  ", steps " + std::to_string(m.path_steps));
  }
  for (const auto& q : r.ratios) {
    out.push_back(q.numerator + "/" + q.denominator + " visited ratio " +
                  text::format_double(std::round(q.ratio * 1000) / 1000));
  }
  return out;
}

Json to_json(const TerrainSnapshot& s) {
  const auto& b = s.bounds();
  std::map<std::string, int> palette;
  for (int z = b.z; z < b.z + b.depth; ++z) {
    for (int x = b.x; x < b.x + b.width; ++x) palette.emplace(s.block(x, z).id, 0);
  }
  Json names = Json::array();
  int next = 0;
  for (auto& [id, idx] : palette) {
    idx = next++;
    names.push_back(id);
  }
  Json heights = Json::array(), cells = Json::array();
  for (int z = b.z; z < b.z + b.depth; ++z) {
    for (int x = b.x; x < b.x + b.width; ++x) {
      heights.push_back(s.height(x, z));
      cells.push_back(palette.at(s.block(x, z).id));
    }
  }
  Json j;
  j["x"] = b.x;
  j["z"] = b.z;
  j["width"] = b.width;
  j["depth"] = b.depth;
  j["palette"] = std::move(names);
  j["blocks"] = std::move(cells);
  j["heights"] = std::move(heights);
  j["world_version"] = s.world_version();
  return j;
}

Json to_json(const SkyGraph& g) {
  Json nodes = Json::array(), edges = Json::array();
  for (const auto& [id, p] : g.nodes()) {
    nodes.push_back(Json{{"id", id}, {"x", p.x}, {"y", p.y}, {"z", p.z}});
  }
  for (const auto& e : g.edges()) edges.push_back(Json::array({e.from, e.to}));
  Json j;
  j["directed"] = g.directed();
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

SkyGraph graph_from_json(const Json& j) {
  try {
    SkyGraph g(j.at("directed").get<bool>());
    for (const auto& n : j.at("nodes")) {
      g.add_node(n.at("id").get<std::string>(),
                 {n.at("x").get<double>(), n.at("y").get<double>(), n.at("z").get<double>()});
    }
    for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    return g;
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("graph: ") + e.what());
  }
}

Json to_json(const Puzzle& p) {
  Json goal = Json::array();
  for (const auto& c : p.goal) goal.push_back(c.to_text());
  Json j;
  j["kind"] = std::string(to_string(p.kind));
  j["budget"] = p.budget ? Json(*p.budget) : Json(nullptr);
  j["goal"] = std::move(goal);
  j["graph"] = to_json(p.initial);
  return j;
}

Json book_json(const Book& b) {
  Json quiz = Json::array();
  for (const auto& q : b.quiz) quiz.push_back(Json{{"question", q.question}, {"options", q.options}});
  Json j;
  j["id"] = b.id;
  j["title"] = b.title;
  j["threshold"] = b.pass_threshold();
  j["pages"] = b.pages;
  j["quiz"] = std::move(quiz);
  return j;
}

}  // namespace blockpath::protocol
