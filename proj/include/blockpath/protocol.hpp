#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockpath/algorithms.hpp"
#include "blockpath/challenges.hpp"
#include "blockpath/content.hpp"
#include "blockpath/debugger.hpp"
#include "blockpath/skygraph.hpp"
#include "json.hpp"

namespace blockpath::protocol {

using Json = nlohmann::ordered_json;

// One line on the wire, in either direction.
struct Message {
  std::string type;
  std::optional<std::int64_t> seq;
  std::optional<std::string> session;
  Json payload = Json::object();

  bool operator==(const Message&) const = default;
};

// ProtocolError on malformed JSON or a malformed envelope.
Message parse_message(std::string_view line);
std::string serialize(const Message& m);

enum class FieldType { String, Integer, Number, Boolean, Array, Object, Cell };

struct FieldSpec {
  std::string name;
  FieldType type;
  bool required;
};

struct CommandSpec {
  std::string type;
  bool needs_session;
  std::vector<FieldSpec> fields;
};

const std::vector<CommandSpec>& command_catalogue();
const std::vector<std::string>& event_types();
std::string_view to_string(FieldType t);

// ProtocolError unless the type is known, seq is present, the session is
// present when required, and the payload matches the field list exactly.
void validate_command(const Message& m);

// Encoders used by the event stream.
Json cell_json(Cell c);
Json node_json(const GridNode& n);
Cell cell_from(const Json& j);
Json cost_json(double c);  // null for +inf

Json to_json(const TraceEvent& e);
Json to_json(const RunMetrics& m, bool wall_time);
Json to_json(const TraceVisual& v);
Json to_json(const VisualState& s);
Json to_json(const ComparisonReport& r, bool wall_time);
Json to_json(const TerrainSnapshot& s);
Json to_json(const SkyGraph& g);
SkyGraph graph_from_json(const Json& j);
Json to_json(const Puzzle& p);  // the witness is never included
Json book_json(const Book& b);  // without the correct answers

// Chat-style lines for the comparison table.
std::vector<std::string> metrics_lines(const ComparisonReport& r);

}  // namespace blockpath::protocol
