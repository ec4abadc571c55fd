#include <cmath>
#include <limits>

#include "blockpath/algorithms.hpp"
#include "blockpath/error.hpp"
#include "blockpath/text.hpp"
#include "json.hpp"

namespace blockpath {
namespace {

using ojson = nlohmann::ordered_json;

ojson cell_json(const GridNode& n) { return ojson::array({n.x, n.z, n.height}); }

GridNode cell_from(const nlohmann::json& j) {
  return GridNode{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

ojson cost_json(double c) {
  if (std::isinf(c)) return nullptr;
  return c;
}

double cost_from(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

std::string export_trace(const ExecutionTrace& trace) {
  std::string out;
  ojson header;
  header["record"] = "header";
  header["label"] = trace.spec.label;
  header["algorithm"] = std::string(to_string(trace.spec.kind));
  header["heuristic"] = std::string(to_string(trace.spec.heuristic));
  header["visited_color"] = trace.spec.color.visited;
  header["current_color"] = trace.spec.color.current;
  header["start"] = cell_json(trace.start);
  header["goal"] = cell_json(trace.goal);
  header["region"] = ojson::array(
      {trace.region.center_x, trace.region.center_z, trace.region.radius});
  out += header.dump() + '\n';

  for (const auto& e : trace.events) {
    ojson rec;
    rec["record"] = "event";
    rec["step"] = e.step;
    rec["kind"] = std::string(to_string(e.kind));
    rec["node"] = cell_json(e.node);
    rec["g"] = cost_json(e.g_cost);
    rec["h"] = e.h_value;
    rec["visited"] = e.visited_count;
    rec["parent"] = e.parent ? cell_json(*e.parent) : ojson(nullptr);
    out += rec.dump() + '\n';
  }

  ojson footer;
  footer["record"] = "metrics";
  footer["visited_nodes"] = trace.metrics.visited_nodes;
  footer["expansions"] = trace.metrics.expansions;
  footer["path_cost"] = cost_json(trace.metrics.path_cost);
  footer["path_steps"] = trace.metrics.path_steps;
  ojson path = ojson::array();
  for (const auto& n : trace.path) path.push_back(cell_json(n));
  footer["path"] = std::move(path);
  out += footer.dump() + '\n';
  return out;
}

ExecutionTrace import_trace(std::string_view document) {
  ExecutionTrace trace;
  bool header = false, footer = false;
  const auto lines = text::split_lines(document);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i + 1);
    if (lines[i].empty()) continue;
    if (footer) throw ParseError(ln, "content after metrics footer");
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      const auto kind = j.at("record").get<std::string>();
      if (!header) {
        if (kind != "header") throw ParseError(ln, "trace export must start with a header");
        trace.spec.label = j.at("label").get<std::string>();
        trace.spec.kind = parse_algorithm(j.at("algorithm").get<std::string>());
        trace.spec.heuristic = parse_heuristic(j.at("heuristic").get<std::string>());
        trace.spec.color = {j.at("visited_color").get<std::string>(),
                            j.at("current_color").get<std::string>()};
        trace.start = cell_from(j.at("start"));
        trace.goal = cell_from(j.at("goal"));
        trace.region.start = trace.start;
        trace.region.goal = trace.goal;
        trace.region.center_x = j.at("region").at(0).get<double>();
        trace.region.center_z = j.at("region").at(1).get<double>();
        trace.region.radius = j.at("region").at(2).get<double>();
        header = true;
      } else if (kind == "event") {
        TraceEvent e;
        e.step = j.at("step").get<std::size_t>();
        if (e.step != trace.events.size()) throw ParseError(ln, "non-contiguous step index");
        e.algo = trace.spec.label;
        e.kind = parse_event_kind(j.at("kind").get<std::string>());
        e.node = cell_from(j.at("node"));
        e.g_cost = cost_from(j.at("g"));
        e.h_value = j.at("h").get<double>();
        e.visited_count = j.at("visited").get<std::size_t>();
        if (!j.at("parent").is_null()) e.parent = cell_from(j.at("parent"));
        trace.events.push_back(std::move(e));
      } else if (kind == "metrics") {
        trace.metrics.visited_nodes = j.at("visited_nodes").get<std::size_t>();
        trace.metrics.expansions = j.at("expansions").get<std::size_t>();
        trace.metrics.path_cost = cost_from(j.at("path_cost"));
        trace.metrics.path_steps = j.at("path_steps").get<std::size_t>();
        for (const auto& n : j.at("path")) trace.path.push_back(cell_from(n));
        footer = true;
      } else {
        throw ParseError(ln, "unknown record '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(ln, e.what());
    } catch (const ArgumentError& e) {
      throw ParseError(ln, e.what());
    }
  }
  if (!footer) throw ParseError(static_cast<int>(lines.size()), "missing metrics footer");
  return trace;
}

}  // namespace blockpath
