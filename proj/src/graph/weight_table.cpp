#include <algorithm>
#include <cmath>
#include <sstream>

#include "blockpath/error.hpp"
#include "blockpath/graph.hpp"
#include "blockpath/text.hpp"

namespace blockpath {

WeightTable WeightTable::defaults() {
  WeightTable t;
  const auto ids = BlockRegistry::defaults().ids();
  for (const auto& from : ids) {
    if (from == kAir.id) continue;
    for (const auto& to : ids) {
      if (to == kAir.id) continue;
      auto involves = [&](std::string_view b) { return from == b || to == b; };
      if (involves("water")) {
        t.set_cost(from, to, 4.0);
      } else if (involves("soul_sand")) {
        t.set_cost(from, to, 4.0);
      } else if (involves("ice")) {
        t.set_cost(from, to, 1.5);
      }
    }
  }
  t.set_cost("dirt", "dirt", 1.0);
  return t;
}

void WeightTable::set_cost(std::string_view from, std::string_view to, double cost) {
  if (!(cost >= 0) || !std::isfinite(cost)) {
    throw ConfigError("pair cost must be finite and non-negative");
  }
  pairs_[{std::string(from), std::string(to)}] = cost;
}

void WeightTable::set_impassable(std::string_view from, std::string_view to) {
  pairs_[{std::string(from), std::string(to)}] = std::nullopt;
}

WeightTable::PairCost WeightTable::lookup(const BlockType& from,
                                          const BlockType& to) const {
  auto it = pairs_.find({from.id, to.id});
  if (it == pairs_.end()) return default_cost;
  return it->second;
}

double WeightTable::min_finite_cost() const {
  double best = default_cost;
  for (const auto& [key, cost] : pairs_) {
    if (cost) best = std::min(best, *cost);
  }
  return best;
}

void WeightTable::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
  if (!finite_nonneg(default_cost)) throw ConfigError("default_cost must be >= 0");
  if (!finite_nonneg(step_up_penalty)) throw ConfigError("step_up_penalty must be >= 0");
  if (!finite_nonneg(step_down_penalty)) {
    throw ConfigError("step_down_penalty must be >= 0");
  }
  if (!(std::isfinite(diagonal_multiplier) && diagonal_multiplier > 0)) {
    throw ConfigError("diagonal_multiplier must be > 0");
  }
  if (max_step_height < 0) throw ConfigError("max_step_height must be >= 0");
  for (const auto& [key, cost] : pairs_) {
    if (cost && !finite_nonneg(*cost)) {
      throw ConfigError("cost for " + key.first + "->" + key.second + " must be >= 0");
    }
  }
}

WeightTable load_weights(std::string_view document, const BlockRegistry& registry) {
  WeightTable table;
  bool saw[5] = {};
  const auto lines = text::split_lines(document);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i + 1);
    const auto tok = text::tokenize(lines[i]);
    if (tok.empty()) continue;
    const auto& key = tok[0];

    if (key == "pair") {
      if (tok.size() != 4) throw ParseError(ln, "expected 'pair <from> <to> <cost|impassable>'");
      for (int k = 1; k <= 2; ++k) {
        if (tok[k] == kAir.id) throw ParseError(ln, "air cannot appear in a pair");
        registry.require(tok[k]);
      }
      if (table.pairs().count({tok[1], tok[2]})) {
        throw ParseError(ln, "duplicate pair " + tok[1] + " " + tok[2]);
      }
      if (tok[3] == "impassable") {
        table.set_impassable(tok[1], tok[2]);
      } else {
        const double cost = text::parse_double(tok[3], ln);
        if (!(cost >= 0) || !std::isfinite(cost)) {
          throw ParseError(ln, "pair cost must be finite and non-negative");
        }
        table.set_cost(tok[1], tok[2], cost);
      }
      continue;
    }

    if (tok.size() != 2) throw ParseError(ln, "expected '<key> <value>'");
    int slot = -1;
    if (key == "default_cost") {
      slot = 0;
      table.default_cost = text::parse_double(tok[1], ln);
    } else if (key == "step_up_penalty") {
      slot = 1;
      table.step_up_penalty = text::parse_double(tok[1], ln);
    } else if (key == "step_down_penalty") {
      slot = 2;
      table.step_down_penalty = text::parse_double(tok[1], ln);
    } else if (key == "diagonal_multiplier") {
      slot = 3;
      table.diagonal_multiplier = text::parse_double(tok[1], ln);
    } else if (key == "max_step_height") {
      slot = 4;
      table.max_step_height = static_cast<int>(text::parse_int(tok[1], ln));
    } else {
      throw ParseError(ln, "unknown key '" + key + "'");
    }
    if (saw[slot]) throw ParseError(ln, "duplicate key '" + key + "'");
    saw[slot] = true;
  }
  table.validate();
  return table;
}

std::string save_weights(const WeightTable& table) {
  std::ostringstream out;
  out << "default_cost " << text::format_double(table.default_cost) << '\n';
  out << "step_up_penalty " << text::format_double(table.step_up_penalty) << '\n';
  out << "step_down_penalty " << text::format_double(table.step_down_penalty) << '\n';
  out << "diagonal_multiplier " << text::format_double(table.diagonal_multiplier) << '\n';
  out << "max_step_height " << table.max_step_height << '\n';
  for (const auto& [key, cost] : table.pairs()) {
    out << "pair " << key.first << ' ' << key.second << ' '
        << (cost ? text::format_double(*cost) : std::string("impassable")) << '\n';
  }
  return out.str();
}

WeightTable load_weights_file(const std::string& path, const BlockRegistry& registry) {
  return load_weights(text::read_file(path), registry);
}

}  // namespace blockpath
