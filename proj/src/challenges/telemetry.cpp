#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "blockpath/challenges.hpp"
#include "blockpath/error.hpp"
#include "blockpath/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace blockpath {

// Field order: challenge, timestamp, outcome, reason, edits, metrics.
std::string to_jsonl(const AttemptRecord& r) {
  nlohmann::ordered_json j;
  j["challenge"] = r.challenge;
  j["timestamp"] = r.timestamp_ms;
  j["outcome"] = r.pass ? "pass" : "fail";
  j["reason"] = r.reason;
  j["edits"] = r.edits;
  if (r.metrics) {
    nlohmann::ordered_json m;
    m["visited_nodes"] = r.metrics->visited_nodes;
    m["expansions"] = r.metrics->expansions;
    m["path_cost"] = std::isinf(r.metrics->path_cost) ? nlohmann::ordered_json(nullptr)
                                                      : nlohmann::ordered_json(r.metrics->path_cost);
    m["path_steps"] = r.metrics->path_steps;
    j["metrics"] = std::move(m);
  } else {
    j["metrics"] = nullptr;
  }
  return j.dump();
}

AttemptRecord attempt_from_jsonl(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    AttemptRecord r;
    r.challenge = j.at("challenge").get<std::string>();
    r.timestamp_ms = j.at("timestamp").get<std::int64_t>();
    const auto outcome = j.at("outcome").get<std::string>();
    if (outcome != "pass" && outcome != "fail") throw ArgumentError("bad outcome '" + outcome + "'");
    r.pass = outcome == "pass";
    r.reason = j.at("reason").get<std::string>();
    r.edits = j.at("edits").get<std::size_t>();
    const auto& m = j.at("metrics");
    if (!m.is_null()) {
      RunMetrics rm;
      rm.visited_nodes = m.at("visited_nodes").get<std::size_t>();
      rm.expansions = m.at("expansions").get<std::size_t>();
      rm.path_cost = m.at("path_cost").is_null() ? INFINITY : m.at("path_cost").get<double>();
      rm.path_steps = m.at("path_steps").get<std::size_t>();
      r.metrics = rm;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("attempt record: ") + e.what());
  }
}

TelemetryStore::TelemetryStore(std::optional<std::string> path, Clock clock)
    : path_(std::move(path)), clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  if (!path_) return;
  std::error_code ec;
  if (!fs::is_regular_file(*path_, ec)) return;
  const auto lines = text::split_lines(text::read_file(*path_));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::tokenize(lines[i]).empty()) continue;
    try {
      records_.push_back(attempt_from_jsonl(lines[i]));
    } catch (const ArgumentError& e) {
      throw ParseError(static_cast<int>(i + 1), *path_ + ": " + e.what());
    }
  }
}

AttemptRecord TelemetryStore::record(const std::string& challenge, const Verdict& verdict,
                                     std::size_t edits) {
  AttemptRecord r{challenge, clock_(), verdict.pass, verdict.reason, edits, verdict.metrics};
  std::lock_guard lock(mu_);
  records_.push_back(r);
  if (path_) {
    std::error_code ec;
    const auto parent = fs::path(*path_).parent_path();
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream out(*path_, std::ios::app | std::ios::binary);
    out << to_jsonl(r) << '\n';
    out.flush();
    if (!out) throw IoError("cannot append to telemetry log " + *path_);
  }
  return r;
}

std::size_t TelemetryStore::failed_attempts(const std::string& challenge) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [&](const auto& r) {
    return r.challenge == challenge && !r.pass;
  }));
}

bool TelemetryStore::solved(const std::string& challenge) const {
  std::lock_guard lock(mu_);
  return std::any_of(records_.begin(), records_.end(),
                     [&](const auto& r) { return r.challenge == challenge && r.pass; });
}

std::vector<AttemptRecord> TelemetryStore::attempts() const {
  std::lock_guard lock(mu_);
  auto out = records_;
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.timestamp_ms < b.timestamp_ms; });
  return out;
}

std::string TelemetryStore::export_jsonl() const {
  std::string out;
  for (const auto& r : attempts()) out += to_jsonl(r) + "\n";
  return out;
}

}  // namespace blockpath
