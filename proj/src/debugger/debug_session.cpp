#include <algorithm>
#include <cmath>

#include "blockpath/debugger.hpp"
#include "blockpath/error.hpp"
#include "blockpath/text.hpp"

namespace blockpath {

std::string_view to_string(PlaybackMode mode) {
  return mode == PlaybackMode::Playing ? "playing" : "paused";
}

std::string overlay_text(const TraceEvent& e) {
  return e.algo + " g=" + text::format_double(e.g_cost) +
         " h=" + text::format_double(e.h_value) + " " +
         std::string(to_string(e.kind)) + " visited=" + std::to_string(e.visited_count);
}

DebugSession::DebugSession(std::vector<ExecutionTrace> traces, double speed,
                           double max_speed)
    : traces_(std::move(traces)), speed_(speed), max_speed_(max_speed) {
  if (traces_.empty()) throw ArgumentError("debug session needs at least one trace");
  if (!(max_speed_ > 0)) throw ArgumentError("max speed must be positive");
  set_speed(speed);
  for (const auto& t : traces_) {
    if (t.events.empty()) throw ArgumentError("trace '" + t.spec.label + "' has no events");
    last_tick_ = std::max(last_tick_, static_cast<long>(t.last_step()));

    std::vector<Fold> marks;
    Fold fold;
    for (std::size_t s = 0; s < t.events.size(); ++s) {
      apply(fold, t.events[s]);
      if ((s + 1) % kCheckpointInterval == 0) marks.push_back(fold);
    }
    checkpoints_.push_back(std::move(marks));
  }
}

const ExecutionTrace& DebugSession::trace(const std::string& label) const {
  for (const auto& t : traces_) {
    if (t.spec.label == label) return t;
  }
  throw NotFoundError("no trace labelled '" + label + "'");
}

long DebugSession::cursor(std::size_t i) const {
  return std::min(tick_, static_cast<long>(traces_.at(i).last_step()));
}

std::chrono::nanoseconds DebugSession::tick_interval() const {
  return std::chrono::nanoseconds(static_cast<long long>(std::llround(1e9 / speed_)));
}

void DebugSession::apply(Fold& fold, const TraceEvent& e) {
  const auto c = e.node.cell();
  switch (e.kind) {
    case TraceEventKind::ExpandCurrent:
      fold.frontier.erase(c);
      fold.visited.insert(c);
      fold.current = c;
      break;
    case TraceEventKind::DiscoverFrontier:
    case TraceEventKind::ImproveFrontier:
      fold.frontier.insert(c);
      break;
    case TraceEventKind::FinishFound:
      // start = goal traces consist of this single event
      if (fold.visited.empty()) fold.visited.insert(c);
      fold.current.reset();
      fold.finished = true;
      break;
    case TraceEventKind::FinishUnreachable:
      fold.current.reset();
      fold.finished = true;
      break;
  }
}

TraceVisual DebugSession::visual_for(std::size_t i) const {
  const auto& t = traces_[i];
  TraceVisual v;
  v.label = t.spec.label;
  v.color = t.spec.color;
  v.cursor = cursor(i);
  if (v.cursor < 0) return v;

  const auto k = static_cast<std::size_t>(v.cursor);
  Fold fold;
  std::size_t from = 0;
  const std::size_t mark = (k + 1) / kCheckpointInterval;
  if (mark > 0) {
    fold = checkpoints_[i][mark - 1];
    from = mark * kCheckpointInterval;
  }
  for (std::size_t s = from; s <= k; ++s) apply(fold, t.events[s]);

  for (const auto& c : fold.visited) {
    if (!fold.current || c != *fold.current) v.visited.push_back(c);
  }
  v.frontier.assign(fold.frontier.begin(), fold.frontier.end());
  v.current = fold.current;
  v.finished = fold.finished;
  const auto& e = t.events[k];
  if (e.kind == TraceEventKind::FinishFound) {
    for (const auto& n : t.path) v.path.push_back(n.cell());
  }
  v.overlay = Overlay{fold.current.value_or(e.node.cell()), overlay_text(e)};
  return v;
}

VisualState DebugSession::materialize() const {
  VisualState state;
  for (std::size_t i = 0; i < traces_.size(); ++i) state.traces.push_back(visual_for(i));
  return state;
}

StepResult DebugSession::step_forward() {
  if (mode_ == PlaybackMode::Playing) throw StateError("break playback before stepping");
  if (at_end()) return {false, materialize()};
  ++tick_;
  return {true, materialize()};
}

StepResult DebugSession::step_back() {
  if (mode_ == PlaybackMode::Playing) throw StateError("break playback before stepping");
  if (at_start()) return {false, materialize()};
  --tick_;
  return {true, materialize()};
}

PlaybackMode DebugSession::set_mode(PlaybackMode mode) {
  mode_ = (mode == PlaybackMode::Playing && at_end()) ? PlaybackMode::Paused : mode;
  return mode_;
}

double DebugSession::set_speed(double steps_per_second) {
  if (!(steps_per_second > 0) || !std::isfinite(steps_per_second)) {
    throw ArgumentError("speed must be positive");
  }
  if (steps_per_second > max_speed_) {
    throw ArgumentError("speed exceeds the maximum of " + text::format_double(max_speed_));
  }
  speed_ = steps_per_second;
  return speed_;
}

StepResult DebugSession::advance_playback() {
  if (mode_ != PlaybackMode::Playing || at_end()) {
    if (at_end()) mode_ = PlaybackMode::Paused;
    return {false, materialize()};
  }
  ++tick_;
  if (at_end()) mode_ = PlaybackMode::Paused;
  return {true, materialize()};
}

std::vector<TraceEvent> DebugSession::events_at_tick() const {
  std::vector<TraceEvent> out;
  if (tick_ < 0) return out;
  for (const auto& t : traces_) {
    if (static_cast<long>(t.last_step()) >= tick_) {
      out.push_back(t.events[static_cast<std::size_t>(tick_)]);
    }
  }
  return out;
}

Inspection DebugSession::inspect(const std::string& label) const {
  for (std::size_t i = 0; i < traces_.size(); ++i) {
    if (traces_[i].spec.label != label) continue;
    const long c = cursor(i);
    if (c < 0) throw StateError("nothing to inspect before the first step");
    const auto& e = traces_[i].events[static_cast<std::size_t>(c)];
    return Inspection{e.node, e.g_cost, e.h_value, e.kind, e.visited_count};
  }
  throw NotFoundError("no trace labelled '" + label + "'");
}

}  // namespace blockpath
