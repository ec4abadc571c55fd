#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blockpath/algorithms.hpp"

namespace blockpath {

enum class PlaybackMode { Paused, Playing };

std::string_view to_string(PlaybackMode mode);

struct Overlay {
  Cell anchor;
  std::string text;
  bool operator==(const Overlay&) const = default;
};

// Renderable state of one trace. The four cell sets are pairwise disjoint
// except that path cells also appear in visited.
struct TraceVisual {
  std::string label;
  ColorTag color;
  long cursor = -1;
  std::vector<Cell> visited;
  std::vector<Cell> frontier;
  std::optional<Cell> current;
  std::vector<Cell> path;
  std::optional<Overlay> overlay;
  bool finished = false;

  bool operator==(const TraceVisual&) const = default;
};

struct VisualState {
  std::vector<TraceVisual> traces;
  bool operator==(const VisualState&) const = default;
};

struct StepResult {
  bool moved = false;  // false: already at the boundary, nothing changed
  VisualState state;
};

struct Inspection {
  GridNode node;
  double g_cost = 0;
  double h_value = 0;
  TraceEventKind status = TraceEventKind::ExpandCurrent;
  std::size_t visited_count = 0;
};

// Text shown above a trace's current cell.
std::string overlay_text(const TraceEvent& event);

// Time-travel controller over a set of traces. All cursors move in
// lockstep on a shared tick; a trace that has run out of events stays on
// its final event.
class DebugSession {
 public:
  static constexpr double kDefaultSpeed = 10.0;
  static constexpr double kDefaultMaxSpeed = 100.0;
  static constexpr std::size_t kCheckpointInterval = 64;

  explicit DebugSession(std::vector<ExecutionTrace> traces,
                        double speed = kDefaultSpeed,
                        double max_speed = kDefaultMaxSpeed);

  const std::vector<ExecutionTrace>& traces() const { return traces_; }
  const ExecutionTrace& trace(const std::string& label) const;

  // Shared tick, -1 before the first event.
  long tick() const { return tick_; }
  long last_tick() const { return last_tick_; }
  long cursor(std::size_t trace_index) const;
  bool at_end() const { return tick_ >= last_tick_; }
  bool at_start() const { return tick_ < 0; }

  PlaybackMode mode() const { return mode_; }
  double speed() const { return speed_; }
  double max_speed() const { return max_speed_; }
  std::chrono::nanoseconds tick_interval() const;

  // Manual stepping; StateError while Playing.
  StepResult step_forward();
  StepResult step_back();

  // Returns the mode actually in effect: Playing at the end stays Paused.
  PlaybackMode set_mode(PlaybackMode mode);
  // ArgumentError unless 0 < speed <= max_speed.
  double set_speed(double steps_per_second);

  // One playback tick. No-op unless Playing; drops back to Paused after
  // the final tick.
  StepResult advance_playback();

  // Events that the current tick landed on, one per trace still moving.
  std::vector<TraceEvent> events_at_tick() const;

  // StateError before the first step, NotFoundError for unknown labels.
  Inspection inspect(const std::string& label) const;

  VisualState materialize() const;

 private:
  struct Fold {
    std::set<Cell> visited;
    std::set<Cell> frontier;
    std::optional<Cell> current;
    bool finished = false;
  };

  static void apply(Fold& fold, const TraceEvent& e);
  TraceVisual visual_for(std::size_t i) const;

  std::vector<ExecutionTrace> traces_;
  // checkpoints_[i][k] is the fold after event (k + 1) * interval - 1.
  std::vector<std::vector<Fold>> checkpoints_;
  long tick_ = -1;
  long last_tick_ = -1;
  PlaybackMode mode_ = PlaybackMode::Paused;
  double speed_;
  double max_speed_;
};

}  // namespace blockpath
