#pragma once

// Fixed-step simulation engine. One tick runs, in order:
//   1. apply queued operator commands
//   2. (paused: advance the clock, record, stop)
//   3. perception: observed fire values and target choice per robot
//   4. robot intention v_t, formation field v_f, human field v_h (influenced robot only)
//   5. synchronous shared-intention update v_s
//   6. speed normalization and policy blending
//   7. safety filter (per-robot QP)
//   8. speed clamp to C
//   9. explicit Euler integration
//  10. fire growth / extinguishing
//  11. obstacle circulation latching
//  12. record
// All per-robot stages read the step-k snapshot, so the result does not depend
// on robot order.

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "higvf/commands.hpp"
#include "higvf/world.hpp"

namespace higvf {

struct RobotRecord {
  Vec2 position;    ///< after integration
  Vec2 target;      ///< v_t
  Vec2 shared;      ///< v_s after the update
  Vec2 normalized;  ///< C v_s / |v_s|
  Vec2 formation;   ///< v_f
  Vec2 human;       ///< Psi * v_h
  Vec2 blended;     ///< before the safety filter
  Vec2 safe;        ///< filtered and clamped, the applied velocity
  double lambda{0.0};
  int target_id{-1};
  bool influenced{false};
};

struct TickRecord {
  long tick{0};
  double clock{0.0};  ///< clock at the end of the tick
  std::vector<RobotRecord> robots;
  std::vector<double> fire_radii;
  int human_path_id{-1};
  double consensus_error{0.0};
};

struct EngineEvent {
  enum class Kind {
    kFireExtinguished,
    kRobotViolation,
    kObstacleViolation,
    kInfeasible,
    kPerceptionFailure,
    kCommandApplied,
    kCommandRejected,
  };
  Kind kind{Kind::kCommandApplied};
  long tick{0};
  double clock{0.0};
  int subject{-1};  ///< fire or robot index
  int other{-1};    ///< other robot or obstacle index
  std::string detail;
};

std::string eventKindName(EngineEvent::Kind kind);

/// Multi-producer, single-consumer queue drained at tick boundaries.
class CommandQueue {
 public:
  /// Returns the tick whose record / frame will first reflect the command.
  long push(OperatorCommand command);
  /// Called by the engine at the start of the tick that produces record `tick`.
  std::vector<OperatorCommand> drain(long tick);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<OperatorCommand> items_;
  long drained_for_{0};
};

/// Reason a command cannot be applied to the world, or nullopt when it can.
std::optional<std::string> checkCommand(const World& world, const CommandPayload& payload);

/// Norm of the stacked edge residuals (p_i - p_j) - d_ij * unit(p_i - p_j):
/// the incidence-matrix difference of the positions, shifted by the desired
/// offset along each edge's current direction (x axis for coincident robots).
double consensusError(const World& world);
double consensusError(const std::vector<Vec2>& positions, const std::vector<Edge>& edges);

class Engine {
 public:
  explicit Engine(World world);

  const World& world() const { return world_; }
  const std::vector<TickRecord>& records() const { return records_; }
  const std::vector<EngineEvent>& events() const { return events_; }

  /// Thread-safe; applied at the start of the next tick.
  long submit(OperatorCommand command) { return queue_.push(std::move(command)); }
  CommandQueue& queue() { return queue_; }

  /// Timed commands fed into the queue as the clock reaches them. Defaults to
  /// the scenario's human_script.
  void setScript(std::vector<ScriptEntry> script);

  /// Called on the engine thread after every tick.
  void setObserver(std::function<void(const World&, const TickRecord&)> observer) {
    observer_ = std::move(observer);
  }

  /// When false, records are not retained (long interactive sessions).
  void setRecording(bool on) { recording_ = on; }

  const TickRecord& tick();
  /// round(duration / dt) ticks.
  void run(double duration);

  const TickRecord& lastRecord() const { return last_; }

 private:
  void applyCommands();
  void apply(const OperatorCommand& command);
  void feedScript();
  void finishTick(TickRecord record);
  void event(EngineEvent::Kind kind, int subject, int other, std::string detail);

  World world_;
  CommandQueue queue_;
  std::vector<ScriptEntry> script_;
  std::size_t script_pos_{0};
  std::vector<TickRecord> records_;
  std::vector<EngineEvent> events_;
  TickRecord last_;
  bool recording_{true};
  std::function<void(const World&, const TickRecord&)> observer_;
};

// ---------------------------------------------------------------------------
// Exports and probes

/// One row per (tick, robot) with every TickRecord field, %.17g numbers.
std::string trajectoryCsv(const std::vector<TickRecord>& records);
std::string eventsCsv(const std::vector<EngineEvent>& events);

struct StabilityReport {
  std::size_t samples{0};  ///< tail-half records used
  double max_shared{0.0};  ///< tail max |v_s| (stacked)
  double max_target{0.0};
  double max_human{0.0};
  double gamma_t{0.0};
  double gamma_h{0.0};
  double bound{0.0};   ///< gamma_t * max_target + gamma_h * max_human
  double ratio{0.0};   ///< max_shared / bound, 0 when both vanish
  bool iss_holds{true};  ///< ratio <= 1.05
  double max_consensus{0.0};    ///< tail max consensus error
  bool consensus_bounded{true};  ///< no monotone growth over the last quarter
  bool ok() const { return iss_holds && consensus_bounded; }
};

/// limsup approximated by the tail-half maximum. Requires >= 100 records.
StabilityReport stabilityProbe(const std::vector<TickRecord>& records, const IntentionWeights& weights);
std::string formatStabilityReport(const StabilityReport& report);

struct SafetySummary {
  double min_robot_distance{0.0};     ///< +inf with fewer than two robots
  double min_obstacle_clearance{0.0};  ///< distance to the obstacle spine; +inf without obstacles
  double max_speed{0.0};
  bool ok(const SafetyParams& params, double speed_limit) const;
};

SafetySummary safetySummary(const World& world, const std::vector<TickRecord>& records);

}  // namespace higvf
