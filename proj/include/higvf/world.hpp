#pragma once

// Scenario documents, the validated World they produce, fire dynamics and
// loss accounting.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "higvf/commands.hpp"
#include "higvf/field_core.hpp"
#include "higvf/local_controller.hpp"
#include "higvf/safety_qp.hpp"
#include "higvf/shared_control.hpp"

namespace higvf {

/// Validation failure naming the offending entity and the broken invariant.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string entity, std::string invariant)
      : std::runtime_error(entity + ": " + invariant),
        entity_(std::move(entity)),
        invariant_(std::move(invariant)) {}

  const std::string& entity() const { return entity_; }
  const std::string& invariant() const { return invariant_; }

 private:
  std::string entity_;
  std::string invariant_;
};

struct FireModel {
  double participation_radius{30.0};  ///< W: a robot works on a fire within W of its boundary
  double extinguish_rate{1.5};        ///< rho: radius removed per working robot per second
};

/// Which field drives the influenced robot.
enum class HumanFieldMode {
  kComposite,  ///< bump-blended path and obstacle-boundary fields
  kZeroIn,     ///< zero-in gated path field only
};

struct SimParams {
  double dt{0.02};
  double robot_radius{10.0};
  double obstacle_gain{2.0};  ///< k_r
  double l1{1.0};
  double l2{1.0};
  double gradient_step{1e-3};
  double path_spacing{5.0};  ///< resampling of drawn paths
  double drawn_path_gain{kDrawnPathGain};
  HumanFieldMode human_field{HumanFieldMode::kComposite};
  /// Keep the current target while within W of its boundary, until it is out.
  bool engage_lock{true};
};

// ---------------------------------------------------------------------------
// Scenario document (mirrors the file format field by field)

struct FireSpec {
  Vec2 position;
  double size{0.0};
  double growth{1.0};
};

struct ObstacleSpec {
  std::string kind{"disk"};  ///< "disk" or "bar"
  Vec2 position;
  double size{0.0};           ///< disk radius
  Vec2 extent;                ///< bar half length, half width
  double heading{0.0};
  int circulation{0};         ///< 0 = auto, +1 / -1 fixed
  std::optional<double> repulsive_level;
};

/// Explicit edges, or a communication radius over the initial positions;
/// neither means the complete graph.
struct TopologySpec {
  std::vector<std::pair<int, int>> edges;
  std::optional<double> radius;
};

struct DesiredDistance {
  int i{0};
  int j{0};
  double distance{0.0};
};

struct HumanPathSpec {
  std::string kind{"circle"};  ///< "circle" or "polyline"
  Vec2 center;
  double radius{0.0};
  std::vector<Vec2> points;
  std::optional<double> gain;
  int direction{1};  ///< circle only
};

struct ScenarioConfig {
  std::string name;
  std::vector<Vec2> robots;
  std::vector<FireSpec> fires;
  std::vector<ObstacleSpec> obstacles;
  TopologySpec topology;
  std::vector<DesiredDistance> desired_distances;
  IntentionWeights weights;
  SafetyParams safety;
  FireModel fire_model;
  SimParams params;
  std::optional<HumanPathSpec> human_path;
  std::optional<int> influenced;  ///< robot carrying Psi at start
  std::vector<ScriptEntry> human_script;
};

/// Parses the structured text (JSON) document. Throws ScenarioError on
/// malformed documents.
ScenarioConfig parseScenario(const std::string& text);
ScenarioConfig parseScenario(const nlohmann::json& doc);
nlohmann::json scenarioToJson(const ScenarioConfig& config);
std::string serializeScenario(const ScenarioConfig& config);
ScenarioConfig readScenarioFile(const std::string& path);

// ---------------------------------------------------------------------------
// World

struct RobotState {
  int id{0};
  Vec2 position;
  Vec2 velocity;
  IntentionState intention;
  /// Latched circulation per obstacle; 0 while outside its reactive area.
  std::vector<int> latched;
  TargetChoice target;
};

struct Neighbor {
  int robot{0};
  double desired_distance{0.0};
};

struct Edge {
  int i{0};
  int j{0};
  double desired_distance{0.0};
};

struct World {
  ScenarioConfig config;  ///< source document, kept for serialization
  double clock{0.0};
  long tick{0};
  std::vector<RobotState> robots;
  std::vector<FireSource> fires;
  std::vector<ObstacleField> obstacles;
  std::vector<Edge> edges;
  std::vector<std::vector<Neighbor>> neighbors;
  IntentionWeights weights;
  SafetyParams safety;
  FireModel fire_model;
  SimParams params;
  std::optional<ImplicitPath> human_path;
  int human_path_id{-1};
  int path_counter{0};
  bool paused{false};

  int influencedRobot() const;
  int maxDegree() const;
  std::vector<std::vector<int>> neighborIndices() const;
};

/// Builds and validates a World: unique entities, connected topology,
/// disjoint reactive areas, initial clearances above Rr / Ro, contractive
/// intention weights, well-formed script. Throws ScenarioError.
World buildWorld(const ScenarioConfig& config);
World loadScenario(const std::string& text);

/// Obstacle field for one document entry with the scenario's margins.
ObstacleField makeObstacle(const ObstacleSpec& spec, const SimParams& params);
/// Human path described by the document entry.
ImplicitPath makeHumanPath(const HumanPathSpec& spec, const SimParams& params);

// ---------------------------------------------------------------------------
// Fires and losses

struct FireEvent {
  int fire{0};
  double clock{0.0};
};

/// Advances every unextinguished fire by dR/dt = g - n * rho (clamped at 0),
/// n counting robots within W of the fire boundary. Returns extinguish events.
std::vector<FireEvent> stepFires(std::vector<FireSource>& fires, const std::vector<Vec2>& robots,
                                 const FireModel& model, double dt, double clock);

struct LossReport {
  std::vector<double> areas;  ///< pi * peak_radius^2 per fire
  double total{0.0};
};

LossReport lossReport(const std::vector<FireSource>& fires);
LossReport lossReport(const World& world);

/// Delimited table: header "loss_area,<variant>...", one row a(s_i) per fire,
/// then "Sum".
std::string formatLossTable(const std::vector<std::pair<std::string, LossReport>>& variants);

}  // namespace higvf
