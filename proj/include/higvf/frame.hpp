#pragma once

// Wire schema shared by the gateway and its clients. Every message is a JSON
// object carrying "v" (schema version) and "type". See docs/wire_schema.md.

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "higvf/commands.hpp"
#include "higvf/vec2.hpp"

namespace higvf {

struct World;
struct TickRecord;

inline constexpr int kWireVersion = 1;

struct RobotFrame {
  int id{0};
  Vec2 position;
  Vec2 velocity;
  int target{-1};
  bool influenced{false};
  double lambda{0.0};
  bool operator==(const RobotFrame&) const = default;
};

struct FireFrame {
  int id{0};
  Vec2 position;
  double radius{0.0};
  bool extinguished{false};
  bool operator==(const FireFrame&) const = default;
};

struct StateFrame {
  long tick{0};
  double clock{0.0};
  std::vector<RobotFrame> robots;
  std::vector<FireFrame> fires;
  int path_id{-1};
  std::vector<Vec2> path;  ///< active human path as a polyline; empty when none
  bool paused{false};
  bool operator==(const StateFrame&) const = default;
};

struct ObstacleFrame {
  int id{0};
  std::string kind;  ///< "disk" or "bar"
  Vec2 center;
  double radius{0.0};  ///< disk
  double half_length{0.0};
  double half_width{0.0};
  double heading{0.0};
  std::vector<Vec2> reactive;   ///< boundary polygon
  std::vector<Vec2> repulsive;  ///< boundary polygon
  bool operator==(const ObstacleFrame&) const = default;
};

/// Static layout, sent once per session before any frame.
struct SceneMessage {
  std::vector<ObstacleFrame> obstacles;
  std::vector<FireFrame> fires;  ///< initial layout
  std::vector<RobotFrame> robots;  ///< initial layout
  double robot_radius{0.0};
  double path_spacing{0.0};
  bool operator==(const SceneMessage&) const = default;
};

/// Operator command tagged with the client's sequence number.
struct CommandMessage {
  long seq{0};
  CommandPayload payload;
  bool operator==(const CommandMessage&) const = default;
};

struct SnapshotRequest {
  long seq{0};
  bool operator==(const SnapshotRequest&) const = default;
};
struct SceneRequest {
  long seq{0};
  bool operator==(const SceneRequest&) const = default;
};

struct Ack {
  long seq{0};
  long tick{0};  ///< the command is visible in the frame for this tick
  bool operator==(const Ack&) const = default;
};

struct Reject {
  long seq{-1};  ///< -1 when the message was unreadable
  std::string reason;
  bool operator==(const Reject&) const = default;
};

using ClientMessage = std::variant<CommandMessage, SnapshotRequest, SceneRequest>;

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { kMalformed, kVersionMismatch, kUnknownType, kInvalidField };
  DecodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

StateFrame makeFrame(const World& world, const TickRecord& record);
StateFrame makeFrame(const World& world);
SceneMessage makeScene(const World& world);

std::string encodeFrame(const StateFrame& frame);
StateFrame decodeFrame(const std::string& text);
std::string encodeScene(const SceneMessage& scene);
SceneMessage decodeScene(const std::string& text);

std::string encodeClientMessage(const ClientMessage& message);
/// Throws DecodeError; nothing is applied on failure.
ClientMessage decodeClientMessage(const std::string& text);

std::string encodeAck(const Ack& ack);
std::string encodeReject(const Reject& reject);
Ack decodeAck(const std::string& text);
Reject decodeReject(const std::string& text);

/// "type" of an encoded message, after checking the version. Throws DecodeError.
std::string messageType(const std::string& text);

}  // namespace higvf
