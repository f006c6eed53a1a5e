#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "higvf/vec2.hpp"

namespace higvf {

struct SetPath {
  std::vector<Vec2> points;
  bool operator==(const SetPath&) const = default;
};
struct ClearPath {
  bool operator==(const ClearPath&) const = default;
};
struct SelectRobot {
  int robot{0};
  bool operator==(const SelectRobot&) const = default;
};
struct Pause {
  bool operator==(const Pause&) const = default;
};
struct Resume {
  bool operator==(const Resume&) const = default;
};
/// Names: w0 w1 w2 w3 eps C ks kf.
struct SetWeight {
  std::string name;
  double value{0.0};
  bool operator==(const SetWeight&) const = default;
};

using CommandPayload = std::variant<SetPath, ClearPath, SelectRobot, Pause, Resume, SetWeight>;

struct OperatorCommand {
  CommandPayload payload;
  double issue_time{0.0};

  bool operator==(const OperatorCommand&) const = default;
};

/// Timed entry of a human script.
struct ScriptEntry {
  double time{0.0};
  OperatorCommand command;

  bool operator==(const ScriptEntry&) const = default;
};

class CommandError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Short tag: "set_path", "clear_path", "select_robot", "pause", "resume", "set_weight".
std::string commandKind(const CommandPayload& payload);

/// {"type": <kind>, ...payload fields}
nlohmann::json commandToJson(const CommandPayload& payload);
/// Inverse of commandToJson; throws CommandError on unknown kinds or bad fields.
CommandPayload commandFromJson(const nlohmann::json& j);

bool isKnownWeight(const std::string& name);

std::vector<ScriptEntry> scriptFromJson(const nlohmann::json& j);
nlohmann::json scriptToJson(const std::vector<ScriptEntry>& script);

}  // namespace higvf
