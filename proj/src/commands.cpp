#include "higvf/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace higvf {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double finiteNumber(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_number()) {
    throw CommandError(std::string("command field '") + field + "' must be a number");
  }
  const double v = j.at(field).get<double>();
  if (!std::isfinite(v)) throw CommandError(std::string("command field '") + field + "' is not finite");
  return v;
}

}  // namespace

bool isKnownWeight(const std::string& name) {
  static const std::array<const char*, 8> kNames = {"w0", "w1", "w2", "w3", "eps", "C", "ks", "kf"};
  return std::any_of(kNames.begin(), kNames.end(), [&](const char* n) { return name == n; });
}

std::string commandKind(const CommandPayload& payload) {
  return std::visit(Overloaded{
                        [](const SetPath&) { return std::string("set_path"); },
                        [](const ClearPath&) { return std::string("clear_path"); },
                        [](const SelectRobot&) { return std::string("select_robot"); },
                        [](const Pause&) { return std::string("pause"); },
                        [](const Resume&) { return std::string("resume"); },
                        [](const SetWeight&) { return std::string("set_weight"); },
                    },
                    payload);
}

json commandToJson(const CommandPayload& payload) {
  json j;
  j["type"] = commandKind(payload);
  std::visit(Overloaded{
                 [&](const SetPath& c) {
                   json pts = json::array();
                   for (const Vec2& p : c.points) pts.push_back({p.x, p.y});
                   j["points"] = std::move(pts);
                 },
                 [&](const SelectRobot& c) { j["robot"] = c.robot; },
                 [&](const SetWeight& c) {
                   j["name"] = c.name;
                   j["value"] = c.value;
                 },
                 [](const auto&) {},
             },
             payload);
  return j;
}

CommandPayload commandFromJson(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw CommandError("command must be an object with a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "set_path") {
    if (!j.contains("points") || !j.at("points").is_array()) {
      throw CommandError("set_path requires a 'points' array");
    }
    SetPath c;
    for (const json& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw CommandError("set_path points must be [x, y] pairs");
      }
      const Vec2 v{p[0].get<double>(), p[1].get<double>()};
      if (!v.isFinite()) throw CommandError("set_path point is not finite");
      c.points.push_back(v);
    }
    if (c.points.size() < 2) throw CommandError("set_path needs at least 2 points");
    return c;
  }
  if (type == "clear_path") return ClearPath{};
  if (type == "pause") return Pause{};
  if (type == "resume") return Resume{};
  if (type == "select_robot") {
    if (!j.contains("robot") || !j.at("robot").is_number_integer()) {
      throw CommandError("select_robot requires an integer 'robot'");
    }
    return SelectRobot{j.at("robot").get<int>()};
  }
  if (type == "set_weight") {
    if (!j.contains("name") || !j.at("name").is_string()) {
      throw CommandError("set_weight requires a string 'name'");
    }
    SetWeight c{j.at("name").get<std::string>(), finiteNumber(j, "value")};
    if (!isKnownWeight(c.name)) throw CommandError("unknown weight '" + c.name + "'");
    return c;
  }
  throw CommandError("unknown command type '" + type + "'");
}

std::vector<ScriptEntry> scriptFromJson(const json& j) {
  if (!j.is_array()) throw CommandError("human script must be a list");
  std::vector<ScriptEntry> out;
  for (const json& e : j) {
    if (!e.is_object() || !e.contains("command")) {
      throw CommandError("script entries need 't' and 'command'");
    }
    ScriptEntry entry;
    entry.time = finiteNumber(e, "t");
    if (entry.time < 0.0) throw CommandError("script time must be >= 0");
    entry.command.payload = commandFromJson(e.at("command"));
    entry.command.issue_time = entry.time;
    out.push_back(std::move(entry));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScriptEntry& a, const ScriptEntry& b) { return a.time < b.time; });
  return out;
}

json scriptToJson(const std::vector<ScriptEntry>& script) {
  json arr = json::array();
  for (const ScriptEntry& e : script) arr.push_back({{"t", e.time}, {"command", commandToJson(e.command.payload)}});
  return arr;
}

}  // namespace higvf
