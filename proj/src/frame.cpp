#include "higvf/frame.hpp"

#include <cmath>

#include "higvf/engine.hpp"
#include "higvf/world.hpp"

namespace higvf {

using nlohmann::json;

namespace {

constexpr int kPolygonSamples = 96;

json vec(const Vec2& v) { return json::array({v.x, v.y}); }

json points(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const Vec2& p : pts) a.push_back(vec(p));
  return a;
}

[[noreturn]] void invalid(const std::string& what) { throw DecodeError(DecodeError::Kind::kInvalidField, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) invalid(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) invalid(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

long integer(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) invalid(std::string("field '") + key + "' must be an integer");
  return v.get<long>();
}

bool boolean(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) invalid(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string str(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) invalid(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Vec2 toVec(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) invalid("expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Vec2> toPoints(const json& v) {
  if (!v.is_array()) invalid("expected a list of [x, y]");
  std::vector<Vec2> out;
  for (const json& p : v) out.push_back(toVec(p));
  return out;
}

const json& list(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) invalid(std::string("field '") + key + "' must be a list");
  return v;
}

json parseVersioned(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DecodeError(DecodeError::Kind::kMalformed, std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw DecodeError(DecodeError::Kind::kMalformed, "message must be an object");
  if (!j.contains("v") || !j.at("v").is_number_integer()) {
    throw DecodeError(DecodeError::Kind::kVersionMismatch, "missing schema version 'v'");
  }
  if (j.at("v").get<long>() != kWireVersion) {
    throw DecodeError(DecodeError::Kind::kVersionMismatch,
                      "schema version mismatch: got " + j.at("v").dump() + ", expected " +
                          std::to_string(kWireVersion));
  }
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw DecodeError(DecodeError::Kind::kMalformed, "missing message 'type'");
  }
  return j;
}

json expectType(const std::string& text, const char* type) {
  json j = parseVersioned(text);
  if (j.at("type") != type) {
    throw DecodeError(DecodeError::Kind::kUnknownType,
                      "expected '" + std::string(type) + "', got '" + j.at("type").get<std::string>() + "'");
  }
  return j;
}

json header(const char* type) { return json{{"v", kWireVersion}, {"type", type}}; }

json robotJson(const RobotFrame& r) {
  return {{"id", r.id},           {"pos", vec(r.position)}, {"vel", vec(r.velocity)},
          {"target", r.target},   {"psi", r.influenced},    {"lambda", r.lambda}};
}

RobotFrame robotFrom(const json& j) {
  RobotFrame r;
  r.id = static_cast<int>(integer(j, "id"));
  r.position = toVec(field(j, "pos"));
  r.velocity = toVec(field(j, "vel"));
  r.target = static_cast<int>(integer(j, "target"));
  r.influenced = boolean(j, "psi");
  r.lambda = num(j, "lambda");
  return r;
}

json fireJson(const FireFrame& f) {
  return {{"id", f.id}, {"pos", vec(f.position)}, {"radius", f.radius}, {"extinguished", f.extinguished}};
}

FireFrame fireFrom(const json& j) {
  FireFrame f;
  f.id = static_cast<int>(integer(j, "id"));
  f.position = toVec(field(j, "pos"));
  f.radius = num(j, "radius");
  f.extinguished = boolean(j, "extinguished");
  return f;
}

std::vector<Vec2> pathPolyline(const World& world) {
  if (!world.human_path) return {};
  const ImplicitPath& p = *world.human_path;
  if (const auto* c = std::get_if<CirclePath>(&p.shape)) {
    std::vector<Vec2> out;
    for (int i = 0; i <= kPolygonSamples; ++i) {
      const double t = 2.0 * M_PI * i / kPolygonSamples;
      out.push_back(c->center + c->radius * Vec2{std::cos(t), std::sin(t)});
    }
    return out;
  }
  return std::get<SplinePath>(p.shape).controlPoints();
}

std::vector<FireFrame> fireFrames(const World& world) {
  std::vector<FireFrame> out;
  for (const FireSource& f : world.fires) out.push_back({f.id, f.position, f.radius, f.extinguished});
  return out;
}

}  // namespace

StateFrame makeFrame(const World& world, const TickRecord& record) {
  StateFrame f;
  f.tick = world.tick;
  f.clock = world.clock;
  for (std::size_t i = 0; i < world.robots.size(); ++i) {
    const RobotState& r = world.robots[i];
    const double lambda = i < record.robots.size() ? record.robots[i].lambda : 0.0;
    f.robots.push_back({r.id, r.position, r.velocity, r.target.fire_id, r.intention.influenced, lambda});
  }
  f.fires = fireFrames(world);
  f.path_id = world.human_path_id;
  f.path = pathPolyline(world);
  f.paused = world.paused;
  return f;
}

StateFrame makeFrame(const World& world) { return makeFrame(world, TickRecord{}); }

SceneMessage makeScene(const World& world) {
  SceneMessage s;
  for (std::size_t k = 0; k < world.obstacles.size(); ++k) {
    const ObstacleField& ob = world.obstacles[k];
    ObstacleFrame o;
    o.id = static_cast<int>(k);
    o.center = ob.center();
    o.heading = ob.heading();
    if (const auto* d = std::get_if<DiskBody>(&ob.body())) {
      o.kind = "disk";
      o.radius = d->radius;
    } else {
      const auto& b = std::get<BarBody>(ob.body());
      o.kind = "bar";
      o.half_length = b.half_length;
      o.half_width = b.half_width;
    }
    o.reactive = ob.boundaryPolygon(0.0, kPolygonSamples);
    o.repulsive = ob.boundaryPolygon(ob.repulsiveLevel(), kPolygonSamples);
    s.obstacles.push_back(std::move(o));
  }
  for (std::size_t i = 0; i < world.config.fires.size(); ++i) {
    const FireSpec& f = world.config.fires[i];
    s.fires.push_back({static_cast<int>(i), f.position, f.size, false});
  }
  for (std::size_t i = 0; i < world.config.robots.size(); ++i) {
    s.robots.push_back({static_cast<int>(i), world.config.robots[i], {}, -1,
                        world.config.influenced && *world.config.influenced == static_cast<int>(i), 0.0});
  }
  s.robot_radius = world.params.robot_radius;
  s.path_spacing = world.params.path_spacing;
  return s;
}

std::string encodeFrame(const StateFrame& f) {
  json j = header("frame");
  j["tick"] = f.tick;
  j["clock"] = f.clock;
  json robots = json::array();
  for (const RobotFrame& r : f.robots) robots.push_back(robotJson(r));
  j["robots"] = robots;
  json fires = json::array();
  for (const FireFrame& x : f.fires) fires.push_back(fireJson(x));
  j["fires"] = fires;
  j["path_id"] = f.path_id;
  j["path"] = points(f.path);
  j["paused"] = f.paused;
  return j.dump();
}

StateFrame decodeFrame(const std::string& text) {
  const json j = expectType(text, "frame");
  StateFrame f;
  f.tick = integer(j, "tick");
  f.clock = num(j, "clock");
  for (const json& r : list(j, "robots")) f.robots.push_back(robotFrom(r));
  for (const json& x : list(j, "fires")) f.fires.push_back(fireFrom(x));
  f.path_id = static_cast<int>(integer(j, "path_id"));
  f.path = toPoints(field(j, "path"));
  f.paused = boolean(j, "paused");
  return f;
}

std::string encodeScene(const SceneMessage& s) {
  json j = header("scene");
  json obs = json::array();
  for (const ObstacleFrame& o : s.obstacles) {
    obs.push_back({{"id", o.id},
                   {"kind", o.kind},
                   {"center", vec(o.center)},
                   {"radius", o.radius},
                   {"half_length", o.half_length},
                   {"half_width", o.half_width},
                   {"heading", o.heading},
                   {"reactive", points(o.reactive)},
                   {"repulsive", points(o.repulsive)}});
  }
  j["obstacles"] = obs;
  json fires = json::array();
  for (const FireFrame& x : s.fires) fires.push_back(fireJson(x));
  j["fires"] = fires;
  json robots = json::array();
  for (const RobotFrame& r : s.robots) robots.push_back(robotJson(r));
  j["robots"] = robots;
  j["robot_radius"] = s.robot_radius;
  j["path_spacing"] = s.path_spacing;
  return j.dump();
}

SceneMessage decodeScene(const std::string& text) {
  const json j = expectType(text, "scene");
  SceneMessage s;
  for (const json& o : list(j, "obstacles")) {
    ObstacleFrame f;
    f.id = static_cast<int>(integer(o, "id"));
    f.kind = str(o, "kind");
    f.center = toVec(field(o, "center"));
    f.radius = num(o, "radius");
    f.half_length = num(o, "half_length");
    f.half_width = num(o, "half_width");
    f.heading = num(o, "heading");
    f.reactive = toPoints(field(o, "reactive"));
    f.repulsive = toPoints(field(o, "repulsive"));
    s.obstacles.push_back(std::move(f));
  }
  for (const json& x : list(j, "fires")) s.fires.push_back(fireFrom(x));
  for (const json& r : list(j, "robots")) s.robots.push_back(robotFrom(r));
  s.robot_radius = num(j, "robot_radius");
  s.path_spacing = num(j, "path_spacing");
  return s;
}

std::string encodeClientMessage(const ClientMessage& message) {
  if (const auto* c = std::get_if<CommandMessage>(&message)) {
    json body = commandToJson(c->payload);
    json j = header(("cmd." + body.at("type").get<std::string>()).c_str());
    j["seq"] = c->seq;
    for (auto it = body.begin(); it != body.end(); ++it) {
      if (it.key() != "type") j[it.key()] = it.value();
    }
    return j.dump();
  }
  if (const auto* s = std::get_if<SnapshotRequest>(&message)) {
    json j = header("req.snapshot");
    j["seq"] = s->seq;
    return j.dump();
  }
  json j = header("req.scene");
  j["seq"] = std::get<SceneRequest>(message).seq;
  return j.dump();
}

ClientMessage decodeClientMessage(const std::string& text) {
  json j = parseVersioned(text);
  const std::string type = j.at("type").get<std::string>();
  const long seq = integer(j, "seq");
  if (type == "req.snapshot") return SnapshotRequest{seq};
  if (type == "req.scene") return SceneRequest{seq};
  if (type.rfind("cmd.", 0) != 0) throw DecodeError(DecodeError::Kind::kUnknownType, "unknown message type '" + type + "'");
  json body = j;
  body.erase("v");
  body.erase("seq");
  body["type"] = type.substr(4);
  try {
    return CommandMessage{seq, commandFromJson(body)};
  } catch (const CommandError& e) {
    const bool unknown = std::string(e.what()).rfind("unknown command type", 0) == 0;
    throw DecodeError(unknown ? DecodeError::Kind::kUnknownType : DecodeError::Kind::kInvalidField, e.what());
  }
}

std::string encodeAck(const Ack& ack) {
  json j = header("ack");
  j["seq"] = ack.seq;
  j["tick"] = ack.tick;
  return j.dump();
}

std::string encodeReject(const Reject& r) {
  json j = header("reject");
  j["seq"] = r.seq;
  j["reason"] = r.reason;
  return j.dump();
}

Ack decodeAck(const std::string& text) {
  const json j = expectType(text, "ack");
  return {integer(j, "seq"), integer(j, "tick")};
}

Reject decodeReject(const std::string& text) {
  const json j = expectType(text, "reject");
  return {integer(j, "seq"), str(j, "reason")};
}

std::string messageType(const std::string& text) { return parseVersioned(text).at("type").get<std::string>(); }

}  // namespace higvf
