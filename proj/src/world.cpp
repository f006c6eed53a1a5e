#include "higvf/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace higvf {

using nlohmann::json;

namespace {

std::string indexed(const char* kind, std::size_t i) { return std::string(kind) + "[" + std::to_string(i) + "]"; }

double number(const json& j, const char* key, const std::string& entity) {
  if (!j.contains(key)) throw ScenarioError(entity, std::string("missing '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ScenarioError(entity, std::string("'") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ScenarioError(entity, std::string("'") + key + "' is not finite");
  return d;
}

double numberOr(const json& j, const char* key, double fallback, const std::string& entity) {
  return j.contains(key) ? number(j, key, entity) : fallback;
}

Vec2 point(const json& j, const std::string& entity) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ScenarioError(entity, "position must be an [x, y] pair");
  }
  const Vec2 v{j[0].get<double>(), j[1].get<double>()};
  if (!v.isFinite()) throw ScenarioError(entity, "position is not finite");
  return v;
}

json pointJson(const Vec2& v) { return json::array({v.x, v.y}); }

int integer(const json& j, const char* key, const std::string& entity) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw ScenarioError(entity, std::string("'") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

const json& objectAt(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_object()) throw ScenarioError(key, "must be an object");
  return v;
}

const char* humanFieldName(HumanFieldMode m) { return m == HumanFieldMode::kZeroIn ? "zero_in" : "composite"; }

}  // namespace

// ---------------------------------------------------------------------------
// Parsing

ScenarioConfig parseScenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("document", std::string("malformed structured text: ") + e.what());
  }
  return parseScenario(doc);
}

ScenarioConfig parseScenario(const json& doc) {
  if (!doc.is_object()) throw ScenarioError("document", "top level must be an object");
  ScenarioConfig cfg;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ScenarioError("name", "must be a string");
    cfg.name = doc.at("name").get<std::string>();
  }

  if (!doc.contains("robots") || !doc.at("robots").is_array()) {
    throw ScenarioError("robots", "required list of [x, y] positions");
  }
  for (std::size_t i = 0; i < doc.at("robots").size(); ++i) {
    cfg.robots.push_back(point(doc.at("robots")[i], indexed("robot", i)));
  }

  if (doc.contains("fires")) {
    if (!doc.at("fires").is_array()) throw ScenarioError("fires", "must be a list");
    for (std::size_t i = 0; i < doc.at("fires").size(); ++i) {
      const json& f = doc.at("fires")[i];
      const std::string ent = indexed("fire", i);
      if (!f.is_object() || !f.contains("pos")) throw ScenarioError(ent, "needs 'pos'");
      FireSpec fs;
      fs.position = point(f.at("pos"), ent);
      fs.size = number(f, "size", ent);
      fs.growth = numberOr(f, "growth", 1.0, ent);
      cfg.fires.push_back(fs);
    }
  }

  if (doc.contains("obstacles")) {
    if (!doc.at("obstacles").is_array()) throw ScenarioError("obstacles", "must be a list");
    for (std::size_t i = 0; i < doc.at("obstacles").size(); ++i) {
      const json& o = doc.at("obstacles")[i];
      const std::string ent = indexed("obstacle", i);
      if (!o.is_object() || !o.contains("pos")) throw ScenarioError(ent, "needs 'pos'");
      ObstacleSpec os;
      if (o.contains("kind")) {
        if (!o.at("kind").is_string()) throw ScenarioError(ent, "'kind' must be a string");
        os.kind = o.at("kind").get<std::string>();
      }
      os.position = point(o.at("pos"), ent);
      if (os.kind == "disk") {
        os.size = number(o, "size", ent);
      } else if (os.kind == "bar") {
        if (!o.contains("extent")) throw ScenarioError(ent, "bar needs 'extent' [half_length, half_width]");
        os.extent = point(o.at("extent"), ent);
      } else {
        throw ScenarioError(ent, "kind must be \"disk\" or \"bar\"");
      }
      os.heading = numberOr(o, "heading", 0.0, ent);
      if (o.contains("circulation")) os.circulation = integer(o, "circulation", ent);
      if (o.contains("repulsive_level")) os.repulsive_level = number(o, "repulsive_level", ent);
      cfg.obstacles.push_back(os);
    }
  }

  if (doc.contains("topology")) {
    const json& t = doc.at("topology");
    if (t.is_array()) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        const json& e = t[k];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
          throw ScenarioError(indexed("edge", k), "must be an [i, j] pair of robot indices");
        }
        cfg.topology.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
    } else if (t.is_object()) {
      cfg.topology.radius = number(t, "radius", "topology");
    } else {
      throw ScenarioError("topology", "must be an edge list or {radius}");
    }
  }

  if (doc.contains("desired_distances")) {
    const json& d = doc.at("desired_distances");
    if (!d.is_array()) throw ScenarioError("desired_distances", "must be a list of {i, j, d}");
    for (std::size_t k = 0; k < d.size(); ++k) {
      const std::string ent = indexed("desired_distance", k);
      if (!d[k].is_object()) throw ScenarioError(ent, "must be {i, j, d}");
      cfg.desired_distances.push_back(
          {integer(d[k], "i", ent), integer(d[k], "j", ent), number(d[k], "d", ent)});
    }
  }

  if (doc.contains("weights")) {
    const json& w = objectAt(doc, "weights");
    IntentionWeights& iw = cfg.weights;
    iw.w0 = numberOr(w, "w0", iw.w0, "weights");
    iw.w1 = numberOr(w, "w1", iw.w1, "weights");
    iw.w2 = numberOr(w, "w2", iw.w2, "weights");
    iw.w3 = numberOr(w, "w3", iw.w3, "weights");
    iw.eps = numberOr(w, "eps", iw.eps, "weights");
    iw.speed = numberOr(w, "C", iw.speed, "weights");
    iw.ks = numberOr(w, "ks", iw.ks, "weights");
    iw.kf = numberOr(w, "kf", iw.kf, "weights");
  }
  if (doc.contains("safety")) {
    const json& s = objectAt(doc, "safety");
    SafetyParams& sp = cfg.safety;
    sp.robot_distance = numberOr(s, "Rr", sp.robot_distance, "safety");
    sp.obstacle_distance = numberOr(s, "Ro", sp.obstacle_distance, "safety");
    sp.alpha = numberOr(s, "alpha", sp.alpha, "safety");
    sp.beta = numberOr(s, "beta", sp.beta, "safety");
    sp.sensing_radius = numberOr(s, "sensing", sp.sensing_radius, "safety");
  }
  if (doc.contains("fire_model")) {
    const json& f = objectAt(doc, "fire_model");
    cfg.fire_model.participation_radius = numberOr(f, "W", cfg.fire_model.participation_radius, "fire_model");
    cfg.fire_model.extinguish_rate = numberOr(f, "rho", cfg.fire_model.extinguish_rate, "fire_model");
  }
  if (doc.contains("params")) {
    const json& p = objectAt(doc, "params");
    SimParams& sp = cfg.params;
    sp.dt = numberOr(p, "dt", sp.dt, "params");
    sp.robot_radius = numberOr(p, "robot_radius", sp.robot_radius, "params");
    sp.obstacle_gain = numberOr(p, "kr", sp.obstacle_gain, "params");
    sp.l1 = numberOr(p, "l1", sp.l1, "params");
    sp.l2 = numberOr(p, "l2", sp.l2, "params");
    sp.gradient_step = numberOr(p, "h", sp.gradient_step, "params");
    sp.path_spacing = numberOr(p, "path_spacing", sp.path_spacing, "params");
    sp.drawn_path_gain = numberOr(p, "drawn_path_gain", sp.drawn_path_gain, "params");
    if (p.contains("engage_lock")) {
      if (!p.at("engage_lock").is_boolean()) throw ScenarioError("params", "'engage_lock' must be true or false");
      sp.engage_lock = p.at("engage_lock").get<bool>();
    }
    if (p.contains("human_field")) {
      const json& m = p.at("human_field");
      if (m == "composite") {
        sp.human_field = HumanFieldMode::kComposite;
      } else if (m == "zero_in") {
        sp.human_field = HumanFieldMode::kZeroIn;
      } else {
        throw ScenarioError("params", "human_field must be \"composite\" or \"zero_in\"");
      }
    }
  }

  if (doc.contains("human_path") && !doc.at("human_path").is_null()) {
    const json& h = objectAt(doc, "human_path");
    HumanPathSpec hp;
    if (h.contains("circle")) {
      const json& c = h.at("circle");
      hp.kind = "circle";
      if (!c.is_object() || !c.contains("center")) throw ScenarioError("human_path", "circle needs center");
      hp.center = point(c.at("center"), "human_path");
      hp.radius = number(c, "radius", "human_path");
      if (c.contains("direction")) hp.direction = integer(c, "direction", "human_path");
    } else if (h.contains("polyline")) {
      hp.kind = "polyline";
      const json& pts = h.at("polyline");
      if (!pts.is_array()) throw ScenarioError("human_path", "polyline must be a list of [x, y]");
      for (const json& q : pts) hp.points.push_back(point(q, "human_path"));
    } else {
      throw ScenarioError("human_path", "needs 'circle' or 'polyline'");
    }
    if (h.contains("gain")) hp.gain = number(h, "gain", "human_path");
    cfg.human_path = hp;
  }
  if (doc.contains("influenced") && !doc.at("influenced").is_null()) {
    cfg.influenced = integer(doc, "influenced", "influenced");
  }

  if (doc.contains("human_script")) {
    try {
      cfg.human_script = scriptFromJson(doc.at("human_script"));
    } catch (const CommandError& e) {
      throw ScenarioError("human_script", e.what());
    }
  }
  return cfg;
}

json scenarioToJson(const ScenarioConfig& cfg) {
  json doc;
  if (!cfg.name.empty()) doc["name"] = cfg.name;
  json robots = json::array();
  for (const Vec2& r : cfg.robots) robots.push_back(pointJson(r));
  doc["robots"] = robots;

  json fires = json::array();
  for (const FireSpec& f : cfg.fires) {
    fires.push_back({{"pos", pointJson(f.position)}, {"size", f.size}, {"growth", f.growth}});
  }
  doc["fires"] = fires;

  json obstacles = json::array();
  for (const ObstacleSpec& o : cfg.obstacles) {
    json j{{"kind", o.kind}, {"pos", pointJson(o.position)}, {"heading", o.heading}};
    if (o.kind == "bar") {
      j["extent"] = pointJson(o.extent);
    } else {
      j["size"] = o.size;
    }
    if (o.circulation != 0) j["circulation"] = o.circulation;
    if (o.repulsive_level) j["repulsive_level"] = *o.repulsive_level;
    obstacles.push_back(j);
  }
  doc["obstacles"] = obstacles;

  if (cfg.topology.radius) {
    doc["topology"] = {{"radius", *cfg.topology.radius}};
  } else if (!cfg.topology.edges.empty()) {
    json edges = json::array();
    for (const auto& [i, j] : cfg.topology.edges) edges.push_back({i, j});
    doc["topology"] = edges;
  }
  if (!cfg.desired_distances.empty()) {
    json dd = json::array();
    for (const DesiredDistance& d : cfg.desired_distances) dd.push_back({{"i", d.i}, {"j", d.j}, {"d", d.distance}});
    doc["desired_distances"] = dd;
  }

  const IntentionWeights& w = cfg.weights;
  doc["weights"] = {{"w0", w.w0}, {"w1", w.w1}, {"w2", w.w2}, {"w3", w.w3},
                    {"eps", w.eps}, {"C", w.speed}, {"ks", w.ks}, {"kf", w.kf}};
  const SafetyParams& s = cfg.safety;
  doc["safety"] = {{"Rr", s.robot_distance}, {"Ro", s.obstacle_distance}, {"alpha", s.alpha},
                   {"beta", s.beta}, {"sensing", s.sensing_radius}};
  doc["fire_model"] = {{"W", cfg.fire_model.participation_radius}, {"rho", cfg.fire_model.extinguish_rate}};
  const SimParams& p = cfg.params;
  doc["params"] = {{"dt", p.dt},
                   {"robot_radius", p.robot_radius},
                   {"kr", p.obstacle_gain},
                   {"l1", p.l1},
                   {"l2", p.l2},
                   {"h", p.gradient_step},
                   {"path_spacing", p.path_spacing},
                   {"drawn_path_gain", p.drawn_path_gain},
                   {"human_field", humanFieldName(p.human_field)},
                   {"engage_lock", p.engage_lock}};

  if (cfg.human_path) {
    const HumanPathSpec& h = *cfg.human_path;
    json j;
    if (h.kind == "circle") {
      j["circle"] = {{"center", pointJson(h.center)}, {"radius", h.radius}, {"direction", h.direction}};
    } else {
      json pts = json::array();
      for (const Vec2& q : h.points) pts.push_back(pointJson(q));
      j["polyline"] = pts;
    }
    if (h.gain) j["gain"] = *h.gain;
    doc["human_path"] = j;
  }
  if (cfg.influenced) doc["influenced"] = *cfg.influenced;
  if (!cfg.human_script.empty()) doc["human_script"] = scriptToJson(cfg.human_script);
  return doc;
}

std::string serializeScenario(const ScenarioConfig& config) { return scenarioToJson(config).dump(2) + "\n"; }

ScenarioConfig readScenarioFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseScenario(ss.str());
}

// ---------------------------------------------------------------------------
// World construction

int World::influencedRobot() const {
  for (const RobotState& r : robots) {
    if (r.intention.influenced) return r.id;
  }
  return -1;
}

int World::maxDegree() const {
  std::size_t d = 0;
  for (const auto& n : neighbors) d = std::max(d, n.size());
  return static_cast<int>(d);
}

std::vector<std::vector<int>> World::neighborIndices() const {
  std::vector<std::vector<int>> out(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    for (const Neighbor& n : neighbors[i]) out[i].push_back(n.robot);
  }
  return out;
}

ObstacleField makeObstacle(const ObstacleSpec& spec, const SimParams& params) {
  ObstacleParams op;
  op.margins = ObstacleMargins::forRobotRadius(params.robot_radius);
  op.gain = params.obstacle_gain;
  op.l1 = params.l1;
  op.l2 = params.l2;
  op.repulsive_level = spec.repulsive_level;
  switch (spec.circulation) {
    case 0: op.circulation = Circulation::kAuto; break;
    case 1: op.circulation = Circulation::kPositive; break;
    case -1: op.circulation = Circulation::kNegative; break;
    default: throw FieldError("circulation must be -1, 0 or +1");
  }
  if (spec.kind == "bar") {
    return ObstacleField(BarBody{spec.position, spec.extent.x, spec.extent.y, spec.heading}, op);
  }
  return ObstacleField(DiskBody{spec.position, spec.size}, op);
}

ImplicitPath makeHumanPath(const HumanPathSpec& spec, const SimParams& params) {
  if (spec.kind == "circle") {
    const double gain = spec.gain.value_or(spec.radius > 0.0 ? 0.5 / spec.radius : 1.0);
    return ImplicitPath::circle(spec.center, spec.radius, spec.direction, gain);
  }
  return pathFromPolyline(spec.points, params.path_spacing, spec.gain.value_or(params.drawn_path_gain));
}

namespace {

bool reactiveAreasOverlap(const ObstacleField& a, const ObstacleField& b) {
  constexpr int kSamples = 720;
  if (a.evaluate(b.center()).value <= 0.0 || b.evaluate(a.center()).value <= 0.0) return true;
  for (const Vec2& q : a.boundaryPolygon(0.0, kSamples)) {
    if (b.evaluate(q).value <= 0.0) return true;
  }
  for (const Vec2& q : b.boundaryPolygon(0.0, kSamples)) {
    if (a.evaluate(q).value <= 0.0) return true;
  }
  return false;
}

void validateParams(const ScenarioConfig& cfg) {
  const SimParams& p = cfg.params;
  if (!(p.dt > 0.0)) throw ScenarioError("params", "dt must be > 0");
  if (!(p.robot_radius > 0.0)) throw ScenarioError("params", "robot_radius must be > 0");
  if (!(p.path_spacing > 0.0)) throw ScenarioError("params", "path_spacing must be > 0");
  if (!(p.gradient_step > 0.0)) throw ScenarioError("params", "h must be > 0");
  if (!(p.drawn_path_gain > 0.0)) throw ScenarioError("params", "drawn_path_gain must be > 0");
  if (!(cfg.fire_model.participation_radius >= 0.0)) throw ScenarioError("fire_model", "W must be >= 0");
  if (!(cfg.fire_model.extinguish_rate >= 0.0)) throw ScenarioError("fire_model", "rho must be >= 0");
  try {
    cfg.safety.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("safety", e.what());
  }
  if (!(cfg.weights.speed > 0.0)) throw ScenarioError("weights", "C must be > 0");
  if (!(cfg.weights.ks > 0.0) || !(cfg.weights.kf > 0.0)) throw ScenarioError("weights", "ks and kf must be > 0");
  if (!(cfg.weights.eps >= 0.0)) throw ScenarioError("weights", "eps must be >= 0");
}

std::vector<Edge> buildEdges(const ScenarioConfig& cfg) {
  const int n = static_cast<int>(cfg.robots.size());
  std::vector<std::pair<int, int>> pairs;
  if (cfg.topology.radius) {
    const double rc = *cfg.topology.radius;
    if (!(rc > 0.0)) throw ScenarioError("topology", "radius must be > 0");
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (distance(cfg.robots[i], cfg.robots[j]) <= rc) pairs.emplace_back(i, j);
      }
    }
  } else if (!cfg.topology.edges.empty()) {
    std::set<std::pair<int, int>> seen;
    for (std::size_t k = 0; k < cfg.topology.edges.size(); ++k) {
      auto [i, j] = cfg.topology.edges[k];
      const std::string ent = indexed("edge", k);
      if (i < 0 || j < 0 || i >= n || j >= n) throw ScenarioError(ent, "references a robot that does not exist");
      if (i == j) throw ScenarioError(ent, "self loop");
      if (!seen.insert({std::min(i, j), std::max(i, j)}).second) throw ScenarioError(ent, "duplicate edge");
      pairs.emplace_back(i, j);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
  }

  std::vector<Edge> edges;
  for (auto [i, j] : pairs) edges.push_back({i, j, distance(cfg.robots[i], cfg.robots[j])});
  for (std::size_t k = 0; k < cfg.desired_distances.size(); ++k) {
    const DesiredDistance& d = cfg.desired_distances[k];
    const std::string ent = indexed("desired_distance", k);
    if (!(d.distance > 0.0)) throw ScenarioError(ent, "distance must be > 0");
    auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) {
      return (e.i == d.i && e.j == d.j) || (e.i == d.j && e.j == d.i);
    });
    if (it == edges.end()) throw ScenarioError(ent, "does not match a topology edge");
    it->desired_distance = d.distance;
  }

  // Connectivity (breadth-first from robot 0).
  if (n > 0) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const Edge& e : edges) {
      adj[e.i].push_back(e.j);
      adj[e.j].push_back(e.i);
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!seen[i]) {
        throw ScenarioError("robot[" + std::to_string(i) + "]",
                            "unreachable in the topology; intention consensus needs a connected graph");
      }
    }
  }
  return edges;
}

}  // namespace

World buildWorld(const ScenarioConfig& cfg) {
  validateParams(cfg);
  if (cfg.robots.empty()) throw ScenarioError("robots", "at least one robot is required");

  World w;
  w.config = cfg;
  w.weights = cfg.weights;
  w.safety = cfg.safety;
  w.fire_model = cfg.fire_model;
  w.params = cfg.params;

  for (std::size_t i = 0; i < cfg.fires.size(); ++i) {
    const FireSpec& f = cfg.fires[i];
    const std::string ent = indexed("fire", i);
    if (!(f.size >= 0.0)) throw ScenarioError(ent, "size must be >= 0");
    if (!(f.growth >= 0.0)) throw ScenarioError(ent, "growth must be >= 0");
    FireSource s;
    s.id = static_cast<int>(i);
    s.position = f.position;
    s.radius = f.size;
    s.growth = f.growth;
    s.peak_radius = f.size;
    w.fires.push_back(s);
  }

  for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
    try {
      w.obstacles.push_back(makeObstacle(cfg.obstacles[i], cfg.params));
    } catch (const FieldError& e) {
      throw ScenarioError(indexed("obstacle", i), e.what());
    }
  }
  for (std::size_t a = 0; a < w.obstacles.size(); ++a) {
    for (std::size_t b = a + 1; b < w.obstacles.size(); ++b) {
      if (reactiveAreasOverlap(w.obstacles[a], w.obstacles[b])) {
        throw ScenarioError(indexed("obstacle", a) + " / " + indexed("obstacle", b),
                            "reactive areas overlap (reactive areas must be disjoint)");
      }
    }
  }

  w.edges = buildEdges(cfg);
  w.neighbors.assign(cfg.robots.size(), {});
  for (const Edge& e : w.edges) {
    w.neighbors[e.i].push_back({e.j, e.desired_distance});
    w.neighbors[e.j].push_back({e.i, e.desired_distance});
  }
  for (auto& n : w.neighbors) {
    std::sort(n.begin(), n.end(), [](const Neighbor& a, const Neighbor& b) { return a.robot < b.robot; });
  }
  try {
    cfg.weights.validate(w.maxDegree());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("weights", e.what());
  }

  const double rr = cfg.safety.robot_distance;
  const double ro = cfg.safety.obstacle_distance;
  for (std::size_t i = 0; i < cfg.robots.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.robots.size(); ++j) {
      if (!(distance(cfg.robots[i], cfg.robots[j]) > rr)) {
        throw ScenarioError(indexed("robot", i) + " / " + indexed("robot", j),
                            "initial separation must exceed Rr (safety invariant)");
      }
    }
    for (std::size_t k = 0; k < w.obstacles.size(); ++k) {
      const ObstacleField& ob = w.obstacles[k];
      const Vec2& p = cfg.robots[i];
      if (!(distance(p, ob.spinePoint(p)) > ro) || ob.bodyDistance(p) <= 0.0) {
        throw ScenarioError(indexed("robot", i) + " / " + indexed("obstacle", k),
                            "initial clearance must exceed Ro (safety invariant)");
      }
    }
  }

  if (cfg.influenced) {
    const int r = *cfg.influenced;
    if (r < 0 || r >= static_cast<int>(cfg.robots.size())) {
      throw ScenarioError("influenced", "references a robot that does not exist");
    }
  }
  if (cfg.human_path) {
    try {
      w.human_path = makeHumanPath(*cfg.human_path, cfg.params);
    } catch (const FieldError& e) {
      throw ScenarioError("human_path", e.what());
    }
    w.human_path_id = w.path_counter++;
  }
  for (std::size_t k = 0; k < cfg.human_script.size(); ++k) {
    const CommandPayload& c = cfg.human_script[k].command.payload;
    const std::string ent = indexed("human_script", k);
    if (const auto* s = std::get_if<SelectRobot>(&c)) {
      if (s->robot < 0 || s->robot >= static_cast<int>(cfg.robots.size())) {
        throw ScenarioError(ent, "select_robot references a robot that does not exist");
      }
    } else if (const auto* p = std::get_if<SetPath>(&c)) {
      try {
        (void)pathFromPolyline(p->points, cfg.params.path_spacing, cfg.params.drawn_path_gain);
      } catch (const FieldError& e) {
        throw ScenarioError(ent, e.what());
      }
    }
  }

  for (std::size_t i = 0; i < cfg.robots.size(); ++i) {
    RobotState r;
    r.id = static_cast<int>(i);
    r.position = cfg.robots[i];
    r.intention.influenced = cfg.influenced && *cfg.influenced == r.id;
    r.latched.assign(w.obstacles.size(), 0);
    w.robots.push_back(r);
  }
  return w;
}

World loadScenario(const std::string& text) { return buildWorld(parseScenario(text)); }

// ---------------------------------------------------------------------------
// Fires and losses

std::vector<FireEvent> stepFires(std::vector<FireSource>& fires, const std::vector<Vec2>& robots,
                                 const FireModel& model, double dt, double clock) {
  std::vector<FireEvent> events;
  for (FireSource& f : fires) {
    if (f.extinguished) continue;
    int n = 0;
    for (const Vec2& p : robots) {
      if (distance(p, f.position) <= f.radius + model.participation_radius) ++n;
    }
    f.radius = std::max(0.0, f.radius + (f.growth - n * model.extinguish_rate) * dt);
    f.peak_radius = std::max(f.peak_radius, f.radius);
    if (f.radius == 0.0) {
      f.extinguished = true;
      events.push_back({f.id, clock});
    }
  }
  return events;
}

LossReport lossReport(const std::vector<FireSource>& fires) {
  LossReport r;
  for (const FireSource& f : fires) {
    const double a = M_PI * f.peak_radius * f.peak_radius;
    r.areas.push_back(a);
    r.total += a;
  }
  return r;
}

LossReport lossReport(const World& world) { return lossReport(world.fires); }

std::string formatLossTable(const std::vector<std::pair<std::string, LossReport>>& variants) {
  std::string out = "loss_area";
  std::size_t rows = 0;
  for (const auto& [name, rep] : variants) {
    out += "," + name;
    rows = std::max(rows, rep.areas.size());
  }
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < rows; ++i) {
    out += "a(s_" + std::to_string(i + 1) + ")";
    for (const auto& v : variants) {
      out += ",";
      if (i < v.second.areas.size()) {
        std::snprintf(buf, sizeof buf, "%.10g", v.second.areas[i]);
        out += buf;
      }
    }
    out += "\n";
  }
  out += "Sum";
  for (const auto& v : variants) {
    std::snprintf(buf, sizeof buf, "%.10g", v.second.total);
    out += ",";
    out += buf;
  }
  out += "\n";
  return out;
}

}  // namespace higvf
