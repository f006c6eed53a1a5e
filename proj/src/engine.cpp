#include "higvf/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "higvf/safety_qp.hpp"

namespace higvf {

std::string eventKindName(EngineEvent::Kind kind) {
  switch (kind) {
    case EngineEvent::Kind::kFireExtinguished: return "fire_extinguished";
    case EngineEvent::Kind::kRobotViolation: return "robot_violation";
    case EngineEvent::Kind::kObstacleViolation: return "obstacle_violation";
    case EngineEvent::Kind::kInfeasible: return "qp_infeasible";
    case EngineEvent::Kind::kPerceptionFailure: return "perception_failure";
    case EngineEvent::Kind::kCommandApplied: return "command_applied";
    case EngineEvent::Kind::kCommandRejected: return "command_rejected";
  }
  return "unknown";
}

long CommandQueue::push(OperatorCommand command) {
  std::lock_guard lock(mutex_);
  items_.push_back(std::move(command));
  return drained_for_ + 1;
}

std::vector<OperatorCommand> CommandQueue::drain(long tick) {
  std::lock_guard lock(mutex_);
  drained_for_ = tick;
  std::vector<OperatorCommand> out;
  out.swap(items_);
  return out;
}

std::size_t CommandQueue::size() const {
  std::lock_guard lock(mutex_);
  return items_.size();
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

IntentionWeights withWeight(IntentionWeights w, const SetWeight& c) {
  if (c.name == "w0") w.w0 = c.value;
  else if (c.name == "w1") w.w1 = c.value;
  else if (c.name == "w2") w.w2 = c.value;
  else if (c.name == "w3") w.w3 = c.value;
  else if (c.name == "eps") w.eps = c.value;
  else if (c.name == "C") w.speed = c.value;
  else if (c.name == "ks") w.ks = c.value;
  else if (c.name == "kf") w.kf = c.value;
  return w;
}

}  // namespace

std::optional<std::string> checkCommand(const World& world, const CommandPayload& payload) {
  return std::visit(
      Overloaded{
          [&](const SetPath& c) -> std::optional<std::string> {
            try {
              (void)pathFromPolyline(c.points, world.params.path_spacing, world.params.drawn_path_gain);
            } catch (const FieldError& e) {
              return std::string(e.what());
            }
            return std::nullopt;
          },
          [&](const SelectRobot& c) -> std::optional<std::string> {
            if (c.robot < 0 || c.robot >= static_cast<int>(world.robots.size())) {
              return "unknown robot " + std::to_string(c.robot);
            }
            return std::nullopt;
          },
          [&](const SetWeight& c) -> std::optional<std::string> {
            if (!isKnownWeight(c.name)) return "unknown weight '" + c.name + "'";
            try {
              withWeight(world.weights, c).validate(world.maxDegree());
            } catch (const std::invalid_argument& e) {
              return std::string(e.what());
            }
            return std::nullopt;
          },
          [](const auto&) -> std::optional<std::string> { return std::nullopt; },
      },
      payload);
}

double consensusError(const std::vector<Vec2>& positions, const std::vector<Edge>& edges) {
  double sum = 0.0;
  for (const Edge& e : edges) {
    const Vec2 diff = positions[e.i] - positions[e.j];
    const double n = diff.norm();
    const Vec2 dir = n > 0.0 ? diff / n : Vec2{1.0, 0.0};
    sum += (diff - e.desired_distance * dir).squaredNorm();
  }
  return std::sqrt(sum);
}

double consensusError(const World& world) {
  std::vector<Vec2> p;
  for (const RobotState& r : world.robots) p.push_back(r.position);
  return consensusError(p, world.edges);
}

Engine::Engine(World world) : world_(std::move(world)) {
  script_ = world_.config.human_script;
  last_.clock = world_.clock;
  last_.tick = world_.tick;
  for (const RobotState& r : world_.robots) {
    RobotRecord rr;
    rr.position = r.position;
    rr.influenced = r.intention.influenced;
    last_.robots.push_back(rr);
  }
  for (const FireSource& f : world_.fires) last_.fire_radii.push_back(f.radius);
  last_.human_path_id = world_.human_path_id;
  last_.consensus_error = consensusError(world_);
}

void Engine::setScript(std::vector<ScriptEntry> script) {
  std::stable_sort(script.begin(), script.end(),
                   [](const ScriptEntry& a, const ScriptEntry& b) { return a.time < b.time; });
  script_ = std::move(script);
  script_pos_ = 0;
}

void Engine::event(EngineEvent::Kind kind, int subject, int other, std::string detail) {
  events_.push_back({kind, world_.tick, world_.clock, subject, other, std::move(detail)});
}

void Engine::feedScript() {
  while (script_pos_ < script_.size() && script_[script_pos_].time <= world_.clock + 1e-9) {
    queue_.push(script_[script_pos_].command);
    ++script_pos_;
  }
}

void Engine::applyCommands() {
  for (const OperatorCommand& c : queue_.drain(world_.tick + 1)) apply(c);
}

void Engine::apply(const OperatorCommand& command) {
  const CommandPayload& payload = command.payload;
  const std::string kind = commandKind(payload);
  if (auto reason = checkCommand(world_, payload)) {
    event(EngineEvent::Kind::kCommandRejected, -1, -1, kind + ": " + *reason);
    return;
  }
  std::visit(Overloaded{
                 [&](const SetPath& c) {
                   world_.human_path =
                       pathFromPolyline(c.points, world_.params.path_spacing, world_.params.drawn_path_gain);
                   world_.human_path_id = world_.path_counter++;
                 },
                 [&](const ClearPath&) {
                   world_.human_path.reset();
                   world_.human_path_id = -1;
                 },
                 [&](const SelectRobot& c) {
                   for (RobotState& r : world_.robots) r.intention.influenced = (r.id == c.robot);
                 },
                 [&](const Pause&) { world_.paused = true; },
                 [&](const Resume&) { world_.paused = false; },
                 [&](const SetWeight& c) { world_.weights = withWeight(world_.weights, c); },
             },
             payload);
  event(EngineEvent::Kind::kCommandApplied, -1, -1, kind);
}

void Engine::finishTick(TickRecord record) {
  last_ = std::move(record);
  if (recording_) records_.push_back(last_);
  if (observer_) observer_(world_, last_);
}

const TickRecord& Engine::tick() {
  feedScript();
  applyCommands();

  const double dt = world_.params.dt;
  const std::size_t n = world_.robots.size();
  const IntentionWeights& w = world_.weights;

  TickRecord rec;
  rec.robots.resize(n);

  if (world_.paused) {
    ++world_.tick;
    world_.clock = static_cast<double>(world_.tick) * dt;
    for (std::size_t i = 0; i < n; ++i) {
      const RobotState& r = world_.robots[i];
      RobotRecord& rr = rec.robots[i];
      rr.position = r.position;
      rr.shared = r.intention.shared;
      rr.target_id = r.target.fire_id;
      rr.influenced = r.intention.influenced;
      world_.robots[i].velocity = {};
    }
    rec.tick = world_.tick;
    rec.clock = world_.clock;
    for (const FireSource& f : world_.fires) rec.fire_radii.push_back(f.radius);
    rec.human_path_id = world_.human_path_id;
    rec.consensus_error = consensusError(world_);
    finishTick(std::move(rec));
    return last_;
  }

  std::vector<Vec2> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = world_.robots[i].position;

  // Perception and local fields from the step-k snapshot.
  std::vector<Vec2> vt(n), vf(n), vh(n);
  std::vector<FormationNeighbor> fn;
  std::vector<int> circ(world_.obstacles.size());
  for (std::size_t i = 0; i < n; ++i) {
    RobotState& r = world_.robots[i];
    try {
      const TargetChoice previous = r.target;
      r.target = selectTarget(r.position, world_.fires, world_.obstacles);
      if (world_.params.engage_lock && previous.hasTarget() && r.target.fire_id != previous.fire_id) {
        const FireSource& f = world_.fires[previous.fire_id];
        if (!f.extinguished &&
            (r.position - f.position).norm() <= f.radius + world_.fire_model.participation_radius) {
          r.target = {previous.fire_id, observedFireValue(r.position, f, world_.obstacles)};
        }
      }
    } catch (const PerceptionError& e) {
      event(EngineEvent::Kind::kPerceptionFailure, static_cast<int>(i), -1, e.what());
    }
    vt[i] = targetField(r.position, r.target, world_.fires, world_.obstacles);

    fn.clear();
    for (const Neighbor& nb : world_.neighbors[i]) fn.push_back({positions[nb.robot], nb.desired_distance});
    vf[i] = formationField(r.position, fn, world_.obstacles);

    if (r.intention.influenced && world_.human_path) {
      if (world_.params.human_field == HumanFieldMode::kComposite) {
        for (std::size_t k = 0; k < world_.obstacles.size(); ++k) {
          circ[k] = r.latched[k] != 0 ? r.latched[k]
                                      : latchObstacleDirection(world_.obstacles[k], r.position, r.velocity);
        }
        vh[i] = compositeField(*world_.human_path, world_.obstacles, r.position, circ);
      } else {
        vh[i] = humanIntention(&*world_.human_path, world_.obstacles, r.position);
      }
    }
  }

  // Synchronous intention update.
  std::vector<Vec2> next_shared(n);
  std::vector<Vec2> ns;
  for (std::size_t i = 0; i < n; ++i) {
    ns.clear();
    for (const Neighbor& nb : world_.neighbors[i]) ns.push_back(world_.robots[nb.robot].intention.shared);
    next_shared[i] = updateIntention(world_.robots[i].intention, vt[i], vh[i], ns, w);
  }

  std::vector<Vec2> desired(n);
  for (std::size_t i = 0; i < n; ++i) {
    RobotState& r = world_.robots[i];
    r.intention.shared = next_shared[i];
    RobotRecord& rr = rec.robots[i];
    rr.target = vt[i];
    rr.formation = vf[i];
    rr.human = r.intention.influenced ? vh[i] : Vec2{};
    rr.shared = next_shared[i];
    rr.normalized = normalizeIntention(next_shared[i], w.speed);
    const double vs_norm = next_shared[i].norm();
    rr.lambda = blendWeight(vs_norm, vf[i].norm(), w.ks, w.kf);
    rr.blended = blend(rr.normalized, vf[i], vs_norm, w.ks, w.kf);
    rr.target_id = r.target.fire_id;
    rr.influenced = r.intention.influenced;
    desired[i] = rr.blended;
  }

  // Safety filter against every other robot and every sensed obstacle.
  std::vector<std::vector<int>> others(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others[i].push_back(static_cast<int>(j));
    }
  }
  std::vector<SafetyEvent> sev;
  std::vector<Vec2> safe = filterVelocities(positions, others, world_.obstacles, desired, world_.safety, &sev);
  for (const SafetyEvent& e : sev) {
    switch (e.kind) {
      case SafetyEvent::Kind::kRobotViolation:
        event(EngineEvent::Kind::kRobotViolation, e.robot, e.other, "inter-robot distance <= Rr");
        break;
      case SafetyEvent::Kind::kObstacleViolation:
        event(EngineEvent::Kind::kObstacleViolation, e.robot, e.other, "obstacle clearance <= Ro");
        break;
      case SafetyEvent::Kind::kInfeasible:
        event(EngineEvent::Kind::kInfeasible, e.robot, -1, "safety QP infeasible; robot held");
        break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    Vec2 v = safe[i];
    const double s = v.norm();
    if (s > w.speed) v = (w.speed / s) * v;
    RobotState& r = world_.robots[i];
    r.velocity = v;
    r.position += dt * v;
    rec.robots[i].safe = v;
    rec.robots[i].position = r.position;
  }

  ++world_.tick;
  world_.clock = static_cast<double>(world_.tick) * dt;

  std::vector<Vec2> after(n);
  for (std::size_t i = 0; i < n; ++i) after[i] = world_.robots[i].position;
  for (const FireEvent& fe : stepFires(world_.fires, after, world_.fire_model, dt, world_.clock)) {
    event(EngineEvent::Kind::kFireExtinguished, fe.fire, -1, "");
  }

  for (RobotState& r : world_.robots) {
    for (std::size_t k = 0; k < world_.obstacles.size(); ++k) {
      const ObstacleField& ob = world_.obstacles[k];
      if (ob.evaluate(r.position).value < 0.0) {
        if (r.latched[k] == 0) r.latched[k] = latchObstacleDirection(ob, r.position, r.velocity);
      } else {
        r.latched[k] = 0;
      }
    }
  }

  rec.tick = world_.tick;
  rec.clock = world_.clock;
  for (const FireSource& f : world_.fires) rec.fire_radii.push_back(f.radius);
  rec.human_path_id = world_.human_path_id;
  rec.consensus_error = consensusError(after, world_.edges);
  finishTick(std::move(rec));
  return last_;
}

void Engine::run(double duration) {
  const long ticks = std::lround(duration / world_.params.dt);
  for (long k = 0; k < ticks; ++k) tick();
}

// ---------------------------------------------------------------------------
// Exports

namespace {

void appendNum(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void appendVec(std::string& out, const Vec2& v) {
  out += ',';
  appendNum(out, v.x);
  out += ',';
  appendNum(out, v.y);
}

}  // namespace

std::string trajectoryCsv(const std::vector<TickRecord>& records) {
  std::string out =
      "tick,clock,robot,x,y,vt_x,vt_y,vs_x,vs_y,vshat_x,vshat_y,vf_x,vf_y,vh_x,vh_y,v_x,v_y,safe_x,safe_y,"
      "lambda,target,psi,path_id,consensus_error";
  const std::size_t fires = records.empty() ? 0 : records.front().fire_radii.size();
  for (std::size_t f = 0; f < fires; ++f) out += ",fire" + std::to_string(f) + "_radius";
  out += '\n';
  for (const TickRecord& t : records) {
    for (std::size_t i = 0; i < t.robots.size(); ++i) {
      const RobotRecord& r = t.robots[i];
      out += std::to_string(t.tick);
      out += ',';
      appendNum(out, t.clock);
      out += ',' + std::to_string(i);
      appendVec(out, r.position);
      appendVec(out, r.target);
      appendVec(out, r.shared);
      appendVec(out, r.normalized);
      appendVec(out, r.formation);
      appendVec(out, r.human);
      appendVec(out, r.blended);
      appendVec(out, r.safe);
      out += ',';
      appendNum(out, r.lambda);
      out += ',' + std::to_string(r.target_id);
      out += r.influenced ? ",1" : ",0";
      out += ',' + std::to_string(t.human_path_id);
      out += ',';
      appendNum(out, t.consensus_error);
      for (double radius : t.fire_radii) {
        out += ',';
        appendNum(out, radius);
      }
      out += '\n';
    }
  }
  return out;
}

std::string eventsCsv(const std::vector<EngineEvent>& events) {
  std::string out = "tick,clock,kind,subject,other,detail\n";
  for (const EngineEvent& e : events) {
    out += std::to_string(e.tick) + ',';
    appendNum(out, e.clock);
    out += ',' + eventKindName(e.kind) + ',' + std::to_string(e.subject) + ',' + std::to_string(e.other) + ",\"" +
           e.detail + "\"\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Probes

StabilityReport stabilityProbe(const std::vector<TickRecord>& records, const IntentionWeights& weights) {
  StabilityReport rep;
  rep.gamma_t = 0.5 * std::sqrt(weights.w1 / weights.w0);
  rep.gamma_h = 0.5 * std::sqrt(weights.w3 / weights.w0);
  if (records.size() < 100) {
    rep.iss_holds = false;
    rep.consensus_bounded = false;
    return rep;
  }
  const std::size_t start = records.size() / 2;
  rep.samples = records.size() - start;
  const auto stacked = [](const TickRecord& t, Vec2 RobotRecord::*field) {
    double s = 0.0;
    for (const RobotRecord& r : t.robots) s += (r.*field).squaredNorm();
    return std::sqrt(s);
  };
  for (std::size_t k = start; k < records.size(); ++k) {
    rep.max_shared = std::max(rep.max_shared, stacked(records[k], &RobotRecord::shared));
    rep.max_target = std::max(rep.max_target, stacked(records[k], &RobotRecord::target));
    rep.max_human = std::max(rep.max_human, stacked(records[k], &RobotRecord::human));
    rep.max_consensus = std::max(rep.max_consensus, records[k].consensus_error);
  }
  rep.bound = rep.gamma_t * rep.max_target + rep.gamma_h * rep.max_human;
  if (rep.bound > 0.0) {
    rep.ratio = rep.max_shared / rep.bound;
  } else {
    rep.ratio = rep.max_shared > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  rep.iss_holds = rep.ratio <= 1.05;

  // Monotone growth over the last quarter counts as unbounded.
  const std::size_t q = records.size() - records.size() / 4;
  bool monotone = true;
  for (std::size_t k = q + 1; k < records.size(); ++k) {
    if (records[k].consensus_error < records[k - 1].consensus_error) {
      monotone = false;
      break;
    }
  }
  const double growth = records.back().consensus_error - records[q].consensus_error;
  rep.consensus_bounded = !(monotone && growth > 1e-6 * std::max(1.0, records[q].consensus_error));
  return rep;
}

std::string formatStabilityReport(const StabilityReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "# limsup approximated by the tail-half maximum\n"
                "samples,%zu\nmax_shared,%.17g\nmax_target,%.17g\nmax_human,%.17g\ngamma_t,%.17g\n"
                "gamma_h,%.17g\nbound,%.17g\nratio,%.17g\niss_holds,%d\nmax_consensus_error,%.17g\n"
                "consensus_bounded,%d\n",
                r.samples, r.max_shared, r.max_target, r.max_human, r.gamma_t, r.gamma_h, r.bound, r.ratio,
                r.iss_holds ? 1 : 0, r.max_consensus, r.consensus_bounded ? 1 : 0);
  return buf;
}

bool SafetySummary::ok(const SafetyParams& params, double speed_limit) const {
  return min_robot_distance >= params.robot_distance - 1e-3 &&
         min_obstacle_clearance >= params.obstacle_distance - 1e-3 && max_speed <= speed_limit + 1e-9;
}

SafetySummary safetySummary(const World& world, const std::vector<TickRecord>& records) {
  SafetySummary s;
  s.min_robot_distance = std::numeric_limits<double>::infinity();
  s.min_obstacle_clearance = std::numeric_limits<double>::infinity();
  const auto visit = [&](const std::vector<Vec2>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = i + 1; j < p.size(); ++j) s.min_robot_distance = std::min(s.min_robot_distance, distance(p[i], p[j]));
      for (const ObstacleField& ob : world.obstacles) {
        s.min_obstacle_clearance = std::min(s.min_obstacle_clearance, distance(p[i], ob.spinePoint(p[i])));
      }
    }
  };
  visit(world.config.robots);
  std::vector<Vec2> p;
  for (const TickRecord& t : records) {
    p.clear();
    for (const RobotRecord& r : t.robots) {
      p.push_back(r.position);
      s.max_speed = std::max(s.max_speed, r.safe.norm());
    }
    visit(p);
  }
  return s;
}

}  // namespace higvf
