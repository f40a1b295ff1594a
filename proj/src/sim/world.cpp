#include "dualdrive/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dd::sim {

std::string to_string(AccidentInfo::Kind k) {
    switch (k) {
        case AccidentInfo::Kind::collision_vehicle: return "collision_vehicle";
        case AccidentInfo::Kind::collision_pedestrian: return "collision_pedestrian";
        case AccidentInfo::Kind::collision_static: return "collision_static";
        case AccidentInfo::Kind::off_road: return "off_road";
        case AccidentInfo::Kind::red_light_violation: return "red_light_violation";
    }
    return "collision_vehicle";
}

AccidentInfo::Kind accident_kind_from_string(const std::string& s) {
    if (s == "collision_vehicle") return AccidentInfo::Kind::collision_vehicle;
    if (s == "collision_pedestrian") return AccidentInfo::Kind::collision_pedestrian;
    if (s == "collision_static") return AccidentInfo::Kind::collision_static;
    if (s == "off_road") return AccidentInfo::Kind::off_road;
    if (s == "red_light_violation") return AccidentInfo::Kind::red_light_violation;
    throw std::runtime_error("unknown accident kind '" + s + "'");
}

double route_progress(const std::vector<Vec2>& dense_path, const Vec2& position) {
    if (dense_path.size() < 2) throw std::runtime_error("route_progress: path needs >= 2 points");
    const double total = polyline_length(dense_path);
    if (total <= 0.0) return 0.0;
    const PolylineProjection proj = project_to_polyline(dense_path, position);
    return std::clamp(proj.s / total, 0.0, 1.0);
}

RouteProgressTracker::RouteProgressTracker(std::vector<Vec2> dense_path)
    : path_(std::move(dense_path)) {
    if (path_.size() < 2) throw std::runtime_error("route path needs >= 2 points");
}

double RouteProgressTracker::update(const Vec2& position) {
    best_ = std::max(best_, route_progress(path_, position));
    return best_;
}

World::World(const Scenario& scenario, double physics_hz)
    : scenario_(std::make_shared<Scenario>(scenario)),
      lanes_(scenario_, &scenario_->lane_graph),
      dt_(1.0 / physics_hz) {
    const Lane& ego_lane = lanes_->lane(scenario_->ego.lane);
    ego_.position = ego_lane.point_at(scenario_->ego.s);
    ego_.heading = ego_lane.heading_at(scenario_->ego.s);
    ego_.speed = scenario_->ego.speed;
    ego_.wheelbase = scenario_->ego.wheelbase;
    ego_.half_extents = scenario_->ego.half_extents;

    for (const AgentSpec& spec : scenario_->agents) {
        AgentRuntime a;
        a.spec = &spec;
        a.lane = spec.lane;
        a.s = spec.s;
        a.path_s = spec.s;
        a.speed = spec.speed;
        a.target_speed = spec.speed;
        refresh_agent_state(a);
        agents_.push_back(std::move(a));
    }
    prev_front_s_.assign(scenario_->lights.size(), -1e18);
    detect_infractions();
}

void World::tick(const Control& ego_control) {
    ego_ = step_vehicle(ego_, ego_control, dt_, VehicleLimits{}, &clamp_count_);
    for (AgentRuntime& a : agents_) advance_agent(a);
    time_ += dt_;
    ++tick_;
    detect_infractions();
}

void World::advance_agent(AgentRuntime& a) {
    // Fire due script commands.
    const auto& script = a.spec->script;
    while (a.next_cmd < script.size() && script[a.next_cmd].t <= time_ + 1e-9) {
        const ScriptCommand& cmd = script[a.next_cmd];
        if (cmd.speed) a.target_speed = *cmd.speed;
        if (cmd.accel) a.accel_mag = *cmd.accel;
        if (cmd.lane && *cmd.lane != a.lane) {
            // Re-anchor onto the new lane, keeping the world position; the
            // lateral offset then decays so the agent merges over.
            const Lane& to = lanes_->lane(*cmd.lane);
            const PolylineProjection proj = project_to_polyline(to.centerline, a.state.position);
            a.lane = *cmd.lane;
            a.s = proj.s;
            a.lateral = proj.lateral;
            a.lateral_rate = std::abs(a.lateral) / 2.0;  // merge over ~2 s
        }
        ++a.next_cmd;
    }

    // Speed toward target at the commanded accel magnitude.
    if (a.speed < a.target_speed) {
        a.speed = std::min(a.target_speed, a.speed + a.accel_mag * dt_);
    } else if (a.speed > a.target_speed) {
        a.speed = std::max(a.target_speed, a.speed - a.accel_mag * dt_);
    }

    if (a.spec->kind == AgentKind::pedestrian && !a.spec->path.empty()) {
        a.path_s += a.speed * dt_;
    } else {
        a.s += a.speed * dt_;
        if (a.lateral != 0.0) {
            const double step = a.lateral_rate * dt_;
            if (std::abs(a.lateral) <= step) {
                a.lateral = 0.0;
            } else {
                a.lateral -= std::copysign(step, a.lateral);
            }
        }
        // Continue onto the first successor when running off the lane end.
        const Lane* lane = lanes_->find_lane(a.lane);
        while (lane && a.s > lane->length() && !lane->successors.empty()) {
            a.s -= lane->length();
            a.lane = lane->successors.front();
            lane = lanes_->find_lane(a.lane);
        }
    }
    refresh_agent_state(a);
}

void World::refresh_agent_state(AgentRuntime& a) {
    ObjectState& st = a.state;
    st.id = a.spec->id;
    st.kind = a.spec->kind;
    st.half_extents = a.spec->half_extents;
    st.speed = a.speed;
    if (a.spec->kind == AgentKind::pedestrian && !a.spec->path.empty()) {
        const auto arclen = cumulative_arclength(a.spec->path);
        const double s = std::min(a.path_s, arclen.back());
        st.position = polyline_point_at(a.spec->path, arclen, s);
        const Vec2 tangent = polyline_tangent_at(a.spec->path, arclen, s);
        st.heading = std::atan2(tangent.y, tangent.x);
        st.lane_id = -1;
        st.lane_s = s;
        if (a.path_s >= arclen.back()) st.speed = 0.0;  // walker stops at path end
    } else {
        const Lane& lane = lanes_->lane(a.lane);
        const double s = std::min(a.s, lane.length());
        const Vec2 base = lane.point_at(s);
        const Vec2 tangent = lane.tangent_at(s);
        st.position = base + tangent.perp() * a.lateral;
        st.heading = std::atan2(tangent.y, tangent.x);
        st.lane_id = a.lane;
        st.lane_s = s;
        if (a.s >= lane.length() && lane.successors.empty()) st.speed = 0.0;
    }
    st.velocity = Vec2{std::cos(st.heading), std::sin(st.heading)} * st.speed;
}

LightPhase World::light_phase(int lane) const {
    for (const TrafficLightState& light : scenario_->lights) {
        if (light.anchor_lane == lane) return light.phase_at(time_);
    }
    return LightPhase::green;
}

std::vector<ObjectState> World::object_states() const {
    std::vector<ObjectState> out;
    out.reserve(agents_.size());
    for (const AgentRuntime& a : agents_) out.push_back(a.state);
    return out;
}

WorldSnapshot World::snapshot() const {
    WorldSnapshot snap;
    snap.tick = tick_;
    snap.time = time_;
    snap.ego.id = "ego";
    snap.ego.kind = AgentKind::vehicle;
    snap.ego.position = ego_.position;
    snap.ego.heading = ego_.heading;
    snap.ego.speed = ego_.speed;
    snap.ego.velocity = ego_.velocity();
    snap.ego.half_extents = ego_.half_extents;
    PolylineProjection proj;
    if (const Lane* lane = lanes_->nearest_lane(ego_.position, &proj)) {
        snap.ego.lane_id = lane->id;
        snap.ego.lane_s = proj.s;
    }
    snap.ego_target_speed = scenario_->ego.target_speed;
    snap.objects = object_states();
    for (const TrafficLightState& light : scenario_->lights) {
        const Lane& lane = lanes_->lane(light.anchor_lane);
        if (!lane.stop_line_s) continue;
        LightObservation obs;
        obs.lane = light.anchor_lane;
        obs.phase = light.phase_at(time_);
        obs.stop_line_s = *lane.stop_line_s;
        obs.position = lane.point_at(*lane.stop_line_s);
        snap.lights.push_back(obs);
    }
    snap.lanes = lanes_;
    return snap;
}

void World::detect_infractions() {
    accident_.reset();
    const OrientedBox ego_box = ego_.footprint();

    // 1) collisions, highest priority
    for (const AgentRuntime& a : agents_) {
        if (!boxes_overlap(ego_box, a.state.footprint())) continue;
        AccidentInfo info;
        switch (a.spec->kind) {
            case AgentKind::pedestrian:
                info.kind = AccidentInfo::Kind::collision_pedestrian;
                break;
            case AgentKind::static_obstacle:
                info.kind = AccidentInfo::Kind::collision_static;
                break;
            default:
                info.kind = AccidentInfo::Kind::collision_vehicle;
        }
        info.timestep = tick_;
        info.involved = {"ego", a.spec->id};
        info.location = (ego_.position + a.state.position) * 0.5;
        accident_ = info;
        return;
    }

    // 2) red light: ego front crosses the stop line while the phase is red
    for (std::size_t i = 0; i < scenario_->lights.size(); ++i) {
        const TrafficLightState& light = scenario_->lights[i];
        const Lane& lane = lanes_->lane(light.anchor_lane);
        if (!lane.stop_line_s) continue;
        const PolylineProjection proj = project_to_polyline(lane.centerline, ego_.position);
        if (std::abs(proj.lateral) > lane.width / 2.0 + 0.25) {
            prev_front_s_[i] = -1e18;
            continue;
        }
        const double front_s = proj.s + ego_.half_extents.x;
        const double prev = prev_front_s_[i];
        prev_front_s_[i] = front_s;
        if (prev <= -1e17) continue;  // no reference from last tick
        if (prev < *lane.stop_line_s && front_s >= *lane.stop_line_s &&
            light.phase_at(time_) == LightPhase::red && !accident_) {
            AccidentInfo info;
            info.kind = AccidentInfo::Kind::red_light_violation;
            info.timestep = tick_;
            info.involved = {"ego"};
            info.location = lane.point_at(*lane.stop_line_s);
            accident_ = info;
        }
    }
    if (accident_) return;

    // 3) off road: ego center beyond lane boundary + 0.5 m margin
    PolylineProjection proj;
    const Lane* nearest = lanes_->nearest_lane(ego_.position, &proj);
    if (nearest && std::abs(proj.lateral) > nearest->width / 2.0 + 0.5) {
        AccidentInfo info;
        info.kind = AccidentInfo::Kind::off_road;
        info.timestep = tick_;
        info.involved = {"ego"};
        info.location = ego_.position;
        accident_ = info;
    }
}

}  // namespace dd::sim
