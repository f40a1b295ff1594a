#include "dualdrive/sim/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace dd::sim {

using nlohmann::json;

std::string to_string(LightPhase p) {
    switch (p) {
        case LightPhase::red: return "red";
        case LightPhase::yellow: return "yellow";
        case LightPhase::green: return "green";
    }
    return "red";
}

LightPhase light_phase_from_string(const std::string& s) {
    if (s == "red") return LightPhase::red;
    if (s == "yellow") return LightPhase::yellow;
    if (s == "green") return LightPhase::green;
    throw ScenarioError("unknown light phase '" + s + "'");
}

LightPhase TrafficLightState::phase_at(double t) const {
    if (schedule.empty()) return LightPhase::green;
    const double cycle = cycle_length();
    double u = std::fmod(t + offset, cycle);
    if (u < 0.0) u += cycle;
    for (const auto& [phase, dur] : schedule) {
        if (u < dur) return phase;
        u -= dur;
    }
    return schedule.back().first;
}

double TrafficLightState::cycle_length() const {
    double total = 0.0;
    for (const auto& [phase, dur] : schedule) total += dur;
    return total;
}

std::string to_string(AgentKind k) {
    switch (k) {
        case AgentKind::vehicle: return "vehicle";
        case AgentKind::cyclist: return "cyclist";
        case AgentKind::pedestrian: return "pedestrian";
        case AgentKind::static_obstacle: return "static";
    }
    return "vehicle";
}

AgentKind agent_kind_from_string(const std::string& s) {
    if (s == "vehicle") return AgentKind::vehicle;
    if (s == "cyclist") return AgentKind::cyclist;
    if (s == "pedestrian") return AgentKind::pedestrian;
    if (s == "static") return AgentKind::static_obstacle;
    throw ScenarioError("unknown agent kind '" + s + "'");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ScenarioError(path + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) fail(path + "." + key, "missing required field");
    return j.at(key);
}

std::vector<Vec2> parse_points(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of [x, y] points");
    std::vector<Vec2> pts;
    pts.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& p = j[i];
        if (!p.is_array() || p.size() != 2)
            fail(path + "[" + std::to_string(i) + "]", "expected [x, y]");
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return pts;
}

}  // namespace

Scenario load_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("document is not valid JSON: ") + e.what());
    }

    Scenario sc;
    sc.schema_version = require(j, "schema_version", "$").get<int>();
    if (sc.schema_version != 1)
        fail("$.schema_version", "unsupported version " + std::to_string(sc.schema_version));
    sc.name = j.value("name", std::string("unnamed"));
    sc.seed = j.value("seed", 0ul);

    const json& lanes = require(j, "lanes", "$");
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        const std::string path = "$.lanes[" + std::to_string(i) + "]";
        const json& lj = lanes[i];
        Lane lane;
        lane.id = require(lj, "id", path).get<int>();
        lane.width = lj.value("width", 3.5);
        lane.centerline = parse_points(require(lj, "centerline", path), path + ".centerline");
        if (lj.contains("successors")) lane.successors = lj["successors"].get<std::vector<int>>();
        if (lj.contains("left") && !lj["left"].is_null()) lane.left = lj["left"].get<int>();
        if (lj.contains("right") && !lj["right"].is_null()) lane.right = lj["right"].get<int>();
        if (lj.contains("stop_line_s")) lane.stop_line_s = lj["stop_line_s"].get<double>();
        if (lj.contains("stop_sign_s")) lane.stop_sign_s = lj["stop_sign_s"].get<double>();
        sc.lane_graph.add_lane(std::move(lane));
    }
    try {
        sc.lane_graph.validate();
    } catch (const std::exception& e) {
        fail("$.lanes", e.what());
    }

    if (j.contains("traffic_lights")) {
        const json& lights = j["traffic_lights"];
        for (std::size_t i = 0; i < lights.size(); ++i) {
            const std::string path = "$.traffic_lights[" + std::to_string(i) + "]";
            const json& tj = lights[i];
            TrafficLightState light;
            light.anchor_lane = require(tj, "lane", path).get<int>();
            if (sc.lane_graph.find_lane(light.anchor_lane) == nullptr)
                fail(path + ".lane", "no such lane " + std::to_string(light.anchor_lane));
            light.offset = tj.value("offset", 0.0);
            const json& sched = require(tj, "schedule", path);
            for (std::size_t k = 0; k < sched.size(); ++k) {
                const json& entry = sched[k];
                const std::string epath = path + ".schedule[" + std::to_string(k) + "]";
                if (!entry.is_array() || entry.size() != 2) fail(epath, "expected [phase, duration]");
                const double dur = entry[1].get<double>();
                if (!(dur > 0.0)) fail(epath, "duration must be > 0");
                light.schedule.emplace_back(light_phase_from_string(entry[0].get<std::string>()), dur);
            }
            if (light.schedule.empty()) fail(path + ".schedule", "must not be empty");
            sc.lights.push_back(std::move(light));
        }
    }

    const json& ego = require(j, "ego", "$");
    sc.ego.lane = require(ego, "lane", "$.ego").get<int>();
    if (sc.lane_graph.find_lane(sc.ego.lane) == nullptr)
        fail("$.ego.lane", "no such lane " + std::to_string(sc.ego.lane));
    sc.ego.s = ego.value("s", 0.0);
    sc.ego.speed = ego.value("speed", 0.0);
    sc.ego.target_speed = ego.value("target_speed", 8.0);
    sc.ego.wheelbase = ego.value("wheelbase", 2.8);
    if (!(sc.ego.wheelbase > 0.0)) fail("$.ego.wheelbase", "must be > 0");
    if (ego.contains("half_extents")) {
        const json& he = ego["half_extents"];
        sc.ego.half_extents = {he[0].get<double>(), he[1].get<double>()};
    }

    sc.route = parse_points(require(j, "route", "$"), "$.route");
    if (sc.route.size() < 2) fail("$.route", "needs at least 2 waypoints");
    for (std::size_t i = 0; i < sc.route.size(); ++i) {
        PolylineProjection proj;
        const Lane* lane = sc.lane_graph.nearest_lane(sc.route[i], &proj);
        if (!lane || std::abs(proj.lateral) > lane->width / 2.0 + 1e-6) {
            std::ostringstream os;
            os << "waypoint (" << sc.route[i].x << ", " << sc.route[i].y << ") lies off all lanes";
            fail("$.route[" + std::to_string(i) + "]", os.str());
        }
    }

    if (j.contains("agents")) {
        const json& agents = j["agents"];
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const std::string path = "$.agents[" + std::to_string(i) + "]";
            const json& aj = agents[i];
            AgentSpec a;
            a.id = aj.value("id", "agent" + std::to_string(i));
            a.kind = agent_kind_from_string(aj.value("kind", std::string("vehicle")));
            if (aj.contains("path")) {
                a.path = parse_points(aj["path"], path + ".path");
                if (a.path.size() < 2) fail(path + ".path", "needs at least 2 points");
            } else {
                a.lane = require(aj, "lane", path).get<int>();
                if (sc.lane_graph.find_lane(a.lane) == nullptr)
                    fail(path + ".lane", "no such lane " + std::to_string(a.lane));
            }
            a.s = aj.value("s", 0.0);
            a.speed = aj.value("speed", 0.0);
            if (a.speed < 0.0) fail(path + ".speed", "must be >= 0");
            if (aj.contains("half_extents")) {
                const json& he = aj["half_extents"];
                a.half_extents = {he[0].get<double>(), he[1].get<double>()};
            }
            if (aj.contains("script")) {
                const json& script = aj["script"];
                double prev_t = -1.0;
                for (std::size_t k = 0; k < script.size(); ++k) {
                    const std::string spath = path + ".script[" + std::to_string(k) + "]";
                    const json& cj = script[k];
                    ScriptCommand cmd;
                    cmd.t = require(cj, "t", spath).get<double>();
                    if (cmd.t < 0.0) fail(spath + ".t", "must be >= 0");
                    if (cmd.t < prev_t) fail(spath + ".t", "script times must be non-decreasing");
                    prev_t = cmd.t;
                    if (cj.contains("speed")) {
                        cmd.speed = cj["speed"].get<double>();
                        if (*cmd.speed < 0.0) fail(spath + ".speed", "must be >= 0");
                    }
                    if (cj.contains("accel")) {
                        cmd.accel = cj["accel"].get<double>();
                        if (!(*cmd.accel > 0.0)) fail(spath + ".accel", "must be > 0");
                    }
                    if (cj.contains("lane")) {
                        cmd.lane = cj["lane"].get<int>();
                        if (sc.lane_graph.find_lane(*cmd.lane) == nullptr)
                            fail(spath + ".lane", "no such lane " + std::to_string(*cmd.lane));
                    }
                    a.script.push_back(cmd);
                }
            }
            sc.agents.push_back(std::move(a));
        }
    }

    if (j.contains("limits")) {
        const json& lim = j["limits"];
        sc.limits.max_sim_time = lim.value("max_sim_time", 120.0);
        if (!(sc.limits.max_sim_time > 0.0)) fail("$.limits.max_sim_time", "must be > 0");
        if (lim.contains("max_wall_time"))
            sc.limits.max_wall_time = lim["max_wall_time"].get<double>();
    }

    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return load_scenario(ss.str());
}

}  // namespace dd::sim
