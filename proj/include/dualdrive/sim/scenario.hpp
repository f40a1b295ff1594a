#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualdrive/sim/lane_graph.hpp"
#include "dualdrive/sim/vehicle.hpp"

namespace dd::sim {

enum class LightPhase { red, yellow, green };

std::string to_string(LightPhase p);
LightPhase light_phase_from_string(const std::string& s);

struct TrafficLightState {
    int anchor_lane = 0;
    std::vector<std::pair<LightPhase, double>> schedule;  // (phase, duration s)
    double offset = 0.0;  // schedule shift at t = 0

    LightPhase phase_at(double t) const;
    double cycle_length() const;
};

enum class AgentKind { vehicle, cyclist, pedestrian, static_obstacle };

std::string to_string(AgentKind k);
AgentKind agent_kind_from_string(const std::string& s);

// One timed command in a scripted agent's behavior.
struct ScriptCommand {
    double t = 0.0;
    std::optional<double> speed;   // new commanded speed, m/s
    std::optional<double> accel;   // magnitude used to reach it, m/s^2
    std::optional<int> lane;       // switch reference lane
};

struct AgentSpec {
    std::string id;
    AgentKind kind = AgentKind::vehicle;
    int lane = 0;
    double s = 0.0;
    double speed = 0.0;
    Vec2 half_extents{2.25, 0.95};
    std::vector<Vec2> path;  // pedestrians walk this polyline instead of a lane
    std::vector<ScriptCommand> script;
};

struct EgoSpec {
    int lane = 0;
    double s = 0.0;
    double speed = 0.0;
    double target_speed = 8.0;
    double wheelbase = 2.8;
    Vec2 half_extents{2.25, 0.95};
};

struct EpisodeLimits {
    double max_sim_time = 120.0;
    std::optional<double> max_wall_time;  // seconds, unlimited when absent
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    unsigned long seed = 0;
    LaneGraph lane_graph;
    EgoSpec ego;
    std::vector<Vec2> route;  // sparse route waypoints, all on lanes
    std::vector<AgentSpec> agents;
    std::vector<TrafficLightState> lights;
    EpisodeLimits limits;
};

// Raised with a path to the offending field, e.g. "agents[1].script[0].t".
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

}  // namespace dd::sim
