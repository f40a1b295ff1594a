#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualdrive/sim/scenario.hpp"
#include "dualdrive/sim/vehicle.hpp"

namespace dd::sim {

struct AccidentInfo {
    enum class Kind {
        collision_vehicle,
        collision_pedestrian,
        collision_static,
        off_road,
        red_light_violation
    };
    Kind kind = Kind::collision_vehicle;
    long timestep = 0;
    std::vector<std::string> involved;  // "ego" plus the other object id, if any
    Vec2 location;
};

std::string to_string(AccidentInfo::Kind k);
AccidentInfo::Kind accident_kind_from_string(const std::string& s);

struct ObjectState {
    std::string id;
    AgentKind kind = AgentKind::vehicle;
    Vec2 position;
    double heading = 0.0;
    double speed = 0.0;
    Vec2 velocity;
    Vec2 half_extents{2.25, 0.95};
    int lane_id = -1;
    double lane_s = 0.0;

    OrientedBox footprint() const {
        return {position, heading, half_extents.x, half_extents.y};
    }
};

struct LightObservation {
    int lane = 0;
    LightPhase phase = LightPhase::green;
    double stop_line_s = 0.0;
    Vec2 position;  // stop line point on the centerline
};

// Immutable view of the world at one tick; safe to copy and share.
struct WorldSnapshot {
    long tick = 0;
    double time = 0.0;
    ObjectState ego;
    double ego_target_speed = 0.0;
    std::vector<ObjectState> objects;
    std::vector<LightObservation> lights;
    std::shared_ptr<const LaneGraph> lanes;
};

// Instantaneous completed fraction of a dense route path for a given position.
double route_progress(const std::vector<Vec2>& dense_path, const Vec2& position);

// Keeps the max-so-far fraction over an episode.
class RouteProgressTracker {
public:
    explicit RouteProgressTracker(std::vector<Vec2> dense_path);
    double update(const Vec2& position);
    double current() const { return best_; }

private:
    std::vector<Vec2> path_;
    double best_ = 0.0;
};

// Deterministic tick-driven traffic world. Scripted agents follow lane
// centerlines (or walker polylines) with commanded speeds and never react
// to the ego.
class World {
public:
    explicit World(const Scenario& scenario, double physics_hz = 20.0);

    void tick(const Control& ego_control);

    const VehicleState& ego() const { return ego_; }
    double ego_target_speed() const { return scenario_->ego.target_speed; }
    double time() const { return time_; }
    long tick_index() const { return tick_; }
    double dt() const { return dt_; }
    const Scenario& scenario() const { return *scenario_; }
    std::shared_ptr<const LaneGraph> lane_graph() const { return lanes_; }
    int control_clamp_count() const { return clamp_count_; }

    LightPhase light_phase(int lane) const;
    std::vector<ObjectState> object_states() const;
    WorldSnapshot snapshot() const;

    // First infraction found this tick (collision > red light > off road),
    // recomputed once per tick; repeated reads observe the same value.
    const std::optional<AccidentInfo>& current_accident() const { return accident_; }

private:
    struct AgentRuntime {
        const AgentSpec* spec = nullptr;
        int lane = 0;
        double s = 0.0;
        double speed = 0.0;
        double target_speed = 0.0;
        double accel_mag = 3.0;
        std::size_t next_cmd = 0;
        double lateral = 0.0;       // offset from current lane, decays after a lane switch
        double lateral_rate = 0.0;  // m/s toward zero
        double path_s = 0.0;        // walkers
        ObjectState state;
    };

    void advance_agent(AgentRuntime& agent);
    void refresh_agent_state(AgentRuntime& agent);
    void detect_infractions();

    std::shared_ptr<const Scenario> scenario_;
    std::shared_ptr<const LaneGraph> lanes_;
    double dt_;
    double time_ = 0.0;
    long tick_ = 0;
    VehicleState ego_;
    std::vector<AgentRuntime> agents_;
    std::optional<AccidentInfo> accident_;
    std::vector<double> prev_front_s_;  // per light, ego front progress on anchor lane
    int clamp_count_ = 0;
};

inline std::optional<AccidentInfo> detect_accident(const World& world) {
    return world.current_accident();
}

}  // namespace dd::sim
