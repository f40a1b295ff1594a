#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualdrive/agent/meta_action.hpp"
#include "dualdrive/control/dense_path.hpp"
#include "dualdrive/control/quintic.hpp"
#include "dualdrive/geometry.hpp"

namespace dd::control {

struct PlannerConfig {
    double horizon = 5.0;        // s
    double sample_dt = 0.05;     // s
    double accel_delta = 1.0;    // AC/DC step, m/s^2
    double max_accel = 3.0;      // m/s^2
    double comfort_decel = 3.0;  // m/s^2
    double emergency_decel = 8.0;
    double weight_jerk = 0.1;
    double weight_accel = 0.1;
    double weight_speed = 1.0;
    double weight_lateral = 0.5;
    double weight_clearance = 1.0;  // soft barrier inside 2 m
    double clearance = 2.0;
    double collision_margin = 0.1;  // footprint inflation for the hard check
};

struct TrajectorySample {
    double t = 0.0;
    Vec2 position;
    double heading = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double jerk = 0.0;
    double s = 0.0;
    double d = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // horizon/dt + 1 entries
    int candidate_id = -1;
    double cost = 0.0;
    bool emergency = false;  // fallback when every candidate was infeasible
};

// Constant-velocity prediction of one obstacle over the horizon.
struct ObstaclePrediction {
    std::string id;
    Vec2 position;
    Vec2 velocity;
    double heading = 0.0;
    Vec2 half_extents{2.25, 0.95};

    OrientedBox box_at(double t) const {
        return {position + velocity * t, heading, half_extents.x, half_extents.y};
    }
};

struct TargetState {
    double s = 0.0, s_dot = 0.0, s_ddot = 0.0;
    double d = 0.0, d_dot = 0.0, d_ddot = 0.0;
};

// Meta-action specific end states at the horizon. LCL/LCR sample a 3x3 grid
// over advance and speed in the adjacent lane; throws when that lane is
// unavailable at the ego position.
std::vector<TargetState> target_state(agent::MetaAction meta, const FrenetState& ego,
                                      const DensePath& path, double lane_width,
                                      const PlannerConfig& cfg = {});

struct CandidateDebug {
    int id = -1;
    TargetState target;
    double cost = 0.0;
    bool colliding = false;
};

// Integrated cost of a sampled trajectory; +inf when the swept footprint
// overlaps any prediction.
double trajectory_cost(const Trajectory& traj, double target_speed,
                       const std::vector<ObstaclePrediction>& obstacles,
                       const Vec2& ego_half_extents, const PlannerConfig& cfg = {});

Trajectory plan(agent::MetaAction meta, const FrenetState& ego, const DensePath& path,
                double lane_width, double target_speed,
                const std::vector<ObstaclePrediction>& obstacles,
                const Vec2& ego_half_extents, const PlannerConfig& cfg = {},
                std::vector<CandidateDebug>* debug = nullptr);

}  // namespace dd::control
