#pragma once

#include <vector>

#include "dualdrive/sim/lane_graph.hpp"

namespace dd::control {

struct PathPoint {
    Vec2 position;
    double s = 0.0;  // cumulative arc length
    int lane_id = -1;
    bool left_available = false;
    bool right_available = false;
};

// Reference path resampled to ~1 m spacing along lane centerlines.
// Consecutive spacing stays within [0.5, 1.5] m and s is strictly increasing.
struct DensePath {
    std::vector<PathPoint> points;

    double length() const { return points.empty() ? 0.0 : points.back().s; }
    Vec2 position_at(double s) const;
    Vec2 tangent_at(double s) const;
    double heading_at(double s) const;
    const PathPoint& nearest_by_s(double s) const;
};

struct FrenetState {
    double s = 0.0, s_dot = 0.0, s_ddot = 0.0;
    double d = 0.0, d_dot = 0.0, d_ddot = 0.0;  // left of path positive
};

// Interpolate waypoints along lane centerlines at 1 m nominal spacing,
// attaching adjacent-lane availability per point. Waypoints must all lie
// on lanes; fewer than two waypoints is an error.
DensePath densify(const std::vector<Vec2>& waypoints, const sim::LaneGraph& lanes);

struct WorldKinematics {
    Vec2 position;
    double heading = 0.0;
    double speed = 0.0;
    double accel = 0.0;
};

// Project a world pose (with speed/accel) into path coordinates. Throws when
// the pose is farther than two lane widths (7 m) from the path.
FrenetState frenet_project(const DensePath& path, const WorldKinematics& k);

WorldKinematics frenet_to_world(const DensePath& path, const FrenetState& f);

}  // namespace dd::control
