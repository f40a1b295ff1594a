#pragma once

#include "dualdrive/geometry.hpp"

namespace dd::sim {

// Actuation limits shared by the plant and the controllers.
struct VehicleLimits {
    double max_steer_rad = 0.6;     // |steering| bound
    double max_accel = 3.0;         // throttle 1.0 -> m/s^2
    double max_brake_decel = 8.0;   // brake 1.0 -> m/s^2
};

struct VehicleState {
    Vec2 position;
    double heading = 0.0;      // rad
    double speed = 0.0;        // m/s, never negative
    double acceleration = 0.0; // realized longitudinal accel, m/s^2
    double steering = 0.0;     // rad, within +-max_steer_rad
    double wheelbase = 2.8;    // m
    Vec2 half_extents{2.25, 0.95};

    OrientedBox footprint() const {
        return {position, heading, half_extents.x, half_extents.y};
    }
    Vec2 velocity() const { return Vec2{std::cos(heading), std::sin(heading)} * speed; }
};

struct Control {
    double throttle = 0.0;  // [0, 1]
    double brake = 0.0;     // [0, 1]
    double steer = 0.0;     // [-1, 1], scaled by max_steer_rad
};

// Kinematic bicycle step. Out-of-range controls are clamped; when a clamp
// fires and clamp_count is non-null it is incremented so callers can log it.
VehicleState step_vehicle(const VehicleState& state, const Control& control, double dt,
                          const VehicleLimits& limits = {}, int* clamp_count = nullptr);

}  // namespace dd::sim
