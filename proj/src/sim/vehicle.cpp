#include "dualdrive/sim/vehicle.hpp"

#include <algorithm>

namespace dd::sim {

namespace {

double clamped(double v, double lo, double hi, int* count) {
    const double c = std::clamp(v, lo, hi);
    if (c != v && count) ++(*count);
    return c;
}

}  // namespace

VehicleState step_vehicle(const VehicleState& state, const Control& control, double dt,
                          const VehicleLimits& limits, int* clamp_count) {
    const double throttle = clamped(control.throttle, 0.0, 1.0, clamp_count);
    const double brake = clamped(control.brake, 0.0, 1.0, clamp_count);
    const double steer = clamped(control.steer, -1.0, 1.0, clamp_count);

    const double steer_rad = steer * limits.max_steer_rad;
    const double accel = throttle * limits.max_accel - brake * limits.max_brake_decel;

    // Pose advances with the pre-update speed and heading (forward Euler).
    VehicleState next = state;
    next.position.x = state.position.x + state.speed * std::cos(state.heading) * dt;
    next.position.y = state.position.y + state.speed * std::sin(state.heading) * dt;
    const double heading_rate = state.speed * std::tan(steer_rad) / state.wheelbase;
    next.heading = wrap_angle(state.heading + heading_rate * dt);
    next.speed = std::max(0.0, state.speed + accel * dt);
    next.acceleration = (next.speed - state.speed) / dt;
    next.steering = steer_rad;
    return next;
}

}  // namespace dd::sim
