#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "dualdrive/control/planner.hpp"
#include "dualdrive/sim/vehicle.hpp"

namespace dd::control {

struct PidGains {
    double kp = 0.0, ki = 0.0, kd = 0.0;
};

// longitudinal / lateral gains with 10-frame error buffers
inline constexpr PidGains kLongitudinalGains{1.95, 0.05, 0.2};
inline constexpr PidGains kLateralGains{1.0, 0.05, 0.0};

// PID with the integral taken over a ring buffer of the last 10 samples.
class PidState {
public:
    explicit PidState(PidGains gains) : gains_(gains) {}

    double step(double error, double dt);
    void reset();
    const PidGains& gains() const { return gains_; }
    std::size_t buffer_size() const { return count_; }

private:
    static constexpr std::size_t kBufferLen = 10;
    PidGains gains_;
    std::array<double, kBufferLen> errors_{};  // error * dt per sample
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    double prev_error_ = 0.0;
    bool has_prev_ = false;
};

// Index into the planned sample sequence: far ahead at low speed, close at
// high speed.
int lookahead_index(double speed, double gain = 20.0, double min_speed = 1.0,
                    int min_index = 4, int max_index = 40);

// (target speed, target waypoint) from the planned trajectory.
std::pair<double, Vec2> lookahead_select(const Trajectory& traj, double speed);

// Tracks a planned trajectory with independent speed and heading PIDs.
class TrajectoryTracker {
public:
    TrajectoryTracker() : longitudinal_(kLongitudinalGains), lateral_(kLateralGains) {}

    void set_trajectory(const Trajectory& traj) {
        trajectory_ = traj;
        age_ticks_ = 0;
    }
    bool has_trajectory() const { return !trajectory_.samples.empty(); }
    const Trajectory& trajectory() const { return trajectory_; }

    sim::Control control_step(const sim::VehicleState& ego, double dt);

private:
    Trajectory trajectory_;
    int age_ticks_ = 0;
    PidState longitudinal_;
    PidState lateral_;
};

}  // namespace dd::control
