#include "dualdrive/control/pid.hpp"

#include <algorithm>
#include <cmath>

namespace dd::control {

double PidState::step(double error, double dt) {
    errors_[head_] = error * dt;
    head_ = (head_ + 1) % kBufferLen;
    count_ = std::min(count_ + 1, kBufferLen);

    double integral = 0.0;
    for (std::size_t i = 0; i < count_; ++i) integral += errors_[i];

    const double derivative = has_prev_ ? (error - prev_error_) / dt : 0.0;
    prev_error_ = error;
    has_prev_ = true;

    return gains_.kp * error + gains_.ki * integral + gains_.kd * derivative;
}

void PidState::reset() {
    errors_.fill(0.0);
    head_ = 0;
    count_ = 0;
    prev_error_ = 0.0;
    has_prev_ = false;
}

int lookahead_index(double speed, double gain, double min_speed, int min_index, int max_index) {
    const double v = std::max(speed, min_speed);
    const int i = static_cast<int>(std::lround(gain / v));
    return std::clamp(i, min_index, max_index);
}

std::pair<double, Vec2> lookahead_select(const Trajectory& traj, double speed) {
    const int last = static_cast<int>(traj.samples.size()) - 1;
    const int i = std::min(lookahead_index(speed), last);
    const TrajectorySample& smp = traj.samples[static_cast<std::size_t>(std::max(i, 0))];
    return {smp.speed, smp.position};
}

namespace {

sim::Control control_from_outputs(double longitudinal, double lateral) {
    sim::Control c;
    if (longitudinal >= 0.0) {
        c.throttle = std::clamp(longitudinal, 0.0, 1.0);
    } else {
        c.brake = std::clamp(-longitudinal, 0.0, 1.0);
    }
    c.steer = std::clamp(lateral, -1.0, 1.0);
    return c;
}

}  // namespace

sim::Control TrajectoryTracker::control_step(const sim::VehicleState& ego, double dt) {
    if (trajectory_.samples.empty()) return {};

    // Shift the lookahead by plan age so the reference keeps moving between
    // replans.
    const int last = static_cast<int>(trajectory_.samples.size()) - 1;
    const int idx = std::min(lookahead_index(ego.speed) + age_ticks_, last);
    const TrajectorySample& ref = trajectory_.samples[static_cast<std::size_t>(idx)];
    ++age_ticks_;

    const double speed_error = ref.speed - ego.speed;
    const double lon_out = longitudinal_.step(speed_error, dt);

    const Vec2 to_ref = ref.position - ego.position;
    double heading_error = 0.0;
    if (to_ref.norm() > 0.3) {
        heading_error = wrap_angle(std::atan2(to_ref.y, to_ref.x) - ego.heading);
    }
    const double lat_out = lateral_.step(heading_error, dt);

    return control_from_outputs(lon_out, lat_out);
}

}  // namespace dd::control
