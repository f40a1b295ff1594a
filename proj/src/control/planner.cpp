#include "dualdrive/control/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dd::control {

using agent::MetaAction;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TargetState longitudinal_target(double a_target, const FrenetState& ego, double T) {
    TargetState t;
    const double v_end = ego.s_dot + a_target * T;
    if (v_end < 0.0 && a_target < 0.0) {
        // Comes to rest before the horizon; advance only to the stop point.
        const double t_stop = -ego.s_dot / a_target;
        t.s = ego.s + ego.s_dot * t_stop + 0.5 * a_target * t_stop * t_stop;
        t.s_dot = 0.0;
    } else {
        t.s = ego.s + ego.s_dot * T + 0.5 * a_target * T * T;
        t.s_dot = std::max(0.0, v_end);
    }
    t.s_ddot = 0.0;
    t.d = 0.0;
    return t;
}

}  // namespace

std::vector<TargetState> target_state(MetaAction meta, const FrenetState& ego,
                                      const DensePath& path, double lane_width,
                                      const PlannerConfig& cfg) {
    const double T = cfg.horizon;
    std::vector<TargetState> out;
    switch (meta) {
        case MetaAction::AC: {
            const double a = std::clamp(ego.s_ddot + cfg.accel_delta, -cfg.max_accel, cfg.max_accel);
            out.push_back(longitudinal_target(a, ego, T));
            break;
        }
        case MetaAction::DC: {
            const double a = std::clamp(ego.s_ddot - cfg.accel_delta, -cfg.comfort_decel, cfg.max_accel);
            out.push_back(longitudinal_target(a, ego, T));
            break;
        }
        case MetaAction::STOP: {
            out.push_back(longitudinal_target(-cfg.comfort_decel, ego, T));
            out.back().s_dot = 0.0;
            break;
        }
        case MetaAction::IDLE: {
            TargetState t;
            t.s = ego.s + ego.s_dot * T;
            t.s_dot = ego.s_dot;
            t.d = 0.0;
            out.push_back(t);
            break;
        }
        case MetaAction::LCL:
        case MetaAction::LCR: {
            const PathPoint& here = path.nearest_by_s(ego.s);
            const bool available = meta == MetaAction::LCL ? here.left_available
                                                           : here.right_available;
            if (!available) {
                throw std::runtime_error(std::string("no adjacent lane for ") +
                                         agent::to_string(meta) + " at s=" +
                                         std::to_string(ego.s));
            }
            const double d_target = meta == MetaAction::LCL ? lane_width : -lane_width;
            const double nominal = std::max(1.0, ego.s_dot * T);
            for (double advance_scale : {0.8, 1.0, 1.2}) {
                for (double speed_scale : {0.9, 1.0, 1.1}) {
                    TargetState t;
                    t.s = ego.s + nominal * advance_scale;
                    t.s_dot = ego.s_dot * speed_scale;
                    t.d = d_target;
                    out.push_back(t);
                }
            }
            break;
        }
    }
    return out;
}

double trajectory_cost(const Trajectory& traj, double target_speed,
                       const std::vector<ObstaclePrediction>& obstacles,
                       const Vec2& ego_half_extents, const PlannerConfig& cfg) {
    if (traj.samples.empty()) return kInf;
    const double dt = cfg.sample_dt;

    double jerk_sq = 0.0, accel_sq = 0.0, barrier = 0.0;
    // Hard overlap check runs at double density (with inflation) so nothing
    // slips between cost samples.
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const TrajectorySample& smp = traj.samples[i];
        jerk_sq += smp.jerk * smp.jerk * dt;
        accel_sq += smp.accel * smp.accel * dt;

        OrientedBox ego_box{smp.position, smp.heading,
                            ego_half_extents.x + cfg.collision_margin,
                            ego_half_extents.y + cfg.collision_margin};
        for (const ObstaclePrediction& ob : obstacles) {
            const double dist = box_distance(ego_box, ob.box_at(smp.t));
            if (dist <= 0.0) return kInf;
            if (dist < cfg.clearance) {
                const double gap = cfg.clearance - dist;
                barrier += cfg.weight_clearance * gap * gap * dt;
            }
        }
        if (i + 1 < traj.samples.size()) {
            const TrajectorySample& next = traj.samples[i + 1];
            const double tm = 0.5 * (smp.t + next.t);
            OrientedBox mid_box{(smp.position + next.position) * 0.5, smp.heading,
                                ego_half_extents.x + cfg.collision_margin,
                                ego_half_extents.y + cfg.collision_margin};
            for (const ObstaclePrediction& ob : obstacles) {
                if (boxes_overlap(mid_box, ob.box_at(tm))) return kInf;
            }
        }
    }

    const TrajectorySample& last = traj.samples.back();
    const double dv = last.speed - target_speed;
    return cfg.weight_jerk * jerk_sq + cfg.weight_accel * accel_sq +
           cfg.weight_speed * dv * dv + cfg.weight_lateral * last.d * last.d + barrier;
}

namespace {

Trajectory sample_candidate(const QuinticPoly& lon, const QuinticPoly& lat,
                            const DensePath& path, const PlannerConfig& cfg) {
    Trajectory traj;
    const int n = static_cast<int>(std::lround(cfg.horizon / cfg.sample_dt));
    traj.samples.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = i * cfg.sample_dt;
        FrenetState f;
        f.s = lon.value(t);
        f.s_dot = std::max(0.0, lon.d1(t));
        f.s_ddot = lon.d2(t);
        f.d = lat.value(t);
        f.d_dot = lat.d1(t);
        f.d_ddot = lat.d2(t);
        const WorldKinematics k = frenet_to_world(path, f);

        TrajectorySample smp;
        smp.t = t;
        smp.position = k.position;
        smp.heading = k.heading;
        smp.speed = k.speed;
        smp.accel = std::hypot(f.s_ddot, f.d_ddot) * (f.s_ddot < 0.0 ? -1.0 : 1.0);
        smp.jerk = std::hypot(lon.d3(t), lat.d3(t));
        smp.s = f.s;
        smp.d = f.d;
        traj.samples.push_back(smp);
    }
    return traj;
}

Trajectory emergency_stop(const FrenetState& ego, const DensePath& path,
                          const PlannerConfig& cfg) {
    Trajectory traj;
    traj.emergency = true;
    traj.candidate_id = -1;
    traj.cost = kInf;
    const int n = static_cast<int>(std::lround(cfg.horizon / cfg.sample_dt));
    traj.samples.reserve(n + 1);
    const double a = cfg.emergency_decel;
    const double t_stop = ego.s_dot / a;
    for (int i = 0; i <= n; ++i) {
        const double t = i * cfg.sample_dt;
        FrenetState f;
        if (t < t_stop) {
            f.s = ego.s + ego.s_dot * t - 0.5 * a * t * t;
            f.s_dot = ego.s_dot - a * t;
            f.s_ddot = -a;
        } else {
            f.s = ego.s + 0.5 * ego.s_dot * t_stop;
            f.s_dot = 0.0;
            f.s_ddot = 0.0;
        }
        f.d = ego.d;  // hold lateral offset
        const WorldKinematics k = frenet_to_world(path, f);
        TrajectorySample smp;
        smp.t = t;
        smp.position = k.position;
        smp.heading = k.heading;
        smp.speed = f.s_dot;
        smp.accel = f.s_ddot;
        smp.jerk = 0.0;
        smp.s = f.s;
        smp.d = f.d;
        traj.samples.push_back(smp);
    }
    return traj;
}

}  // namespace

Trajectory plan(MetaAction meta, const FrenetState& ego, const DensePath& path,
                double lane_width, double target_speed,
                const std::vector<ObstaclePrediction>& obstacles,
                const Vec2& ego_half_extents, const PlannerConfig& cfg,
                std::vector<CandidateDebug>* debug) {
    const std::vector<TargetState> targets = target_state(meta, ego, path, lane_width, cfg);

    Trajectory best;
    double best_cost = kInf;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const TargetState& tgt = targets[i];
        const QuinticPoly lon = quintic_solve(ego.s, ego.s_dot, ego.s_ddot,
                                              tgt.s, tgt.s_dot, tgt.s_ddot, cfg.horizon);
        const QuinticPoly lat = quintic_solve(ego.d, ego.d_dot, ego.d_ddot,
                                              tgt.d, tgt.d_dot, tgt.d_ddot, cfg.horizon);
        Trajectory cand = sample_candidate(lon, lat, path, cfg);
        cand.candidate_id = static_cast<int>(i);
        cand.cost = trajectory_cost(cand, target_speed, obstacles, ego_half_extents, cfg);
        if (debug) {
            debug->push_back({cand.candidate_id, tgt, cand.cost, !std::isfinite(cand.cost)});
        }
        if (cand.cost < best_cost) {  // strict: ties keep the lowest index
            best_cost = cand.cost;
            best = std::move(cand);
        }
    }
    if (!std::isfinite(best_cost)) {
        return emergency_stop(ego, path, cfg);
    }
    return best;
}

}  // namespace dd::control
