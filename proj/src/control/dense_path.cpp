#include "dualdrive/control/dense_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dd::control {

using sim::Lane;
using sim::LaneGraph;

Vec2 DensePath::position_at(double s) const {
    if (points.empty()) return {};
    if (s <= 0.0) return points.front().position;
    if (s >= points.back().s) return points.back().position;
    std::size_t lo = 0, hi = points.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (points[mid].s <= s ? lo : hi) = mid;
    }
    const double seg = points[hi].s - points[lo].s;
    const double t = seg > 0.0 ? (s - points[lo].s) / seg : 0.0;
    return points[lo].position + (points[hi].position - points[lo].position) * t;
}

Vec2 DensePath::tangent_at(double s) const {
    if (points.size() < 2) return {1.0, 0.0};
    std::size_t lo = 0, hi = points.size() - 1;
    if (s <= 0.0) {
        hi = 1;
    } else if (s >= points.back().s) {
        lo = points.size() - 2;
        hi = points.size() - 1;
    } else {
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (points[mid].s <= s ? lo : hi) = mid;
        }
    }
    return (points[hi].position - points[lo].position).normalized();
}

double DensePath::heading_at(double s) const {
    const Vec2 t = tangent_at(s);
    return std::atan2(t.y, t.x);
}

const PathPoint& DensePath::nearest_by_s(double s) const {
    if (points.empty()) throw std::runtime_error("empty dense path");
    std::size_t lo = 0, hi = points.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (points[mid].s <= s ? lo : hi) = mid;
    }
    return (s - points[lo].s <= points[hi].s - s) ? points[lo] : points[hi];
}

namespace {

// Piecewise reference built by walking lane centerlines between consecutive
// waypoints, blending laterally when the waypoints sit on different lanes.
std::vector<std::pair<Vec2, int>> trace_between(const LaneGraph& lanes, const Vec2& from,
                                                const Vec2& to) {
    PolylineProjection pa, pb;
    const Lane* la = lanes.nearest_lane(from, &pa);
    const Lane* lb = lanes.nearest_lane(to, &pb);
    if (!la || !lb) throw std::runtime_error("densify: waypoint off all lanes");

    std::vector<std::pair<Vec2, int>> pts;
    const double step = 0.25;  // fine raw sampling; resampled to 1 m later
    if (la->id == lb->id || std::find(la->successors.begin(), la->successors.end(), lb->id) !=
                                la->successors.end()) {
        // Walk la from pa.s, continuing onto successors until reaching lb at pb.s.
        const Lane* lane = la;
        double s = pa.s;
        double guard = 0.0;
        while (true) {
            const double s_end = (lane->id == lb->id) ? pb.s : lane->length();
            for (; s < s_end; s += step) {
                pts.emplace_back(lane->point_at(s), lane->id);
            }
            if (lane->id == lb->id) break;
            if (lane->successors.empty()) break;
            lane = &lanes.lane(lane->successors.front());
            s = 0.0;
            guard += 1.0;
            if (guard > 64) throw std::runtime_error("densify: successor chain too long");
        }
        pts.emplace_back(lb->point_at(pb.s), lb->id);
    } else {
        // Lane transition: ramp laterally from la's centerline to lb's along
        // the arc between the two projections on the target lane.
        const PolylineProjection start_on_b = project_to_polyline(lb->centerline, from);
        const double s0 = start_on_b.s, s1 = pb.s;
        const double span = std::max(1.0, s1 - s0);
        const double d0 = start_on_b.lateral;
        for (double u = 0.0; u < span; u += step) {
            const double s = s0 + u;
            const double blend = 1.0 - u / span;  // 1 at start, 0 at end
            const Vec2 base = lb->point_at(s);
            const Vec2 normal = lb->tangent_at(s).perp();
            const int lane_id = blend > 0.5 ? la->id : lb->id;
            pts.emplace_back(base + normal * (d0 * blend), lane_id);
        }
        pts.emplace_back(lb->point_at(pb.s), lb->id);
    }
    return pts;
}

}  // namespace

DensePath densify(const std::vector<Vec2>& waypoints, const LaneGraph& lanes) {
    if (waypoints.size() < 2) throw std::runtime_error("densify: need at least 2 waypoints");
    for (const Vec2& w : waypoints) {
        PolylineProjection proj;
        const Lane* lane = lanes.nearest_lane(w, &proj);
        if (!lane || std::abs(proj.lateral) > lane->width / 2.0 + 1e-6) {
            throw std::runtime_error("densify: waypoint off all lanes");
        }
    }

    // Raw fine trace through all waypoints.
    std::vector<std::pair<Vec2, int>> raw;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        auto part = trace_between(lanes, waypoints[i], waypoints[i + 1]);
        if (!raw.empty() && !part.empty() &&
            (raw.back().first - part.front().first).norm() < 1e-6) {
            part.erase(part.begin());
        }
        raw.insert(raw.end(), part.begin(), part.end());
    }
    if (raw.size() < 2) throw std::runtime_error("densify: degenerate route");

    std::vector<Vec2> raw_pts;
    raw_pts.reserve(raw.size());
    for (const auto& [p, lane] : raw) raw_pts.push_back(p);
    const std::vector<double> raw_arc = cumulative_arclength(raw_pts);
    const double total = raw_arc.back();
    if (total <= 0.0) throw std::runtime_error("densify: zero-length route");

    // Resample to equal spacing: L/round(L) per segment keeps spacing in
    // [0.5, 1.5] m and makes a 10 m straight produce exactly 11 points.
    const int segments = std::max<int>(1, static_cast<int>(std::llround(total)));
    const double spacing = total / segments;

    DensePath path;
    path.points.reserve(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        const double s = std::min(total, i * spacing);
        PathPoint pt;
        pt.position = polyline_point_at(raw_pts, raw_arc, s);
        pt.s = i * spacing;
        // lane metadata from the nearest raw sample
        const auto it = std::upper_bound(raw_arc.begin(), raw_arc.end(), s);
        std::size_t k = it == raw_arc.begin() ? 0 : static_cast<std::size_t>(it - raw_arc.begin()) - 1;
        pt.lane_id = raw[k].second;
        if (const Lane* lane = lanes.find_lane(pt.lane_id)) {
            pt.left_available = lane->left.has_value();
            pt.right_available = lane->right.has_value();
        }
        path.points.push_back(pt);
    }
    return path;
}

FrenetState frenet_project(const DensePath& path, const WorldKinematics& k) {
    std::vector<Vec2> pts;
    pts.reserve(path.points.size());
    for (const PathPoint& p : path.points) pts.push_back(p.position);
    const PolylineProjection proj = project_to_polyline(pts, k.position);
    if (std::abs(proj.lateral) > 7.0) {
        throw std::runtime_error("frenet_project: pose farther than 7 m from path");
    }
    const Vec2 tangent = path.tangent_at(proj.s);
    const double path_heading = std::atan2(tangent.y, tangent.x);
    const double dh = wrap_angle(k.heading - path_heading);

    FrenetState f;
    f.s = proj.s;
    f.d = proj.lateral;
    f.s_dot = k.speed * std::cos(dh);
    f.d_dot = k.speed * std::sin(dh);
    f.s_ddot = k.accel * std::cos(dh);
    f.d_ddot = k.accel * std::sin(dh);
    return f;
}

WorldKinematics frenet_to_world(const DensePath& path, const FrenetState& f) {
    const Vec2 base = path.position_at(f.s);
    const Vec2 tangent = path.tangent_at(f.s);
    const double path_heading = std::atan2(tangent.y, tangent.x);

    WorldKinematics k;
    k.position = base + tangent.perp() * f.d;
    k.speed = std::hypot(f.s_dot, f.d_dot);
    k.heading = (k.speed > 1e-9) ? wrap_angle(path_heading + std::atan2(f.d_dot, f.s_dot))
                                 : path_heading;
    k.accel = f.s_ddot * std::cos(k.heading - path_heading) +
              f.d_ddot * std::sin(k.heading - path_heading);
    return k;
}

}  // namespace dd::control
