#include "dualdrive/geometry.hpp"

#include <algorithm>
#include <limits>

namespace dd {

std::array<Vec2, 4> OrientedBox::corners() const {
    const Vec2 fwd = Vec2{1.0, 0.0}.rotated(heading) * half_length;
    const Vec2 left = Vec2{0.0, 1.0}.rotated(heading) * half_width;
    return {center + fwd + left, center + fwd - left, center - fwd - left, center - fwd + left};
}

bool OrientedBox::contains(const Vec2& p) const {
    const Vec2 local = (p - center).rotated(-heading);
    return std::abs(local.x) <= half_length && std::abs(local.y) <= half_width;
}

namespace {

// Project corners of both boxes onto an axis and test interval overlap.
bool separated_on_axis(const Vec2& axis, const OrientedBox& a, const OrientedBox& b) {
    double amin = std::numeric_limits<double>::max(), amax = -amin;
    double bmin = amin, bmax = amax;
    for (const Vec2& c : a.corners()) {
        const double p = c.dot(axis);
        amin = std::min(amin, p);
        amax = std::max(amax, p);
    }
    for (const Vec2& c : b.corners()) {
        const double p = c.dot(axis);
        bmin = std::min(bmin, p);
        bmax = std::max(bmax, p);
    }
    return amax < bmin || bmax < amin;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
    const std::array<Vec2, 4> axes = {
        Vec2{1.0, 0.0}.rotated(a.heading), Vec2{0.0, 1.0}.rotated(a.heading),
        Vec2{1.0, 0.0}.rotated(b.heading), Vec2{0.0, 1.0}.rotated(b.heading)};
    for (const Vec2& axis : axes) {
        if (separated_on_axis(axis, a, b)) return false;
    }
    return true;
}

double box_distance(const OrientedBox& a, const OrientedBox& b) {
    if (boxes_overlap(a, b)) return 0.0;
    const auto ca = a.corners();
    const auto cb = b.corners();
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
            best = std::min(best, point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
        }
    }
    return best;
}

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

double polyline_length(const std::vector<Vec2>& pts) {
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
    return s;
}

std::vector<double> cumulative_arclength(const std::vector<Vec2>& pts) {
    std::vector<double> arc(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    return arc;
}

PolylineProjection project_to_polyline(const std::vector<Vec2>& pts, const Vec2& p) {
    PolylineProjection best;
    double best_dist = std::numeric_limits<double>::max();
    double s_base = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[i + 1];
        const Vec2 ab = b - a;
        const double len = ab.norm();
        if (len <= 0.0) continue;
        const double t = std::clamp((p - a).dot(ab) / (len * len), 0.0, 1.0);
        const Vec2 foot = a + ab * t;
        const double dist = (p - foot).norm();
        if (dist < best_dist) {
            best_dist = dist;
            best.segment = i;
            best.t = t;
            best.s = s_base + t * len;
            best.foot = foot;
            best.lateral = ab.normalized().cross(p - foot) >= 0.0 ? dist : -dist;
        }
        s_base += len;
    }
    return best;
}

Vec2 polyline_point_at(const std::vector<Vec2>& pts, const std::vector<double>& arclen, double s) {
    if (pts.empty()) return {};
    if (s <= 0.0) return pts.front();
    if (s >= arclen.back()) return pts.back();
    const auto it = std::upper_bound(arclen.begin(), arclen.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - arclen.begin()) - 1;
    const double seg_len = arclen[i + 1] - arclen[i];
    const double t = seg_len > 0.0 ? (s - arclen[i]) / seg_len : 0.0;
    return pts[i] + (pts[i + 1] - pts[i]) * t;
}

Vec2 polyline_tangent_at(const std::vector<Vec2>& pts, const std::vector<double>& arclen, double s) {
    if (pts.size() < 2) return {1.0, 0.0};
    std::size_t i = 0;
    if (s >= arclen.back()) {
        i = pts.size() - 2;
    } else if (s > 0.0) {
        const auto it = std::upper_bound(arclen.begin(), arclen.end(), s);
        i = static_cast<std::size_t>(it - arclen.begin()) - 1;
        i = std::min(i, pts.size() - 2);
    }
    return (pts[i + 1] - pts[i]).normalized();
}

}  // namespace dd
