#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace dd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
    Vec2 perp() const { return {-y, x}; }  // left normal
};

struct Pose {
    Vec2 position;
    double heading = 0.0;  // rad, world frame

    Vec2 to_local(const Vec2& world) const {
        return (world - position).rotated(-heading);
    }
    Vec2 to_world(const Vec2& local) const {
        return position + local.rotated(heading);
    }
};

// Rectangle footprint with arbitrary heading.
struct OrientedBox {
    Vec2 center;
    double heading = 0.0;
    double half_length = 2.25;  // along heading
    double half_width = 0.95;

    std::array<Vec2, 4> corners() const;
    bool contains(const Vec2& p) const;
};

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

// Smallest distance between box perimeters; 0 when overlapping.
double box_distance(const OrientedBox& a, const OrientedBox& b);

double wrap_angle(double a);  // to (-pi, pi]

// Projection of a point onto a polyline.
struct PolylineProjection {
    std::size_t segment = 0;  // index of segment start point
    double t = 0.0;           // param within segment, [0, 1]
    double s = 0.0;           // arc length at foot point
    double lateral = 0.0;     // signed offset, left of travel positive
    Vec2 foot;
};

double polyline_length(const std::vector<Vec2>& pts);
std::vector<double> cumulative_arclength(const std::vector<Vec2>& pts);
PolylineProjection project_to_polyline(const std::vector<Vec2>& pts, const Vec2& p);

// Point at arc length s (clamped to the polyline range) and the segment tangent there.
Vec2 polyline_point_at(const std::vector<Vec2>& pts, const std::vector<double>& arclen, double s);
Vec2 polyline_tangent_at(const std::vector<Vec2>& pts, const std::vector<double>& arclen, double s);

}  // namespace dd
