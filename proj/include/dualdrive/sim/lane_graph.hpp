#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualdrive/geometry.hpp"

namespace dd::sim {

struct Lane {
    int id = 0;
    double width = 3.5;
    std::vector<Vec2> centerline;
    std::vector<double> arclen;  // cumulative, same size as centerline
    std::vector<int> successors;
    std::optional<int> left;
    std::optional<int> right;
    std::optional<double> stop_line_s;  // arc position of the stop line, if any
    std::optional<double> stop_sign_s;
    bool has_light = false;

    double length() const { return arclen.empty() ? 0.0 : arclen.back(); }
    Vec2 point_at(double s) const { return polyline_point_at(centerline, arclen, s); }
    Vec2 tangent_at(double s) const { return polyline_tangent_at(centerline, arclen, s); }
    double heading_at(double s) const {
        const Vec2 t = tangent_at(s);
        return std::atan2(t.y, t.x);
    }
};

// Static road network: centerline polylines with adjacency.
// Invariants checked by validate(): point spacing <= 5 m, width > 2 m,
// left/right adjacency symmetric.
class LaneGraph {
public:
    void add_lane(Lane lane);
    const Lane& lane(int id) const;
    const Lane* find_lane(int id) const;
    const std::vector<Lane>& lanes() const { return lanes_; }

    // Throws std::runtime_error naming the violated invariant.
    void validate() const;

    // Nearest lane by centerline distance; nullptr when the graph is empty.
    const Lane* nearest_lane(const Vec2& p, PolylineProjection* proj = nullptr) const;

private:
    std::vector<Lane> lanes_;
};

}  // namespace dd::sim
