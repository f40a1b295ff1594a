#include "dualdrive/sim/lane_graph.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace dd::sim {

void LaneGraph::add_lane(Lane lane) {
    lane.arclen = cumulative_arclength(lane.centerline);
    lanes_.push_back(std::move(lane));
}

const Lane& LaneGraph::lane(int id) const {
    const Lane* l = find_lane(id);
    if (!l) throw std::runtime_error("unknown lane id " + std::to_string(id));
    return *l;
}

const Lane* LaneGraph::find_lane(int id) const {
    for (const Lane& l : lanes_) {
        if (l.id == id) return &l;
    }
    return nullptr;
}

void LaneGraph::validate() const {
    for (const Lane& l : lanes_) {
        const std::string tag = "lane " + std::to_string(l.id);
        if (l.centerline.size() < 2) throw std::runtime_error(tag + ": centerline needs >= 2 points");
        if (!(l.width > 2.0)) throw std::runtime_error(tag + ": width must exceed 2 m");
        for (std::size_t i = 1; i < l.centerline.size(); ++i) {
            const double gap = (l.centerline[i] - l.centerline[i - 1]).norm();
            if (gap > 5.0 + 1e-9) {
                throw std::runtime_error(tag + ": centerline spacing " + std::to_string(gap) +
                                         " m at point " + std::to_string(i) + " exceeds 5 m");
            }
        }
        if (l.left && find_lane(*l.left) == nullptr)
            throw std::runtime_error(tag + ": left neighbor " + std::to_string(*l.left) + " missing");
        if (l.right && find_lane(*l.right) == nullptr)
            throw std::runtime_error(tag + ": right neighbor " + std::to_string(*l.right) + " missing");
        for (int succ : l.successors) {
            if (find_lane(succ) == nullptr)
                throw std::runtime_error(tag + ": successor " + std::to_string(succ) + " missing");
        }
    }
    // left-of(A) == B requires right-of(B) == A
    for (const Lane& l : lanes_) {
        if (l.left) {
            const Lane& n = lane(*l.left);
            if (!n.right || *n.right != l.id)
                throw std::runtime_error("adjacency not symmetric between lanes " +
                                         std::to_string(l.id) + " and " + std::to_string(n.id));
        }
        if (l.right) {
            const Lane& n = lane(*l.right);
            if (!n.left || *n.left != l.id)
                throw std::runtime_error("adjacency not symmetric between lanes " +
                                         std::to_string(l.id) + " and " + std::to_string(n.id));
        }
    }
}

const Lane* LaneGraph::nearest_lane(const Vec2& p, PolylineProjection* proj) const {
    const Lane* best = nullptr;
    PolylineProjection best_proj;
    double best_dist = std::numeric_limits<double>::max();
    for (const Lane& l : lanes_) {
        const PolylineProjection pr = project_to_polyline(l.centerline, p);
        const double d = std::abs(pr.lateral);
        if (d < best_dist) {
            best_dist = d;
            best = &l;
            best_proj = pr;
        }
    }
    if (proj && best) *proj = best_proj;
    return best;
}

}  // namespace dd::sim
