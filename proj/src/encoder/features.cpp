#include "dualdrive/encoder/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace dd::encoder {

using nlohmann::json;

namespace {

// channel layout inside each cell row
enum Channel {
    kOccupancy = 0,
    kCloseness = 1,
    kClosingSpeed = 2,
    kLateralSpeed = 3,
    kKindVehicle = 4,
    kKindCyclist = 5,
    kKindPedestrian = 6,
    kKindStatic = 7,
    kObjectSpeed = 8,
    kSameLane = 9,
    kRedLight = 10,
    kLightCloseness = 11,
    kUsedChannels = 12
};

constexpr double kRangeAhead = 60.0;
constexpr double kLateralHalf = 7.0;

}  // namespace

GridRasterizer::GridRasterizer(int n, int c) : n_(n), c_(c) {
    if (n_ < 2 || n_ % 2 != 0) throw std::invalid_argument("rasterizer: N must be even and >= 2");
    if (c_ < kUsedChannels) throw std::invalid_argument("rasterizer: C too small");
}

Eigen::MatrixXd GridRasterizer::features(const sim::WorldSnapshot& snap) const {
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(n_, c_);
    const int long_bins = n_ / 2;
    const double bin_len = kRangeAhead / long_bins;
    const Pose ego_pose{snap.ego.position, snap.ego.heading};

    auto cell_of = [&](const Vec2& local) -> int {
        if (local.x < 0.0 || local.x >= kRangeAhead) return -1;
        if (std::abs(local.y) > kLateralHalf) return -1;
        const int row = std::min(long_bins - 1, static_cast<int>(local.x / bin_len));
        const int side = local.y >= 0.0 ? 0 : 1;  // left half rows first
        return row * 2 + side;
    };

    for (const sim::ObjectState& obj : snap.objects) {
        const Vec2 local = ego_pose.to_local(obj.position);
        const int cell = cell_of(local);
        if (cell < 0) continue;
        const double dist = local.norm();
        const Vec2 rel_vel = obj.velocity - snap.ego.velocity;
        const Vec2 dir = dist > 1e-9 ? (obj.position - snap.ego.position) * (1.0 / dist)
                                     : Vec2{1.0, 0.0};
        const double closing = -rel_vel.dot(dir);
        const Vec2 local_vel = rel_vel.rotated(-snap.ego.heading);

        grid(cell, kOccupancy) += 1.0;
        grid(cell, kCloseness) =
            std::max(grid(cell, kCloseness), 1.0 - std::min(dist, kRangeAhead) / kRangeAhead);
        grid(cell, kClosingSpeed) += closing / 10.0;
        grid(cell, kLateralSpeed) += local_vel.y / 10.0;
        switch (obj.kind) {
            case sim::AgentKind::vehicle: grid(cell, kKindVehicle) += 1.0; break;
            case sim::AgentKind::cyclist: grid(cell, kKindCyclist) += 1.0; break;
            case sim::AgentKind::pedestrian: grid(cell, kKindPedestrian) += 1.0; break;
            case sim::AgentKind::static_obstacle: grid(cell, kKindStatic) += 1.0; break;
        }
        grid(cell, kObjectSpeed) += obj.speed / 20.0;
        if (obj.lane_id == snap.ego.lane_id) grid(cell, kSameLane) = 1.0;
    }

    for (const sim::LightObservation& light : snap.lights) {
        if (light.lane != snap.ego.lane_id) continue;
        const Vec2 local = ego_pose.to_local(light.position);
        const int cell = cell_of(local);
        if (cell < 0) continue;
        if (light.phase == sim::LightPhase::red) grid(cell, kRedLight) = 1.0;
        grid(cell, kLightCloseness) =
            std::max(grid(cell, kLightCloseness),
                     1.0 - std::min(local.norm(), kRangeAhead) / kRangeAhead);
    }
    return grid;
}

FeatureFileSource::FeatureFileSource(const std::string& path, int n, int c) : n_(n), c_(c) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open feature file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        const long tick = j.at("tick").get<long>();
        const auto shape = j.at("shape");
        if (shape[0].get<int>() != n_ || shape[1].get<int>() != c_)
            throw std::runtime_error("feature file: shape mismatch at tick " + std::to_string(tick));
        const auto data = j.at("features").get<std::vector<double>>();
        if (static_cast<long>(data.size()) != static_cast<long>(n_) * c_)
            throw std::runtime_error("feature file: bad feature length at tick " +
                                     std::to_string(tick));
        by_tick_[tick] = Eigen::Map<const Eigen::MatrixXd>(data.data(), n_, c_);
    }
}

Eigen::MatrixXd FeatureFileSource::features(const sim::WorldSnapshot& snap) const {
    const auto it = by_tick_.find(snap.tick);
    if (it == by_tick_.end())
        throw std::runtime_error("feature file: no entry for tick " + std::to_string(snap.tick));
    return it->second;
}

}  // namespace dd::encoder
