#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>

#include "dualdrive/sim/world.hpp"

namespace dd::encoder {

// Produces the N x C feature grid consumed by the scene encoder.
class FeatureSource {
public:
    virtual ~FeatureSource() = default;
    virtual Eigen::MatrixXd features(const sim::WorldSnapshot& snapshot) const = 0;
};

// Deterministic ego-frame occupancy / velocity rasterizer: 8 longitudinal
// bins (0..60 m ahead) x 2 lateral halves, a handful of channels per cell,
// the rest zero-padded to C.
class GridRasterizer : public FeatureSource {
public:
    GridRasterizer(int n = 16, int c = 64);
    Eigen::MatrixXd features(const sim::WorldSnapshot& snapshot) const override;

    int grid_n() const { return n_; }
    int grid_c() const { return c_; }

private:
    int n_;
    int c_;
};

// Loads precomputed per-tick grids from a JSONL file of
// {"tick": t, "features": [...], "shape": [N, C]} records.
class FeatureFileSource : public FeatureSource {
public:
    FeatureFileSource(const std::string& path, int n, int c);
    Eigen::MatrixXd features(const sim::WorldSnapshot& snapshot) const override;

private:
    std::map<long, Eigen::MatrixXd> by_tick_;
    int n_;
    int c_;
};

}  // namespace dd::encoder
