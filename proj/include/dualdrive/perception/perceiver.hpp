#pragma once

#include <deque>
#include <string>
#include <vector>

#include "dualdrive/perception/scene.hpp"
#include "dualdrive/sim/world.hpp"

namespace dd::perception {

struct CriticalityRadii {
    double ahead = 60.0;     // same / adjacent lane, m
    double oncoming = 40.0;
    double crossing = 30.0;
    double control = 50.0;   // lights and stop signs governing the ego lane
};

struct PerceiverConfig {
    int frames = 5;  // multi-frame window length
    CriticalityRadii radii;
    double static_band = 0.2;  // |closing speed| below this reads as static
};

// Deterministic describer over ground-truth snapshots. Stands in for a
// learned vision backend; emits the same attribute schema an external
// perceiver would.
class GroundTruthPerceiver {
public:
    explicit GroundTruthPerceiver(PerceiverConfig config = {}) : config_(config) {}

    // window: oldest-first snapshots, at least one; the newest frame drives
    // geometry, earlier frames feed the closing-speed fit.
    SceneDescription describe_scene(const std::deque<sim::WorldSnapshot>& window,
                                    const std::string& ego_id = "ego") const;

    const PerceiverConfig& config() const { return config_; }

private:
    PerceiverConfig config_;
};

// Keep-rules applied to candidate objects (already described relative to the
// ego). Exposed separately so the rules can be tested in isolation.
std::vector<CriticalObject> criticality_filter(const std::vector<CriticalObject>& objects,
                                               const CriticalityRadii& radii);

// ---- external perceiver adapter protocol (wire types only) ----

struct ExternalPerceiverRequest {
    std::vector<std::string> frames;  // serialized feature grids or image paths
    std::string prompt;

    std::string to_json() const;
    static ExternalPerceiverRequest from_json(const std::string& text);
};

struct ExternalPerceiverResponse {
    std::vector<CriticalObject> objects;
    std::string summary;

    std::string to_json() const;
    static ExternalPerceiverResponse from_json(const std::string& text);
};

}  // namespace dd::perception
