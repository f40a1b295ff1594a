#pragma once

#include <deque>
#include <string>

#include "dualdrive/agent/meta_action.hpp"
#include "dualdrive/perception/scene.hpp"
#include "dualdrive/token.hpp"

namespace dd::agent {

struct NavigationHint {
    enum class Maneuver { straight, left, right, lane_change_left, lane_change_right };
    Maneuver next = Maneuver::straight;
    double distance = 0.0;      // m to the maneuver, >= 0
    double target_speed = 0.0;  // m/s
};

std::string to_string(NavigationHint::Maneuver m);

struct EgoInfo {
    double speed = 0.0;
    double accel = 0.0;
    int lane_id = -1;
    double target_speed = 0.0;
};

// One decision-step record kept for reflection: token, description,
// reasoning, decision, plus the navigation/ego context the decision saw.
struct HistoryRecord {
    SceneToken token;
    perception::SceneDescription description;
    std::string reasoning;
    MetaAction decision = MetaAction::IDLE;
    NavigationHint navigation;
    EgoInfo ego;
    long tick = 0;
};

// FIFO of the last m = 10 sampled decision steps.
class HistoryQueue {
public:
    static constexpr std::size_t kCapacity = 10;

    void push(HistoryRecord record) {
        records_.push_back(std::move(record));
        if (records_.size() > kCapacity) records_.pop_front();
    }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    void clear() { records_.clear(); }
    const HistoryRecord& at(std::size_t i) const { return records_.at(i); }  // oldest first
    const std::deque<HistoryRecord>& records() const { return records_; }

private:
    std::deque<HistoryRecord> records_;
};

inline std::string to_string(NavigationHint::Maneuver m) {
    switch (m) {
        case NavigationHint::Maneuver::straight: return "straight";
        case NavigationHint::Maneuver::left: return "left";
        case NavigationHint::Maneuver::right: return "right";
        case NavigationHint::Maneuver::lane_change_left: return "lane_change_left";
        case NavigationHint::Maneuver::lane_change_right: return "lane_change_right";
    }
    return "straight";
}

}  // namespace dd::agent
