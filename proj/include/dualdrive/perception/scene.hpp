#pragma once

#include <string>
#include <vector>

#include "dualdrive/geometry.hpp"

namespace dd::perception {

enum class ObjectCategory { vehicle, cyclist, pedestrian, traffic_light, stop_sign, static_obstacle };
enum class LaneRelation { same, left, right, oncoming, crossing };
enum class MotionTrend { approaching, receding, static_trend };

std::string to_string(ObjectCategory c);
std::string to_string(LaneRelation r);
std::string to_string(MotionTrend t);
ObjectCategory object_category_from_string(const std::string& s);
LaneRelation lane_relation_from_string(const std::string& s);
MotionTrend motion_trend_from_string(const std::string& s);

// One object the describer judged relevant to the driving decision, with
// semantic / spatial / motion / reasoning attributes.
struct CriticalObject {
    std::string id;
    ObjectCategory category = ObjectCategory::vehicle;

    // spatial
    Vec2 box_center_ego;  // bounding-box center in the ego frame, m
    Vec2 box_half_extents{2.25, 0.95};
    LaneRelation lane_relation = LaneRelation::same;
    double distance = 0.0;  // m, >= 0

    // motion
    std::string direction;      // e.g. "ahead", "oncoming", "from the left"
    double closing_speed = 0.0; // m/s, positive when approaching
    MotionTrend trend = MotionTrend::static_trend;

    // reasoning
    std::string reasoning;

    // extra context consumed by rule backends (not part of the text summary)
    bool light_is_red = false;
    double speed = 0.0;  // object's own speed, m/s
};

struct EgoContext {
    double speed = 0.0;
    int lane_id = -1;
    double distance_to_junction = -1.0;  // m, negative when none ahead
    double target_speed = 0.0;
};

// Structured scene description: critical objects sorted nearest-first plus a
// deterministic text rendering of the same fields.
struct SceneDescription {
    long frame_id = 0;
    std::vector<CriticalObject> objects;
    EgoContext ego;
    std::string summary;
};

// Pure text rendering; summary is a function of the structured fields only.
std::string render_summary(const SceneDescription& d);

}  // namespace dd::perception
