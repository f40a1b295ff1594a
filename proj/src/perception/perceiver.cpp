#include "dualdrive/perception/perceiver.hpp"
#include "dualdrive/perception/scene_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <stdexcept>

namespace dd::perception {

using nlohmann::json;
using sim::AgentKind;
using sim::WorldSnapshot;

std::string to_string(ObjectCategory c) {
    switch (c) {
        case ObjectCategory::vehicle: return "vehicle";
        case ObjectCategory::cyclist: return "cyclist";
        case ObjectCategory::pedestrian: return "pedestrian";
        case ObjectCategory::traffic_light: return "traffic_light";
        case ObjectCategory::stop_sign: return "stop_sign";
        case ObjectCategory::static_obstacle: return "static";
    }
    return "vehicle";
}

std::string to_string(LaneRelation r) {
    switch (r) {
        case LaneRelation::same: return "same";
        case LaneRelation::left: return "left";
        case LaneRelation::right: return "right";
        case LaneRelation::oncoming: return "oncoming";
        case LaneRelation::crossing: return "crossing";
    }
    return "same";
}

std::string to_string(MotionTrend t) {
    switch (t) {
        case MotionTrend::approaching: return "approaching";
        case MotionTrend::receding: return "receding";
        case MotionTrend::static_trend: return "static";
    }
    return "static";
}

ObjectCategory object_category_from_string(const std::string& s) {
    if (s == "vehicle") return ObjectCategory::vehicle;
    if (s == "cyclist") return ObjectCategory::cyclist;
    if (s == "pedestrian") return ObjectCategory::pedestrian;
    if (s == "traffic_light") return ObjectCategory::traffic_light;
    if (s == "stop_sign") return ObjectCategory::stop_sign;
    if (s == "static") return ObjectCategory::static_obstacle;
    throw std::runtime_error("unknown object category '" + s + "'");
}

LaneRelation lane_relation_from_string(const std::string& s) {
    if (s == "same") return LaneRelation::same;
    if (s == "left") return LaneRelation::left;
    if (s == "right") return LaneRelation::right;
    if (s == "oncoming") return LaneRelation::oncoming;
    if (s == "crossing") return LaneRelation::crossing;
    throw std::runtime_error("unknown lane relation '" + s + "'");
}

MotionTrend motion_trend_from_string(const std::string& s) {
    if (s == "approaching") return MotionTrend::approaching;
    if (s == "receding") return MotionTrend::receding;
    if (s == "static") return MotionTrend::static_trend;
    throw std::runtime_error("unknown motion trend '" + s + "'");
}

namespace {

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

// Least-squares slope of (t, y) pairs; exact for constant-velocity motion.
double fit_slope(const std::vector<std::pair<double, double>>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) return 0.0;
    double mt = 0.0, my = 0.0;
    for (const auto& [t, y] : samples) {
        mt += t;
        my += y;
    }
    mt /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (const auto& [t, y] : samples) {
        num += (t - mt) * (y - my);
        den += (t - mt) * (t - mt);
    }
    return den > 0.0 ? num / den : 0.0;
}

ObjectCategory category_of(AgentKind k) {
    switch (k) {
        case AgentKind::vehicle: return ObjectCategory::vehicle;
        case AgentKind::cyclist: return ObjectCategory::cyclist;
        case AgentKind::pedestrian: return ObjectCategory::pedestrian;
        case AgentKind::static_obstacle: return ObjectCategory::static_obstacle;
    }
    return ObjectCategory::vehicle;
}

std::string direction_label(const Vec2& local, LaneRelation rel) {
    if (rel == LaneRelation::oncoming) return "oncoming";
    if (rel == LaneRelation::crossing) return local.y > 0.0 ? "from the left" : "from the right";
    if (local.x >= 0.0) return "ahead";
    return "behind";
}

std::string reasoning_tag(const CriticalObject& obj) {
    switch (obj.category) {
        case ObjectCategory::traffic_light:
            return obj.light_is_red ? "must stop at intersection" : "may proceed while green";
        case ObjectCategory::stop_sign:
            return "must stop at the sign";
        case ObjectCategory::pedestrian:
            return obj.lane_relation == LaneRelation::crossing ? "yield to crossing pedestrian"
                                                               : "watch pedestrian near roadway";
        case ObjectCategory::static_obstacle:
            return "static obstacle on the roadside";
        case ObjectCategory::cyclist:
            if (obj.lane_relation == LaneRelation::oncoming) return "oncoming cyclist, keep clear";
            return "leave room for the cyclist";
        case ObjectCategory::vehicle:
            if (obj.lane_relation == LaneRelation::oncoming) return "oncoming traffic, hold lane";
            if (obj.lane_relation == LaneRelation::same && obj.trend == MotionTrend::approaching)
                return "maintain safe following distance";
            if (obj.lane_relation == LaneRelation::left || obj.lane_relation == LaneRelation::right)
                return "occupies the adjacent lane";
            return "monitor surrounding vehicle";
    }
    return "monitor object";
}

}  // namespace

std::vector<CriticalObject> criticality_filter(const std::vector<CriticalObject>& objects,
                                               const CriticalityRadii& radii) {
    std::vector<CriticalObject> kept;
    for (const CriticalObject& o : objects) {
        const bool behind = o.box_center_ego.x < 0.0;
        if (behind && o.trend == MotionTrend::receding) continue;

        bool keep = false;
        switch (o.lane_relation) {
            case LaneRelation::same:
            case LaneRelation::left:
            case LaneRelation::right:
                if (o.category == ObjectCategory::traffic_light ||
                    o.category == ObjectCategory::stop_sign) {
                    keep = !behind && o.distance <= radii.control;
                } else {
                    keep = o.distance <= radii.ahead;
                }
                break;
            case LaneRelation::oncoming:
                keep = o.distance <= radii.oncoming;
                break;
            case LaneRelation::crossing:
                keep = o.distance <= radii.crossing;
                break;
        }
        if (keep) kept.push_back(o);
    }
    return kept;
}

std::string render_summary(const SceneDescription& d) {
    std::string out = "Scene frame " + std::to_string(d.frame_id) + ": ego speed " +
                      fmt1(d.ego.speed) + " m/s in lane " + std::to_string(d.ego.lane_id);
    if (d.ego.distance_to_junction >= 0.0) {
        out += ", next junction " + fmt1(d.ego.distance_to_junction) + " m ahead";
    }
    out += ".\n";
    if (d.objects.empty()) {
        out += "There are no critical objects.";
        return out;
    }
    out += "Critical objects (" + std::to_string(d.objects.size()) + "):";
    int rank = 1;
    for (const CriticalObject& o : d.objects) {
        out += "\n  " + std::to_string(rank++) + ". " + to_string(o.category);
        if (o.category == ObjectCategory::traffic_light) {
            out += o.light_is_red ? " (red)" : " (not red)";
        }
        out += " " + o.direction + " in " + to_string(o.lane_relation) + " lane, " +
               fmt1(o.distance) + " m away, closing " + fmt1(o.closing_speed) + " m/s (" +
               to_string(o.trend) + "); " + o.reasoning + ".";
    }
    return out;
}

SceneDescription GroundTruthPerceiver::describe_scene(
    const std::deque<WorldSnapshot>& window, const std::string& ego_id) const {
    if (window.empty()) throw std::runtime_error("describe_scene: empty frame window");
    if (ego_id != "ego") throw std::runtime_error("describe_scene: unknown ego id '" + ego_id + "'");

    const WorldSnapshot& now = window.back();
    const Pose ego_pose{now.ego.position, now.ego.heading};

    std::vector<CriticalObject> candidates;

    for (const sim::ObjectState& obj : now.objects) {
        CriticalObject c;
        c.id = obj.id;
        c.category = category_of(obj.kind);
        c.box_center_ego = ego_pose.to_local(obj.position);
        c.box_half_extents = obj.half_extents;
        c.distance = (obj.position - now.ego.position).norm();
        c.speed = obj.speed;

        // lane relation
        const double heading_diff = std::abs(wrap_angle(obj.heading - now.ego.heading));
        if ((obj.kind == AgentKind::pedestrian || obj.kind == AgentKind::cyclist) &&
            std::abs(c.box_center_ego.y) > 1.0 && obj.speed > 0.1) {
            const Vec2 local_vel = obj.velocity.rotated(-now.ego.heading);
            if (local_vel.y * c.box_center_ego.y < 0.0) {
                c.lane_relation = LaneRelation::crossing;
            }
        }
        if (c.lane_relation != LaneRelation::crossing) {
            if (heading_diff > 2.0944 && obj.kind != AgentKind::static_obstacle &&
                obj.speed > 0.1) {
                c.lane_relation = LaneRelation::oncoming;
            } else if (obj.lane_id == now.ego.lane_id) {
                c.lane_relation = LaneRelation::same;
            } else if (now.lanes) {
                const sim::Lane* ego_lane = now.lanes->find_lane(now.ego.lane_id);
                if (ego_lane && ego_lane->left && *ego_lane->left == obj.lane_id) {
                    c.lane_relation = LaneRelation::left;
                } else if (ego_lane && ego_lane->right && *ego_lane->right == obj.lane_id) {
                    c.lane_relation = LaneRelation::right;
                } else {
                    c.lane_relation = c.box_center_ego.y > 0.0 ? LaneRelation::left
                                                               : LaneRelation::right;
                }
            }
        }

        // closing speed from the distance-vs-time fit over the window
        std::vector<std::pair<double, double>> samples;
        for (const WorldSnapshot& frame : window) {
            for (const sim::ObjectState& past : frame.objects) {
                if (past.id == obj.id) {
                    samples.emplace_back(frame.time, (past.position - frame.ego.position).norm());
                    break;
                }
            }
        }
        if (samples.size() >= 2) {
            c.closing_speed = -fit_slope(samples);
        } else {
            const Vec2 rel_vel = obj.velocity - now.ego.velocity;
            const Vec2 dir = (obj.position - now.ego.position).normalized();
            c.closing_speed = -rel_vel.dot(dir);
        }
        c.trend = std::abs(c.closing_speed) < config_.static_band
                      ? MotionTrend::static_trend
                      : (c.closing_speed > 0.0 ? MotionTrend::approaching : MotionTrend::receding);
        c.direction = direction_label(c.box_center_ego, c.lane_relation);
        c.reasoning = reasoning_tag(c);
        candidates.push_back(std::move(c));
    }

    // lights and stop signs governing the ego lane
    for (const sim::LightObservation& light : now.lights) {
        if (light.lane != now.ego.lane_id) continue;
        const double ahead = light.stop_line_s - now.ego.lane_s;
        if (ahead < 0.0) continue;
        CriticalObject c;
        c.id = "light_lane" + std::to_string(light.lane);
        c.category = ObjectCategory::traffic_light;
        c.box_center_ego = ego_pose.to_local(light.position);
        c.box_half_extents = {0.3, 0.3};
        c.lane_relation = LaneRelation::same;
        c.distance = ahead;
        c.light_is_red = light.phase == sim::LightPhase::red;
        std::vector<std::pair<double, double>> samples;
        for (const WorldSnapshot& frame : window) {
            for (const sim::LightObservation& past : frame.lights) {
                if (past.lane == light.lane) {
                    samples.emplace_back(frame.time, past.stop_line_s - frame.ego.lane_s);
                    break;
                }
            }
        }
        c.closing_speed = samples.size() >= 2 ? -fit_slope(samples) : now.ego.speed;
        c.trend = std::abs(c.closing_speed) < config_.static_band
                      ? MotionTrend::static_trend
                      : (c.closing_speed > 0.0 ? MotionTrend::approaching : MotionTrend::receding);
        c.direction = "ahead";
        c.reasoning = reasoning_tag(c);
        candidates.push_back(std::move(c));
    }
    if (now.lanes) {
        if (const sim::Lane* ego_lane = now.lanes->find_lane(now.ego.lane_id)) {
            if (ego_lane->stop_sign_s) {
                const double ahead = *ego_lane->stop_sign_s - now.ego.lane_s;
                if (ahead >= 0.0) {
                    CriticalObject c;
                    c.id = "stop_sign_lane" + std::to_string(ego_lane->id);
                    c.category = ObjectCategory::stop_sign;
                    c.box_center_ego = ego_pose.to_local(ego_lane->point_at(*ego_lane->stop_sign_s));
                    c.box_half_extents = {0.3, 0.3};
                    c.lane_relation = LaneRelation::same;
                    c.distance = ahead;
                    c.closing_speed = now.ego.speed;
                    c.trend = c.closing_speed >= config_.static_band ? MotionTrend::approaching
                                                                     : MotionTrend::static_trend;
                    c.direction = "ahead";
                    c.reasoning = reasoning_tag(c);
                    candidates.push_back(std::move(c));
                }
            }
        }
    }

    SceneDescription desc;
    desc.frame_id = now.tick;
    desc.objects = criticality_filter(candidates, config_.radii);
    std::stable_sort(desc.objects.begin(), desc.objects.end(),
                     [](const CriticalObject& a, const CriticalObject& b) {
                         return a.distance < b.distance;
                     });
    desc.ego.speed = now.ego.speed;
    desc.ego.lane_id = now.ego.lane_id;
    desc.ego.target_speed = now.ego_target_speed;
    desc.ego.distance_to_junction = -1.0;
    if (now.lanes) {
        if (const sim::Lane* lane = now.lanes->find_lane(now.ego.lane_id)) {
            // junction = stop line if one lies ahead, else the end of the
            // current lane when it branches or terminates
            if (lane->stop_line_s && *lane->stop_line_s >= now.ego.lane_s) {
                desc.ego.distance_to_junction = *lane->stop_line_s - now.ego.lane_s;
            } else if (lane->successors.size() != 1) {
                desc.ego.distance_to_junction = lane->length() - now.ego.lane_s;
            }
        }
    }
    desc.summary = render_summary(desc);
    return desc;
}

// ---- JSON forms shared with persistence and the external adapter ----

json to_json_value(const CriticalObject& o) {
    return json{{"id", o.id},
                {"category", to_string(o.category)},
                {"box_center_ego", {o.box_center_ego.x, o.box_center_ego.y}},
                {"box_half_extents", {o.box_half_extents.x, o.box_half_extents.y}},
                {"lane_relation", to_string(o.lane_relation)},
                {"distance", o.distance},
                {"direction", o.direction},
                {"closing_speed", o.closing_speed},
                {"trend", to_string(o.trend)},
                {"reasoning", o.reasoning},
                {"light_is_red", o.light_is_red},
                {"speed", o.speed}};
}

CriticalObject critical_object_from_json(const json& j) {
    CriticalObject o;
    o.id = j.value("id", std::string());
    o.category = object_category_from_string(j.at("category").get<std::string>());
    o.box_center_ego = {j.at("box_center_ego")[0].get<double>(),
                        j.at("box_center_ego")[1].get<double>()};
    if (j.contains("box_half_extents")) {
        o.box_half_extents = {j["box_half_extents"][0].get<double>(),
                              j["box_half_extents"][1].get<double>()};
    }
    o.lane_relation = lane_relation_from_string(j.at("lane_relation").get<std::string>());
    o.distance = j.at("distance").get<double>();
    o.direction = j.value("direction", std::string());
    o.closing_speed = j.value("closing_speed", 0.0);
    o.trend = motion_trend_from_string(j.value("trend", std::string("static")));
    o.reasoning = j.value("reasoning", std::string());
    o.light_is_red = j.value("light_is_red", false);
    o.speed = j.value("speed", 0.0);
    return o;
}

json to_json_value(const SceneDescription& d) {
    json objs = json::array();
    for (const CriticalObject& o : d.objects) objs.push_back(to_json_value(o));
    return json{{"frame_id", d.frame_id},
                {"objects", objs},
                {"ego",
                 {{"speed", d.ego.speed},
                  {"lane_id", d.ego.lane_id},
                  {"distance_to_junction", d.ego.distance_to_junction},
                  {"target_speed", d.ego.target_speed}}},
                {"summary", d.summary}};
}

SceneDescription scene_description_from_json(const json& j) {
    SceneDescription d;
    d.frame_id = j.value("frame_id", 0L);
    for (const json& oj : j.at("objects")) d.objects.push_back(critical_object_from_json(oj));
    const json& ego = j.at("ego");
    d.ego.speed = ego.value("speed", 0.0);
    d.ego.lane_id = ego.value("lane_id", -1);
    d.ego.distance_to_junction = ego.value("distance_to_junction", -1.0);
    d.ego.target_speed = ego.value("target_speed", 0.0);
    d.summary = j.value("summary", std::string());
    return d;
}

std::string ExternalPerceiverRequest::to_json() const {
    return json{{"frames", frames}, {"prompt", prompt}}.dump();
}

ExternalPerceiverRequest ExternalPerceiverRequest::from_json(const std::string& text) {
    const json j = json::parse(text);
    ExternalPerceiverRequest r;
    r.frames = j.at("frames").get<std::vector<std::string>>();
    r.prompt = j.value("prompt", std::string());
    return r;
}

std::string ExternalPerceiverResponse::to_json() const {
    json objs = json::array();
    for (const CriticalObject& o : objects) objs.push_back(to_json_value(o));
    return json{{"objects", objs}, {"summary", summary}}.dump();
}

ExternalPerceiverResponse ExternalPerceiverResponse::from_json(const std::string& text) {
    const json j = json::parse(text);
    ExternalPerceiverResponse r;
    for (const json& oj : j.at("objects")) r.objects.push_back(critical_object_from_json(oj));
    r.summary = j.value("summary", std::string());
    return r;
}

}  // namespace dd::perception
