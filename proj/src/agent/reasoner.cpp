#include "dualdrive/agent/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dualdrive/agent/external_chat.hpp"

namespace dd::agent {

using perception::CriticalObject;
using perception::LaneRelation;
using perception::MotionTrend;
using perception::ObjectCategory;
using perception::SceneDescription;

namespace {

std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

const CriticalObject* lead_vehicle(const SceneDescription& d) {
    for (const CriticalObject& o : d.objects) {  // nearest first
        if ((o.category == ObjectCategory::vehicle || o.category == ObjectCategory::cyclist) &&
            o.lane_relation == LaneRelation::same && o.box_center_ego.x > 0.0) {
            return &o;
        }
    }
    return nullptr;
}

// Contact margin approximates bumper-to-bumper distance from center distance.
constexpr double kContactMargin = 4.5;

double time_to_contact(const CriticalObject& lead) {
    if (lead.closing_speed <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(0.0, lead.distance - kContactMargin) / lead.closing_speed;
}

bool adjacent_gap_ok(const SceneDescription& d, LaneRelation side, double front_gap,
                     double rear_gap) {
    for (const CriticalObject& o : d.objects) {
        if (o.lane_relation != side) continue;
        if (o.category == ObjectCategory::traffic_light || o.category == ObjectCategory::stop_sign)
            continue;
        if (o.box_center_ego.x >= 0.0) {
            if (o.distance < front_gap) return false;
        } else {
            if (o.distance < rear_gap) return false;
        }
    }
    return true;
}

}  // namespace

Decision RuleBackendBase::decide(const DecisionRequest& request) {
    if (!request.shots.empty() && request.shots.front().similarity >= override_similarity_) {
        const FewShot& shot = request.shots.front();
        Decision d;
        d.action = shot.decision;
        d.reasoning = "A remembered scene matches the current one almost exactly (similarity " +
                      fmt1(shot.similarity * 100.0) + "%); following its decision. Recalled: " +
                      shot.reasoning;
        return d;
    }
    return table_decide(request.description, request.navigation, request.ego);
}

ReflectionFinding RuleBackendBase::reflect(const ReflectionRequest& request) {
    if (request.queue.empty())
        throw BackendError("reflect: history queue is empty");

    const bool red_light = request.accident.kind == sim::AccidentInfo::Kind::red_light_violation;
    for (std::size_t i = 0; i < request.queue.size(); ++i) {
        const HistoryRecord& rec = request.queue[i];
        const Decision should = table_decide(rec.description, rec.navigation, rec.ego);
        const bool chosen_cautious =
            rec.decision == MetaAction::DC || rec.decision == MetaAction::STOP;
        if (red_light) {
            if (should.action == MetaAction::STOP && rec.decision != MetaAction::STOP) {
                ReflectionFinding f;
                f.step_index = i;
                f.corrected = MetaAction::STOP;
                f.reasoning =
                    "The red light violation traces back to step " + std::to_string(i) +
                    ": the scene already required a stop, but '" + to_string(rec.decision) +
                    "' was chosen. " + should.reasoning;
                return f;
            }
        } else {
            if ((should.action == MetaAction::DC || should.action == MetaAction::STOP) &&
                !chosen_cautious) {
                ReflectionFinding f;
                f.step_index = i;
                f.corrected = should.action;
                f.reasoning =
                    "The accident (" + sim::to_string(request.accident.kind) +
                    ") traces back to step " + std::to_string(i) + ": the scene called for '" +
                    to_string(should.action) + "' but '" + to_string(rec.decision) +
                    "' was chosen. " + should.reasoning;
                return f;
            }
        }
    }

    // No disagreeing step: correct the latest one with the policy default.
    ReflectionFinding f;
    f.step_index = request.queue.size() - 1;
    f.corrected = red_light ? MetaAction::STOP : MetaAction::DC;
    f.fallback = true;
    f.reasoning = "No rule disagreement found in the recent steps; defaulting to '" +
                  to_string(f.corrected) + "' at the final step before the " +
                  sim::to_string(request.accident.kind) + ".";
    return f;
}

Decision RuleOracle::table_decide(const SceneDescription& d, const NavigationHint& nav,
                                  const EgoInfo& ego) const {
    // STOP tier
    for (const CriticalObject& o : d.objects) {
        if (o.category == ObjectCategory::traffic_light && o.light_is_red &&
            o.lane_relation == LaneRelation::same && o.distance <= 25.0) {
            return {"Red light " + fmt1(o.distance) + " m ahead on our lane; stopping before the line.",
                    MetaAction::STOP};
        }
        if (o.category == ObjectCategory::stop_sign && o.lane_relation == LaneRelation::same &&
            o.distance >= 3.0 && o.distance <= 25.0 && ego.speed > 1.0) {
            return {"Stop sign " + fmt1(o.distance) + " m ahead; coming to a stop.",
                    MetaAction::STOP};
        }
        if (o.category == ObjectCategory::pedestrian && o.lane_relation == LaneRelation::crossing &&
            o.distance <= 25.0) {
            return {"Pedestrian crossing our corridor " + fmt1(o.distance) + " m ahead; stopping.",
                    MetaAction::STOP};
        }
    }

    // DC tier
    if (const CriticalObject* lead = lead_vehicle(d)) {
        const double ttc = time_to_contact(*lead);
        if (ttc < 3.0) {
            return {"Lead " + to_string(lead->category) + " " + fmt1(lead->distance) +
                        " m ahead closing at " + fmt1(lead->closing_speed) +
                        " m/s (contact in " + fmt1(ttc) + " s); decelerating.",
                    MetaAction::DC};
        }
        if (lead->distance < 8.0) {
            return {"Lead " + to_string(lead->category) + " only " + fmt1(lead->distance) +
                        " m ahead; decelerating to restore the gap.",
                    MetaAction::DC};
        }
    }

    // lane change tier
    if (nav.next == NavigationHint::Maneuver::lane_change_left && nav.distance <= 30.0 &&
        adjacent_gap_ok(d, LaneRelation::left, 15.0, 10.0)) {
        return {"Navigation asks for the left lane within " + fmt1(nav.distance) +
                    " m and the gap is sufficient; changing left.",
                MetaAction::LCL};
    }
    if (nav.next == NavigationHint::Maneuver::lane_change_right && nav.distance <= 30.0 &&
        adjacent_gap_ok(d, LaneRelation::right, 15.0, 10.0)) {
        return {"Navigation asks for the right lane within " + fmt1(nav.distance) +
                    " m and the gap is sufficient; changing right.",
                MetaAction::LCR};
    }

    // AC tier
    if (ego.speed < ego.target_speed - 1.0) {
        bool clear = true;
        for (const CriticalObject& o : d.objects) {
            if (o.category == ObjectCategory::traffic_light && o.light_is_red &&
                o.lane_relation == LaneRelation::same && o.distance <= 50.0) {
                clear = false;
            }
            if (o.category == ObjectCategory::stop_sign && o.lane_relation == LaneRelation::same &&
                o.distance <= 40.0) {
                clear = false;
            }
            if ((o.category == ObjectCategory::vehicle || o.category == ObjectCategory::cyclist) &&
                o.lane_relation == LaneRelation::same && o.box_center_ego.x > 0.0 &&
                o.distance <= 15.0) {
                clear = false;
            }
            if (o.category == ObjectCategory::pedestrian &&
                o.lane_relation == LaneRelation::crossing && o.distance <= 30.0) {
                clear = false;
            }
        }
        if (clear) {
            return {"Speed " + fmt1(ego.speed) + " m/s is below the target " +
                        fmt1(ego.target_speed) + " m/s and the road ahead is clear; accelerating.",
                    MetaAction::AC};
        }
    }

    return {"No rule requires action; holding the current speed.", MetaAction::IDLE};
}

Decision NaiveOracle::table_decide(const SceneDescription& d, const NavigationHint& nav,
                                   const EgoInfo& ego) const {
    for (const CriticalObject& o : d.objects) {
        if (o.category == ObjectCategory::traffic_light && o.light_is_red &&
            o.lane_relation == LaneRelation::same && o.distance <= 10.0) {
            return {"Red light right ahead (" + fmt1(o.distance) + " m); stopping.",
                    MetaAction::STOP};
        }
    }
    const CriticalObject* lead = lead_vehicle(d);
    if (lead && lead->distance < 6.0) {
        return {"Vehicle very close ahead (" + fmt1(lead->distance) + " m); decelerating.",
                MetaAction::DC};
    }
    if (nav.next == NavigationHint::Maneuver::lane_change_left && nav.distance <= 30.0) {
        return {"Navigation asks for the left lane; changing left.", MetaAction::LCL};
    }
    if (nav.next == NavigationHint::Maneuver::lane_change_right && nav.distance <= 30.0) {
        return {"Navigation asks for the right lane; changing right.", MetaAction::LCR};
    }
    if (ego.speed < ego.target_speed - 1.0 && (!lead || lead->distance >= 6.0)) {
        return {"Below target speed; accelerating.", MetaAction::AC};
    }
    return {"Nothing nearby; holding speed.", MetaAction::IDLE};
}

std::string assemble_context(const std::string& traffic_rules, const std::vector<FewShot>& shots,
                             const SceneDescription& description, const NavigationHint& nav,
                             const EgoInfo& ego) {
    std::ostringstream os;
    os << traffic_rules << "\n";
    if (!shots.empty()) {
        os << "Similar remembered scenes, most similar first:\n";
        for (std::size_t i = 0; i < shots.size(); ++i) {
            const FewShot& s = shots[i];
            os << "--- experience " << (i + 1) << " (similarity " << fmt1(s.similarity * 100.0)
               << "%)\n"
               << "Scene: " << s.description.summary << "\n"
               << "Reasoning: " << s.reasoning << "\n"
               << "Decision: " << to_string(s.decision) << "\n";
        }
        os << "\n";
    }
    os << "Current scene:\n"
       << description.summary << "\n\n"
       << "Navigation: " << to_string(nav.next) << " in " << fmt1(nav.distance)
       << " m, target speed " << fmt1(nav.target_speed) << " m/s\n"
       << "Ego state: speed " << fmt1(ego.speed) << " m/s, acceleration " << fmt1(ego.accel)
       << " m/s^2, lane " << ego.lane_id << "\n\n"
       << "Give your reasoning, then a final line 'Decision: <AC|DC|LCL|LCR|IDLE|STOP>'.\n";
    return os.str();
}

Decision parse_decision(const std::string& text) {
    // last "Decision:" line wins
    std::size_t pos = text.rfind("Decision:");
    if (pos == std::string::npos)
        throw BackendError("backend output has no 'Decision:' line", text);
    std::size_t start = pos + std::string("Decision:").size();
    while (start < text.size() && (text[start] == ' ' || text[start] == '\t')) ++start;
    std::size_t end = start;
    while (end < text.size() && std::isalpha(static_cast<unsigned char>(text[end]))) ++end;
    const std::string token = text.substr(start, end - start);
    const auto action = meta_action_from_string(token);
    if (!action)
        throw BackendError("backend output names an unknown action '" + token + "'", text);
    Decision d;
    d.action = *action;
    d.reasoning = text.substr(0, pos);
    while (!d.reasoning.empty() &&
           (d.reasoning.back() == '\n' || d.reasoning.back() == ' ')) {
        d.reasoning.pop_back();
    }
    return d;
}

Decision analytic_decide(ReasonerBackend& backend, const std::string& traffic_rules,
                         const SceneDescription& description, const NavigationHint& navigation,
                         const EgoInfo& ego) {
    DecisionRequest req;
    req.traffic_rules = traffic_rules;
    req.description = description;
    req.navigation = navigation;
    req.ego = ego;
    req.prompt_text = assemble_context(traffic_rules, {}, description, navigation, ego);
    return backend.decide(req);
}

Decision heuristic_decide(ReasonerBackend& backend, const std::string& traffic_rules,
                          const std::vector<FewShot>& shots, const SceneDescription& description,
                          const NavigationHint& navigation, const EgoInfo& ego) {
    DecisionRequest req;
    req.traffic_rules = traffic_rules;
    req.description = description;
    req.navigation = navigation;
    req.ego = ego;
    req.shots = shots;
    req.prompt_text = assemble_context(traffic_rules, shots, description, navigation, ego);
    return backend.decide(req);
}

std::unique_ptr<ReasonerBackend> make_backend(const std::string& name) {
    if (name == "rule") return std::make_unique<RuleOracle>();
    if (name == "naive") return std::make_unique<NaiveOracle>();
    if (name == "external") return std::make_unique<ExternalChatBackend>(ChatEndpoint::from_env());
    throw std::runtime_error("unknown backend '" + name + "'");
}

}  // namespace dd::agent
