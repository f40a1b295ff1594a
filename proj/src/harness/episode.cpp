#include "dualdrive/harness/episode.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <random>

#include "dualdrive/agent/history.hpp"
#include "dualdrive/agent/prompts.hpp"
#include "dualdrive/agent/reasoner.hpp"
#include "dualdrive/agent/reflection.hpp"
#include "dualdrive/control/dense_path.hpp"
#include "dualdrive/control/pid.hpp"
#include "dualdrive/control/planner.hpp"
#include "dualdrive/encoder/encoder.hpp"
#include "dualdrive/encoder/features.hpp"
#include "dualdrive/perception/perceiver.hpp"
#include "dualdrive/sim/scenario.hpp"
#include "dualdrive/sim/world.hpp"

namespace dd::harness {

using agent::MetaAction;
using nlohmann::json;

namespace {

int intent_of(agent::NavigationHint::Maneuver m) {
    switch (m) {
        case agent::NavigationHint::Maneuver::straight: return 0;
        case agent::NavigationHint::Maneuver::left: return 1;
        case agent::NavigationHint::Maneuver::right: return 2;
        case agent::NavigationHint::Maneuver::lane_change_left: return 3;
        case agent::NavigationHint::Maneuver::lane_change_right: return 4;
    }
    return 0;
}

agent::NavigationHint navigation_hint(const control::DensePath& route, const sim::LaneGraph& lanes,
                                      double ego_route_s, int ego_lane_id, double target_speed) {
    agent::NavigationHint nav;
    nav.target_speed = target_speed;
    nav.next = agent::NavigationHint::Maneuver::straight;
    nav.distance = std::max(0.0, route.length() - ego_route_s);

    const sim::Lane* ego_lane = lanes.find_lane(ego_lane_id);
    if (!ego_lane) return nav;
    for (const control::PathPoint& pt : route.points) {
        if (pt.s < ego_route_s) continue;
        if (pt.s > ego_route_s + 60.0) break;
        if (pt.lane_id == ego_lane_id || pt.lane_id < 0) continue;
        if (ego_lane->left && *ego_lane->left == pt.lane_id) {
            nav.next = agent::NavigationHint::Maneuver::lane_change_left;
            nav.distance = pt.s - ego_route_s;
            break;
        }
        if (ego_lane->right && *ego_lane->right == pt.lane_id) {
            nav.next = agent::NavigationHint::Maneuver::lane_change_right;
            nav.distance = pt.s - ego_route_s;
            break;
        }
        // successor-chain change of lane id reads as straight
    }
    return nav;
}

std::vector<control::ObstaclePrediction> predict_obstacles(const sim::World& world) {
    std::vector<control::ObstaclePrediction> out;
    for (const sim::ObjectState& obj : world.object_states()) {
        control::ObstaclePrediction p;
        p.id = obj.id;
        p.position = obj.position;
        p.velocity = obj.velocity;
        p.heading = obj.heading;
        p.half_extents = obj.half_extents;
        out.push_back(p);
    }
    return out;
}

class EpisodeLogger {
public:
    explicit EpisodeLogger(const std::string& path) {
        if (!path.empty()) {
            out_.open(path);
            if (!out_) throw std::runtime_error("cannot write episode log: " + path);
        }
    }
    void line(const json& j) {
        if (out_.is_open()) out_ << j.dump() << "\n";
    }

private:
    std::ofstream out_;
};

}  // namespace

std::string EpisodeReport::to_json() const {
    json infs = json::array();
    for (const sim::AccidentInfo& i : infractions) {
        infs.push_back({{"kind", sim::to_string(i.kind)},
                        {"tick", i.timestep},
                        {"location", {i.location.x, i.location.y}}});
    }
    json decs = json::array();
    for (const DecisionTraceEntry& d : decisions) {
        decs.push_back({{"tick", d.tick},
                        {"time", d.time},
                        {"action", agent::to_string(d.action)},
                        {"top1_similarity", d.top1_similarity},
                        {"backend_fallback", d.backend_fallback},
                        {"lane_change_downgraded", d.lane_change_downgraded},
                        {"emergency_trajectory", d.emergency_trajectory}});
    }
    json j{{"rc", metrics.rc},
           {"is", metrics.is},
           {"ds", metrics.ds},
           {"infractions", infs},
           {"decisions", decs},
           {"termination", termination},
           {"timeout", timeout},
           {"sim_time", sim_time},
           {"ticks", ticks},
           {"wall_seconds", wall_seconds},
           {"bank_inserts", bank_inserts},
           {"bank_removed_by_revise", bank_removed_by_revise},
           {"config", json::parse(config_echo)},
           {"prompt_hashes", prompt_hashes}};
    return j.dump(2);
}

EpisodeReport run_episode(const EpisodeConfig& config, agent::MemoryBank& bank,
                          const std::string& log_path, long episode_index) {
    config.validate();
    const auto wall_start = std::chrono::steady_clock::now();

    const sim::Scenario scenario = sim::load_scenario_file(config.scenario_path);
    sim::World world(scenario, config.rates.physics_hz);
    const control::DensePath route = control::densify(scenario.route, scenario.lane_graph);
    std::vector<Vec2> route_pts;
    route_pts.reserve(route.points.size());
    for (const control::PathPoint& p : route.points) route_pts.push_back(p.position);
    sim::RouteProgressTracker progress(route_pts);

    perception::GroundTruthPerceiver perceiver{
        perception::PerceiverConfig{config.perceiver_frames, {}, 0.2}};

    encoder::EncoderConfig enc_cfg;
    encoder::EncoderParams enc_params;
    if (!config.encoder_params_path.empty()) {
        std::tie(enc_cfg, enc_params) = encoder::load_params(config.encoder_params_path);
    } else {
        enc_cfg.seed = config.seed;
        std::mt19937_64 rng(enc_cfg.seed);
        enc_params = encoder::EncoderParams::init(enc_cfg, rng);
    }
    encoder::GridRasterizer rasterizer(enc_cfg.grid_n, enc_cfg.grid_c);

    const agent::PromptSet prompts = config.prompts_dir.empty()
                                         ? agent::PromptSet::builtin()
                                         : agent::PromptSet::load_dir(config.prompts_dir);

    std::unique_ptr<agent::ReasonerBackend> analytic = agent::make_backend(config.analytic_backend);
    std::unique_ptr<agent::ReasonerBackend> heuristic;
    if (config.mode == Mode::heuristic) heuristic = agent::make_backend(config.heuristic_backend);

    const int decision_period =
        static_cast<int>(std::lround(config.rates.physics_hz / config.rates.decision_hz));
    const int history_period =
        static_cast<int>(std::lround(config.rates.physics_hz / config.rates.history_hz));

    EpisodeLogger log(log_path);
    EpisodeReport report;
    report.config_echo = config.to_json();
    report.prompt_hashes = {{"system", prompts.system_hash()},
                            {"traffic_rules", prompts.traffic_rules_hash()},
                            {"reflection", prompts.reflection_hash()}};
    log.line(json{{"type", "meta"},
                  {"scenario", scenario.name},
                  {"episode", episode_index},
                  {"config", json::parse(report.config_echo)},
                  {"prompt_hashes", report.prompt_hashes}});

    std::ofstream dataset_sink;
    if (!config.dataset_out.empty()) {
        dataset_sink.open(config.dataset_out);
        if (!dataset_sink) {
            throw std::runtime_error("cannot write dataset file: " + config.dataset_out);
        }
    }
    struct PendingRecord {
        Eigen::MatrixXd features;
        int intent = 0;
        double speed = 0.0;
        double steer_sum = 0.0;
        double brake_sum = 0.0;
        int samples = 0;
        bool active = false;
    } pending;
    auto flush_dataset_record = [&] {
        if (!pending.active || pending.samples == 0) {
            pending.active = false;
            return;
        }
        const std::vector<double> flat(pending.features.data(),
                                       pending.features.data() + pending.features.size());
        dataset_sink << json{{"features", flat},
                             {"shape", {pending.features.rows(), pending.features.cols()}},
                             {"intent", pending.intent},
                             {"speed", pending.speed},
                             {"steer", pending.steer_sum / pending.samples},
                             {"brake", pending.brake_sum / pending.samples}}
                            .dump()
                     << "\n";
        pending.active = false;
    };

    std::deque<sim::WorldSnapshot> window;
    agent::HistoryQueue history;
    control::TrajectoryTracker tracker;
    bool off_road_active = false;
    const long max_ticks =
        static_cast<long>(std::lround(scenario.limits.max_sim_time * config.rates.physics_hz));

    while (true) {
        const long tick = world.tick_index();

        if (tick % decision_period == 0) {
            if (scenario.limits.max_wall_time) {
                const double elapsed =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                        .count();
                if (elapsed > *scenario.limits.max_wall_time) {
                    report.termination = "wall_time_cap";
                    report.timeout = true;
                    break;
                }
            }

            window.push_back(world.snapshot());
            while (static_cast<int>(window.size()) > config.perceiver_frames) window.pop_front();

            const perception::SceneDescription description = perceiver.describe_scene(window);
            const sim::WorldSnapshot& snap = window.back();
            const control::WorldKinematics ego_kin{world.ego().position, world.ego().heading,
                                                   world.ego().speed, world.ego().acceleration};
            const control::FrenetState ego_frenet = control::frenet_project(route, ego_kin);
            const agent::NavigationHint nav =
                navigation_hint(route, scenario.lane_graph, ego_frenet.s, snap.ego.lane_id,
                                scenario.ego.target_speed);
            const agent::EgoInfo ego_info{world.ego().speed, world.ego().acceleration,
                                          snap.ego.lane_id, scenario.ego.target_speed};

            const Eigen::MatrixXd features = rasterizer.features(snap);
            if (dataset_sink.is_open()) {
                flush_dataset_record();
                pending.features = features;
                pending.intent = intent_of(nav.next);
                pending.speed = world.ego().speed;
                pending.steer_sum = pending.brake_sum = 0.0;
                pending.samples = 0;
                pending.active = true;
            }
            const Eigen::VectorXd ego_vec =
                encoder::ego_state_vector(intent_of(nav.next), world.ego().speed);
            const SceneToken token = encoder::encode(enc_cfg, enc_params, features, ego_vec);

            DecisionTraceEntry trace;
            trace.tick = tick;
            trace.time = world.time();

            agent::Decision decision;
            std::vector<agent::FewShot> shots;
            try {
                if (config.mode == Mode::analytic) {
                    decision = agent::analytic_decide(*analytic, prompts.traffic_rules,
                                                      description, nav, ego_info);
                } else {
                    if (config.k > 0) {
                        for (const agent::RetrievedExperience& r :
                             bank.retrieve_topk(token, config.k)) {
                            shots.push_back({r.experience.description, r.experience.reasoning,
                                             r.experience.decision, r.similarity,
                                             r.experience.provenance});
                        }
                        if (!shots.empty()) trace.top1_similarity = shots.front().similarity;
                    }
                    decision = agent::heuristic_decide(*heuristic, prompts.traffic_rules, shots,
                                                       description, nav, ego_info);
                }
            } catch (const agent::BackendError& e) {
                decision.action = MetaAction::DC;  // safe fallback
                decision.reasoning = std::string("backend failure: ") + e.what();
                trace.backend_fallback = true;
                log.line(json{{"type", "backend_error"},
                              {"tick", tick},
                              {"what", e.what()},
                              {"raw", e.raw_output}});
            }

            if (config.mode == Mode::analytic && !trace.backend_fallback) {
                agent::Experience exp;
                exp.token = token;
                exp.description = description;
                exp.reasoning = decision.reasoning;
                exp.decision = decision.action;
                exp.provenance = agent::Provenance::analytic;
                exp.created_at = {episode_index, tick};
                bank.insert(std::move(exp));
                ++report.bank_inserts;
            }
            if (config.mode == Mode::heuristic && tick % history_period == 0) {
                agent::HistoryRecord rec;
                rec.token = token;
                rec.description = description;
                rec.reasoning = decision.reasoning;
                rec.decision = decision.action;
                rec.navigation = nav;
                rec.ego = ego_info;
                rec.tick = tick;
                history.push(std::move(rec));
            }

            // plan the trajectory for this decision
            MetaAction planned_action = decision.action;
            control::Trajectory traj;
            try {
                traj = control::plan(planned_action, ego_frenet, route,
                                     world.lane_graph()->lane(snap.ego.lane_id).width,
                                     scenario.ego.target_speed, predict_obstacles(world),
                                     scenario.ego.half_extents, config.planner);
            } catch (const std::exception& e) {
                // LCL/LCR without an adjacent lane: downgrade and hold
                trace.lane_change_downgraded = true;
                log.line(json{{"type", "downgrade"}, {"tick", tick}, {"what", e.what()}});
                planned_action = MetaAction::IDLE;
                traj = control::plan(planned_action, ego_frenet, route,
                                     world.lane_graph()->lane(snap.ego.lane_id).width,
                                     scenario.ego.target_speed, predict_obstacles(world),
                                     scenario.ego.half_extents, config.planner);
            }
            trace.emergency_trajectory = traj.emergency;
            tracker.set_trajectory(traj);

            trace.action = decision.action;
            trace.reasoning = decision.reasoning;
            report.decisions.push_back(trace);
            log.line(json{{"type", "decision"},
                          {"tick", tick},
                          {"time", world.time()},
                          {"action", agent::to_string(decision.action)},
                          {"reasoning", decision.reasoning},
                          {"top1_similarity", trace.top1_similarity},
                          {"emergency", traj.emergency},
                          {"candidate", traj.candidate_id}});
        }

        const sim::Control control = tracker.control_step(world.ego(), world.dt());
        if (pending.active) {
            pending.steer_sum += control.steer;
            pending.brake_sum += control.brake;
            ++pending.samples;
        }
        world.tick(control);
        const double prog = progress.update(world.ego().position);
        log.line(json{{"type", "tick"},
                      {"tick", world.tick_index()},
                      {"time", world.time()},
                      {"x", world.ego().position.x},
                      {"y", world.ego().position.y},
                      {"heading", world.ego().heading},
                      {"speed", world.ego().speed},
                      {"progress", prog}});

        if (const auto& accident = world.current_accident()) {
            const bool is_off_road = accident->kind == sim::AccidentInfo::Kind::off_road;
            const bool newly = !is_off_road || !off_road_active;
            if (newly) {
                report.infractions.push_back(*accident);
                log.line(json{{"type", "accident"},
                              {"kind", sim::to_string(accident->kind)},
                              {"tick", accident->timestep},
                              {"location", {accident->location.x, accident->location.y}},
                              {"involved", accident->involved}});
                if (config.reflection && config.mode == Mode::heuristic && !history.empty()) {
                    const agent::Experience corrected = agent::reflect(
                        *analytic, prompts.reflection, *accident, history);
                    agent::Experience exp = corrected;
                    exp.created_at.episode = episode_index;
                    bank.insert(std::move(exp));
                    ++report.bank_inserts;
                    log.line(json{{"type", "reflection"},
                                  {"corrected_tick", corrected.created_at.tick},
                                  {"decision", agent::to_string(corrected.decision)},
                                  {"fallback", corrected.reflection_fallback}});
                }
            }
            off_road_active = is_off_road;
            const bool terminal = accident->kind == sim::AccidentInfo::Kind::collision_vehicle ||
                                  accident->kind == sim::AccidentInfo::Kind::collision_pedestrian ||
                                  accident->kind == sim::AccidentInfo::Kind::collision_static;
            if (terminal) {
                report.termination = "collision";
                break;
            }
        } else {
            off_road_active = false;
        }

        if (progress.current() >= 1.0 - 1e-9) {
            report.termination = "route_complete";
            break;
        }
        if (world.tick_index() >= max_ticks) {
            report.termination = "sim_time_cap";
            break;
        }
    }

    flush_dataset_record();
    if (config.mode == Mode::analytic) {
        report.bank_removed_by_revise = static_cast<long>(bank.revise());
    }

    report.sim_time = world.time();
    report.ticks = world.tick_index();
    report.metrics = compute_metrics(progress.current(), report.infractions, config.penalties);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    log.line(json{{"type", "result"},
                  {"rc", report.metrics.rc},
                  {"is", report.metrics.is},
                  {"ds", report.metrics.ds},
                  {"termination", report.termination},
                  {"sim_time", report.sim_time}});
    return report;
}

EpisodeReport run_episode(const EpisodeConfig& config, const std::string& log_path) {
    agent::MemoryBank bank;
    if (!config.bank_in.empty()) bank = agent::MemoryBank::load(config.bank_in);
    EpisodeReport report = run_episode(config, bank, log_path);
    if (!config.bank_out.empty()) bank.persist(config.bank_out);
    return report;
}

}  // namespace dd::harness
