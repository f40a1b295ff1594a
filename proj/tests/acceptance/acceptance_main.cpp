// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run from the repository root (scenario paths are relative).
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dualdrive/agent/experience.hpp"
#include "dualdrive/control/pid.hpp"
#include "dualdrive/control/planner.hpp"
#include "dualdrive/control/quintic.hpp"
#include "dualdrive/encoder/precision.hpp"
#include "dualdrive/encoder/training.hpp"
#include "dualdrive/harness/ablation.hpp"
#include "dualdrive/harness/episode.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/worlds.hpp"

using namespace dd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---- 1. contrastive-loss gradient check -----------------------------------

Outcome check_gradients() {
    double worst = 0.0;
    int idx = 0;
    for (auto pooling : {encoder::EncoderConfig::Pooling::max_pool,
                         encoder::EncoderConfig::Pooling::attention}) {
        for (int i = 0; i < 5; ++i) {
            const auto inst = gradcheck::random_instance(1000 + 17 * idx, pooling, 64);
            const double err = gradcheck::relative_gradient_error(inst, 2000 + idx);
            worst = std::max(worst, err);
            ++idx;
        }
    }
    std::ostringstream os;
    os << "10 instances (64 keys, dim 128), worst relative error " << worst;
    return {worst < 1e-4, os.str()};
}

// ---- 2. momentum recurrence ------------------------------------------------

Outcome check_momentum_recurrence() {
    encoder::EncoderConfig cfg;
    cfg.grid_n = 4;
    cfg.grid_c = 8;
    cfg.ego_hidden = 8;
    cfg.fusion_hidden = 16;
    cfg.batch_size = 16;
    cfg.dictionary_capacity = 64;
    cfg.epochs = 1;
    cfg.seed = 5;
    const auto dataset = oracles::separable_dataset(cfg, 3 * cfg.batch_size, 8);

    struct Recorder : encoder::TrainObserver {
        std::vector<encoder::EncoderParams> params;
        std::vector<encoder::EncoderParams> momentum;
        void after_step(long, const encoder::EncoderParams& p,
                        const encoder::EncoderParams& m) override {
            params.push_back(p);
            momentum.push_back(m);
        }
    } rec;
    const auto result = encoder::train(cfg, dataset, &rec);
    if (rec.params.size() != 3) return {false, "expected a 3-step trace"};

    std::mt19937_64 rng(cfg.seed);
    encoder::EncoderParams replay = encoder::EncoderParams::init(cfg, rng);
    double worst = 0.0;
    for (std::size_t step = 0; step < rec.params.size(); ++step) {
        encoder::momentum_update(replay, rec.params[step], cfg.momentum);
        worst = std::max(worst, replay.max_abs_diff(rec.momentum[step]));
    }
    worst = std::max(worst, replay.max_abs_diff(result.momentum_params));
    std::ostringstream os;
    os << "3-step replay, max abs deviation " << worst;
    return {worst < 1e-12, os.str()};
}

// ---- 3. retrieval exactness -------------------------------------------------

Outcome check_retrieval_exactness() {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal(0.0, 1.0);
    agent::MemoryBank bank;
    std::vector<SceneToken> tokens;
    tokens.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
        SceneToken t;
        t.values.resize(SceneToken::kDim);
        for (double& v : t.values) v = normal(rng);
        agent::Experience e;
        e.token = t;
        e.decision = agent::MetaAction::IDLE;
        tokens.push_back(std::move(t));
        bank.insert(std::move(e));
    }
    SceneToken query;
    query.values.resize(SceneToken::kDim);
    for (double& v : query.values) v = normal(rng);

    for (int k : {1, 3, 5}) {
        const auto got = bank.retrieve_topk(query, k);
        const auto expect = oracles::topk_by_full_sort(tokens, query, k);
        if (got.size() != expect.size()) return {false, "size mismatch at k=" + std::to_string(k)};
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].bank_index != expect[i]) {
                return {false, "index mismatch at k=" + std::to_string(k)};
            }
        }
    }
    return {true, "k in {1,3,5} over 100000 tokens, exact index match"};
}

// ---- 4. synthetic encoder learning ------------------------------------------

Outcome check_synthetic_learning() {
    encoder::EncoderConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 3;
    const auto dataset = oracles::separable_dataset(cfg, 1000, 21);
    const std::vector<encoder::TrainingRecord> train_set(dataset.begin(), dataset.begin() + 800);
    const std::vector<encoder::TrainingRecord> query_set(dataset.begin() + 800, dataset.end());

    const auto result = encoder::train(cfg, train_set);
    bool decreasing = result.report.epochs.size() == 5;
    for (std::size_t e = 1; e < result.report.epochs.size(); ++e) {
        decreasing &= result.report.epochs[e].mean_loss < result.report.epochs[e - 1].mean_loss;
    }

    auto encode_all = [&](const std::vector<encoder::TrainingRecord>& recs) {
        std::vector<encoder::LabeledToken> out;
        for (const auto& r : recs) {
            encoder::LabeledToken lt;
            lt.token = encoder::encode(cfg, result.params, r.features,
                                       encoder::ego_state_vector(r.intent, r.speed));
            lt.steer = r.steer;
            lt.brake = r.brake;
            out.push_back(std::move(lt));
        }
        return out;
    };
    const auto prec = encoder::precision_at_k(
        encode_all(train_set), encode_all(query_set), 1, 0.04,
        encoder::EncoderConfig::BrakePartition::concurrence);

    std::ostringstream os;
    os << "precision@1 steer " << prec.steer << ", brake " << prec.brake << ", losses";
    for (const auto& e : result.report.epochs) os << " " << e.mean_loss;
    return {decreasing && prec.steer >= 0.90 && prec.brake >= 0.90, os.str()};
}

// ---- 5. quintic solver -------------------------------------------------------

Outcome check_quintic() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    std::uniform_real_distribution<double> horizon(0.5, 8.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double x0 = val(rng), v0 = val(rng), a0 = val(rng);
        const double xT = val(rng), vT = val(rng), aT = val(rng);
        const double T = horizon(rng);
        const control::QuinticPoly p = control::quintic_solve(x0, v0, a0, xT, vT, aT, T);
        worst = std::max(worst, std::abs(p.value(0.0) - x0));
        worst = std::max(worst, std::abs(p.d1(0.0) - v0));
        worst = std::max(worst, std::abs(p.d2(0.0) - a0));
        worst = std::max(worst, std::abs(p.value(T) - xT));
        worst = std::max(worst, std::abs(p.d1(T) - vT));
        worst = std::max(worst, std::abs(p.d2(T) - aT));
        const auto oracle = oracles::quintic_by_linear_solve(x0, v0, a0, xT, vT, aT, T);
        for (int i = 0; i < 6; ++i) {
            const double rel = std::abs(p.c[i] - oracle[i]) / std::max(1.0, std::abs(oracle[i]));
            if (rel > 1e-6) return {false, "coefficient diverges from the 6x6 oracle"};
        }
    }
    const control::QuinticPoly rest = control::quintic_solve(0, 0, 0, 1, 0, 0, 1);
    const bool min_jerk = std::abs(rest.c[3] - 10.0) < 1e-9 && std::abs(rest.c[4] + 15.0) < 1e-9 &&
                          std::abs(rest.c[5] - 6.0) < 1e-9;
    std::ostringstream os;
    os << "1000 instances, worst boundary residual " << worst << ", rest-to-rest coefficients "
       << (min_jerk ? "exact" : "WRONG");
    return {worst < 1e-9 && min_jerk, os.str()};
}

// ---- 6. densification --------------------------------------------------------

Outcome check_densify() {
    const sim::Scenario straight = worlds::load(worlds::minimal_scenario(30.0, 25.0));
    const control::DensePath path10 =
        control::densify({{0.0, 0.0}, {10.0, 0.0}}, straight.lane_graph);
    if (path10.points.size() != 11) {
        return {false, "10 m straight gave " + std::to_string(path10.points.size()) + " points"};
    }

    auto j = worlds::minimal_scenario();
    j["lanes"] = nlohmann::json::array({worlds::arc_lane(0, 40.0, 1.2)});
    const Vec2 end{40.0 * std::sin(1.1), 40.0 * (1.0 - std::cos(1.1))};
    j["route"] = nlohmann::json::array({{0.0, 0.0}, {end.x, end.y}});
    const sim::Scenario curved = worlds::load(j);
    const control::DensePath arc = control::densify({{0.0, 0.0}, end}, curved.lane_graph);

    double lo = 1e9, hi = 0.0;
    for (const control::DensePath* path : {&path10, &arc}) {
        for (std::size_t i = 1; i < path->points.size(); ++i) {
            const double gap = (path->points[i].position - path->points[i - 1].position).norm();
            lo = std::min(lo, gap);
            hi = std::max(hi, gap);
            if (path->points[i].s <= path->points[i - 1].s) return {false, "s not increasing"};
        }
    }
    std::ostringstream os;
    os << "spacing range [" << lo << ", " << hi << "] m; straight 10 m -> 11 points";
    return {lo >= 0.5 && hi <= 1.5, os.str()};
}

// ---- 7. PID closed loop --------------------------------------------------------

Outcome check_pid_closed_loop() {
    const sim::Scenario sc = worlds::load(worlds::minimal_scenario(420.0, 400.0));
    const control::DensePath path = control::densify({{0.0, 0.0}, {400.0, 0.0}}, sc.lane_graph);
    sim::VehicleState ego;
    control::TrajectoryTracker tracker;
    const double dt = 0.05;
    double settled_at = -1.0;
    double final_speed = 0.0;
    for (int tick = 0; tick < 20 * 20; ++tick) {
        if (tick % 10 == 0) {
            const control::WorldKinematics k{ego.position, ego.heading, ego.speed,
                                             ego.acceleration};
            const control::FrenetState f = control::frenet_project(path, k);
            control::Trajectory traj;
            for (int i = 0; i <= 100; ++i) {
                control::TrajectorySample smp;
                smp.t = i * 0.05;
                smp.s = f.s + 10.0 * smp.t;
                smp.speed = 10.0;
                smp.position = path.position_at(smp.s);
                smp.heading = path.heading_at(smp.s);
                traj.samples.push_back(smp);
            }
            tracker.set_trajectory(traj);
        }
        ego = sim::step_vehicle(ego, tracker.control_step(ego, dt), dt);
        const double t = (tick + 1) * dt;
        if (settled_at < 0.0 && std::abs(ego.speed - 10.0) <= 0.3) settled_at = t;
        if (settled_at > 0.0 && std::abs(ego.speed - 10.0) > 0.3) settled_at = -1.0;
        final_speed = ego.speed;
    }
    std::ostringstream os;
    os << "settled at " << settled_at << " s, final speed " << final_speed << " m/s";
    return {settled_at > 0.0 && settled_at <= 10.0 && std::abs(final_speed - 10.0) <= 0.3,
            os.str()};
}

// ---- 8. clean-route episode -----------------------------------------------------

Outcome check_clean_route() {
    harness::EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/straight_200m.json";
    cfg.mode = harness::Mode::analytic;
    cfg.seed = 11;

    agent::MemoryBank bank_a, bank_b;
    const auto a = harness::run_episode(cfg, bank_a);
    const auto b = harness::run_episode(cfg, bank_b);

    bool same_trace = a.decisions.size() == b.decisions.size();
    if (same_trace) {
        for (std::size_t i = 0; i < a.decisions.size(); ++i) {
            same_trace &= a.decisions[i].action == b.decisions[i].action;
        }
    }
    std::ostringstream os;
    os << "RC " << a.metrics.rc << ", IS " << a.metrics.is << ", DS " << a.metrics.ds << ", "
       << a.infractions.size() << " accidents, traces " << (same_trace ? "identical" : "DIFFER");
    return {a.metrics.rc == 100.0 && a.metrics.is == 1.0 && a.metrics.ds == 100.0 &&
                a.infractions.empty() && a.termination == "route_complete" && same_trace,
            os.str()};
}

// ---- 9. reflection efficacy -------------------------------------------------------

Outcome check_reflection_efficacy() {
    harness::EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/lead_brake.json";
    cfg.mode = harness::Mode::heuristic;
    cfg.analytic_backend = "rule";
    cfg.heuristic_backend = "naive";
    cfg.k = 3;
    cfg.reflection = true;
    cfg.seed = 7;

    agent::MemoryBank bank;
    const auto rounds = harness::run_reflection_loop(cfg, 1, bank);
    if (rounds.size() != 2) return {false, "expected 2 rounds"};
    const auto& r0 = rounds[0];
    const auto& r1 = rounds[1];

    const bool round0_collides =
        !r0.infractions.empty() &&
        r0.infractions.front().kind == sim::AccidentInfo::Kind::collision_vehicle;
    if (!round0_collides) return {false, "round 1 did not collide"};
    if (bank.size() != 1) {
        return {false, "bank grew by " + std::to_string(bank.size()) + ", expected exactly 1"};
    }
    const agent::Experience corrected = bank.at(0);
    if (corrected.provenance != agent::Provenance::reflection) {
        return {false, "inserted experience is not a reflection"};
    }

    // decision at the corrected (pre-accident) tick differs between rounds
    const long corrected_tick = corrected.created_at.tick;
    agent::MetaAction action0 = agent::MetaAction::IDLE, action1 = agent::MetaAction::IDLE;
    bool found0 = false, found1 = false;
    for (const auto& d : r0.decisions) {
        if (d.tick == corrected_tick) {
            action0 = d.action;
            found0 = true;
        }
    }
    for (const auto& d : r1.decisions) {
        if (d.tick == corrected_tick) {
            action1 = d.action;
            found1 = true;
        }
    }
    if (!found0 || !found1) return {false, "corrected tick missing from a decision trace"};
    if (action0 == action1) return {false, "decision at the pre-accident tick did not change"};

    // the identical collision (same kind within 2 m) must not recur
    bool recurred = false;
    for (const auto& inf : r1.infractions) {
        if (inf.kind == r0.infractions.front().kind &&
            (inf.location - r0.infractions.front().location).norm() <= 2.0) {
            recurred = true;
        }
    }
    std::ostringstream os;
    os << "round 1 " << sim::to_string(r0.infractions.front().kind) << " at tick "
       << r0.infractions.front().timestep << "; corrected tick " << corrected_tick << " "
       << agent::to_string(action0) << " -> " << agent::to_string(action1) << "; round 2 "
       << (r1.infractions.empty() ? "clean" : "had other infractions") << "; bank +1";
    return {!recurred, os.str()};
}

// ---- 10. metrics arithmetic ---------------------------------------------------------

Outcome check_metrics_arithmetic() {
    const harness::PenaltyTable table;
    const harness::Metrics clean = harness::compute_metrics(1.0, {}, table);
    sim::AccidentInfo veh;
    veh.kind = sim::AccidentInfo::Kind::collision_vehicle;
    sim::AccidentInfo red;
    red.kind = sim::AccidentInfo::Kind::red_light_violation;
    const harness::Metrics multi = harness::compute_metrics(1.0, {veh, red}, table);
    const harness::Metrics half = harness::compute_metrics(0.5, {veh}, table);

    const bool ok = clean.ds == 100.0 && std::abs(multi.ds - 42.0) < 1e-12 &&
                    multi.ds == multi.rc * multi.is && half.ds == half.rc * half.is;
    std::ostringstream os;
    os << "clean DS " << clean.ds << "; vehicle*red DS " << multi.ds << "; DS == RC*IS holds";
    return {ok, os.str()};
}

// ---- 11. ablation harness -----------------------------------------------------------

Outcome check_ablation() {
    // bank of 1000 synthetic analytic experiences with encoder tokens
    encoder::EncoderConfig enc_cfg;
    enc_cfg.seed = 29;
    std::mt19937_64 rng(enc_cfg.seed);
    const encoder::EncoderParams params = encoder::EncoderParams::init(enc_cfg, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    agent::MemoryBank bank;
    for (int i = 0; i < 1000; ++i) {
        Eigen::MatrixXd grid(enc_cfg.grid_n, enc_cfg.grid_c);
        for (int r = 0; r < grid.rows(); ++r) {
            for (int c = 0; c < grid.cols(); ++c) grid(r, c) = normal(rng);
        }
        agent::Experience e;
        e.token = encoder::encode(enc_cfg, params, grid,
                                  encoder::ego_state_vector(i % 8, 5.0 + (i % 10)));
        e.decision = static_cast<agent::MetaAction>(i % 6);
        e.reasoning = "synthetic";
        bank.insert(std::move(e));
    }

    harness::EpisodeConfig base;
    base.scenario_path = "scenarios/straight_200m.json";
    base.heuristic_backend = "naive";
    const std::vector<int> ks{0, 1, 3};
    const std::vector<std::size_t> sizes{90, 900};
    const std::vector<unsigned long> seeds{5};

    const auto result = harness::run_ablation(base, ks, sizes, seeds, bank);
    if (result.rows.size() != 6) {
        return {false, "expected 6 rows, got " + std::to_string(result.rows.size())};
    }

    std::filesystem::create_directories("build/acceptance");
    harness::write_ablation_csv("build/acceptance/ablation_a.csv", result);
    const auto rerun = harness::run_ablation(base, ks, sizes, seeds, bank);
    harness::write_ablation_csv("build/acceptance/ablation_b.csv", rerun);

    std::ifstream fa("build/acceptance/ablation_a.csv"), fb("build/acceptance/ablation_b.csv");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) return {false, "csv not reproducible across reruns"};

    // k = 0 rows equal plain zero-shot heuristic runs
    harness::EpisodeConfig zero = base;
    zero.mode = harness::Mode::heuristic;
    zero.k = 0;
    zero.seed = seeds[0];
    agent::MemoryBank empty;
    const auto zshot = harness::run_episode(zero, empty);
    for (const auto& row : result.rows) {
        if (row.k == 0 && row.metrics.ds != zshot.metrics.ds) {
            return {false, "k=0 row differs from the zero-shot run"};
        }
    }
    std::ostringstream os;
    os << result.rows.size() << " rows, csv reproducible, k=0 rows match zero-shot (DS "
       << zshot.metrics.ds << ")";
    return {true, os.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1. contrastive-loss gradient check vs central differences", check_gradients},
        {"2. momentum recurrence replay after a 3-step trace", check_momentum_recurrence},
        {"3. top-k retrieval equals the exhaustive-scan oracle", check_retrieval_exactness},
        {"4. synthetic separable dataset learning", check_synthetic_learning},
        {"5. quintic solver boundary residuals vs 6x6 oracle", check_quintic},
        {"6. waypoint densification spacing", check_densify},
        {"7. PID closed-loop speed regulation", check_pid_closed_loop},
        {"8. clean-route analytic episode scores DS 100", check_clean_route},
        {"9. reflection prevents the repeat collision", check_reflection_efficacy},
        {"10. metrics arithmetic DS = RC * IS", check_metrics_arithmetic},
        {"11. few-shot x memory-size ablation grid", check_ablation},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %s (%s; %.1fs)\n", outcome.pass ? "PASS" : "FAIL", c.name,
                    outcome.detail.c_str(), secs);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
