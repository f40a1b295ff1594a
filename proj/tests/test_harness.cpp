#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "dualdrive/harness/ablation.hpp"
#include "dualdrive/harness/episode.hpp"
#include "dualdrive/harness/metrics.hpp"
#include "support/worlds.hpp"

using namespace dd;
using namespace dd::harness;
namespace fs = std::filesystem;

namespace {

std::string write_scenario(const nlohmann::json& j, const std::string& name) {
    fs::create_directories("build/test_scenarios");
    const std::string path = "build/test_scenarios/" + name;
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

EpisodeConfig basic_config(const std::string& scenario_path) {
    EpisodeConfig cfg;
    cfg.scenario_path = scenario_path;
    cfg.mode = Mode::analytic;
    cfg.seed = 7;
    return cfg;
}

std::vector<agent::MetaAction> actions_of(const EpisodeReport& r) {
    std::vector<agent::MetaAction> out;
    for (const auto& d : r.decisions) out.push_back(d.action);
    return out;
}

}  // namespace

TEST_CASE("metrics arithmetic: clean, single and multi-infraction") {
    const PenaltyTable table;
    const Metrics clean = compute_metrics(1.0, {}, table);
    CHECK(clean.rc == 100.0);
    CHECK(clean.is == 1.0);
    CHECK(clean.ds == 100.0);

    sim::AccidentInfo veh;
    veh.kind = sim::AccidentInfo::Kind::collision_vehicle;
    const Metrics one = compute_metrics(1.0, {veh}, table);
    CHECK(one.ds == doctest::Approx(60.0));

    const Metrics half = compute_metrics(0.5, {}, table);
    CHECK(half.ds == doctest::Approx(50.0));

    sim::AccidentInfo red;
    red.kind = sim::AccidentInfo::Kind::red_light_violation;
    const Metrics multi = compute_metrics(1.0, {veh, red}, table);
    CHECK(multi.is == doctest::Approx(0.42));
    CHECK(multi.ds == doctest::Approx(42.0));
    CHECK(multi.ds == doctest::Approx(multi.rc * multi.is));
}

TEST_CASE("clean straight route scores a perfect driving score") {
    const auto path = write_scenario(worlds::minimal_scenario(260.0, 200.0, 0.0, 8.0),
                                     "clean.json");
    const EpisodeConfig cfg = basic_config(path);
    const EpisodeReport report = run_episode(cfg, "build/test_scenarios/clean_log.jsonl");
    CHECK(report.termination == "route_complete");
    CHECK(report.metrics.rc == doctest::Approx(100.0));
    CHECK(report.metrics.is == doctest::Approx(1.0));
    CHECK(report.metrics.ds == doctest::Approx(100.0));
    CHECK(report.infractions.empty());
    CHECK(report.decisions.size() > 10);

    // DS = RC * IS holds exactly on the emitted report
    CHECK(report.metrics.ds == report.metrics.rc * report.metrics.is);

    // log-file route computes the same metrics
    const Metrics from_log =
        compute_metrics_from_log("build/test_scenarios/clean_log.jsonl", cfg.penalties);
    CHECK(from_log.rc == doctest::Approx(report.metrics.rc));
    CHECK(from_log.ds == doctest::Approx(report.metrics.ds));
}

TEST_CASE("same config and seed reproduce the decision trace") {
    const auto path = write_scenario(worlds::minimal_scenario(260.0, 200.0), "repeat.json");
    const EpisodeConfig cfg = basic_config(path);
    const EpisodeReport a = run_episode(cfg);
    const EpisodeReport b = run_episode(cfg);
    CHECK(actions_of(a) == actions_of(b));
    CHECK(a.metrics.ds == b.metrics.ds);
    CHECK(a.ticks == b.ticks);
}

TEST_CASE("config echo is sufficient to replay the episode") {
    const auto path = write_scenario(worlds::minimal_scenario(260.0, 200.0), "replay.json");
    const EpisodeConfig cfg = basic_config(path);
    const EpisodeReport a = run_episode(cfg);
    const EpisodeConfig rehydrated = EpisodeConfig::from_json(a.config_echo);
    const EpisodeReport b = run_episode(rehydrated);
    CHECK(actions_of(a) == actions_of(b));
    CHECK(a.metrics.ds == b.metrics.ds);
}

TEST_CASE("analytic mode inserts one experience per decision tick before revise") {
    const auto path = write_scenario(worlds::minimal_scenario(120.0, 80.0, 0.0, 8.0),
                                     "analytic_bank.json");
    EpisodeConfig cfg = basic_config(path);
    agent::MemoryBank bank;
    const EpisodeReport report = run_episode(cfg, bank);
    CHECK(report.bank_inserts == static_cast<long>(report.decisions.size()));
    // revise may drop duplicates afterwards; what remains is a subset
    CHECK(bank.size() + static_cast<std::size_t>(report.bank_removed_by_revise) ==
          static_cast<std::size_t>(report.bank_inserts));
}

TEST_CASE("heuristic mode without reflection leaves the bank unchanged") {
    const auto scenario = write_scenario(worlds::minimal_scenario(120.0, 80.0), "heur.json");

    // grow a bank analytically first
    EpisodeConfig acfg = basic_config(scenario);
    agent::MemoryBank bank;
    run_episode(acfg, bank);
    const std::size_t grown = bank.size();
    REQUIRE(grown > 0);

    EpisodeConfig hcfg = basic_config(scenario);
    hcfg.mode = Mode::heuristic;
    hcfg.heuristic_backend = "rule";
    hcfg.k = 3;
    hcfg.bank_in = "unused_because_bank_passed_directly";
    hcfg.reflection = false;
    // validate() requires a bank path for k>0; the in-memory overload takes
    // the bank directly, so the path is a placeholder
    const EpisodeReport report = run_episode(hcfg, bank);
    CHECK(bank.size() == grown);
    CHECK(report.bank_inserts == 0);
}

TEST_CASE("wall-clock cap flags a timeout with partial route completion") {
    auto j = worlds::minimal_scenario(700.0, 600.0, 0.0, 6.0);
    j["limits"]["max_wall_time"] = 0.0;  // expires at the first decision tick
    const auto path = write_scenario(j, "wallcap.json");
    const EpisodeReport report = run_episode(basic_config(path));
    CHECK(report.timeout);
    CHECK(report.termination == "wall_time_cap");
    CHECK(report.metrics.rc < 100.0);
}

TEST_CASE("sim-time cap terminates long episodes deterministically") {
    auto j = worlds::minimal_scenario(700.0, 600.0, 0.0, 2.0);
    j["limits"]["max_sim_time"] = 5.0;
    const auto path = write_scenario(j, "simcap.json");
    const EpisodeReport report = run_episode(basic_config(path));
    CHECK(report.termination == "sim_time_cap");
    CHECK(report.sim_time == doctest::Approx(5.0).epsilon(0.05));
    CHECK(report.metrics.rc < 100.0);
}

TEST_CASE("episode log lines parse and carry the expected record types") {
    const auto path = write_scenario(worlds::minimal_scenario(120.0, 80.0), "logtypes.json");
    const std::string log_path = "build/test_scenarios/logtypes.jsonl";
    run_episode(basic_config(path), log_path);
    std::ifstream in(log_path);
    REQUIRE(in.good());
    std::string line;
    bool saw_meta = false, saw_decision = false, saw_tick = false, saw_result = false;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);  // every line is valid JSON
        const std::string type = j.at("type");
        saw_meta |= type == "meta";
        saw_decision |= type == "decision";
        saw_tick |= type == "tick";
        saw_result |= type == "result";
    }
    CHECK(saw_meta);
    CHECK(saw_decision);
    CHECK(saw_tick);
    CHECK(saw_result);
}

TEST_CASE("config validation rejects heuristic k>0 without a bank") {
    EpisodeConfig cfg;
    cfg.scenario_path = "x.json";
    cfg.mode = Mode::heuristic;
    cfg.k = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.k = 0;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config JSON round trip") {
    EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/straight_200m.json";
    cfg.mode = Mode::heuristic;
    cfg.k = 0;
    cfg.seed = 123;
    cfg.penalties.multipliers[sim::AccidentInfo::Kind::collision_vehicle] = 0.55;
    cfg.planner.weight_jerk = 0.25;
    const EpisodeConfig back = EpisodeConfig::from_json(cfg.to_json());
    CHECK(back.scenario_path == cfg.scenario_path);
    CHECK(back.mode == cfg.mode);
    CHECK(back.seed == cfg.seed);
    CHECK(back.penalties.multipliers.at(sim::AccidentInfo::Kind::collision_vehicle) == 0.55);
    CHECK(back.planner.weight_jerk == 0.25);
}

TEST_CASE("reflection loop with rounds=0 equals a single episode") {
    const auto path = write_scenario(worlds::minimal_scenario(160.0, 120.0), "loop0.json");
    EpisodeConfig cfg = basic_config(path);
    cfg.mode = Mode::heuristic;
    cfg.heuristic_backend = "rule";
    cfg.k = 0;
    cfg.reflection = true;

    agent::MemoryBank bank_a;
    const auto rounds = run_reflection_loop(cfg, 0, bank_a);
    REQUIRE(rounds.size() == 1);

    agent::MemoryBank bank_b;
    const EpisodeReport single = run_episode(cfg, bank_b);
    CHECK(actions_of(rounds[0]) == actions_of(single));
    CHECK(rounds[0].metrics.ds == single.metrics.ds);
}

TEST_CASE("ablation grid emits one row per (seed, size, k) and a reproducible csv") {
    const auto scenario = write_scenario(worlds::minimal_scenario(120.0, 80.0), "ablate.json");

    // build a bank of 40 analytic experiences
    EpisodeConfig acfg = basic_config(scenario);
    agent::MemoryBank bank;
    run_episode(acfg, bank);
    REQUIRE(bank.size() >= 20);

    EpisodeConfig base = basic_config(scenario);
    base.heuristic_backend = "rule";
    const std::vector<int> ks{0, 1};
    const std::vector<std::size_t> sizes{10, 20};
    const std::vector<unsigned long> seeds{1, 2};
    const AblationResult result = run_ablation(base, ks, sizes, seeds, bank);
    CHECK(result.rows.size() == ks.size() * sizes.size() * seeds.size());

    const std::string csv = "build/test_scenarios/ablation.csv";
    write_ablation_csv(csv, result);
    const AblationResult back = read_ablation_csv(csv);
    REQUIRE(back.rows.size() == result.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
        CHECK(back.rows[i].k == result.rows[i].k);
        CHECK(back.rows[i].bank_size == result.rows[i].bank_size);
        CHECK(back.rows[i].metrics.ds == result.rows[i].metrics.ds);
    }

    // k = 0 rows equal plain zero-shot runs
    EpisodeConfig zero = base;
    zero.mode = Mode::heuristic;
    zero.k = 0;
    zero.seed = seeds[0];
    agent::MemoryBank empty;
    const EpisodeReport zshot = run_episode(zero, empty);
    for (const AblationRow& row : result.rows) {
        if (row.k == 0 && row.seed == seeds[0]) {
            CHECK(row.metrics.ds == doctest::Approx(zshot.metrics.ds));
        }
    }

    // deterministic: rerun gives identical rows
    const AblationResult again = run_ablation(base, ks, sizes, seeds, bank);
    REQUIRE(again.rows.size() == result.rows.size());
    for (std::size_t i = 0; i < again.rows.size(); ++i) {
        CHECK(again.rows[i].metrics.ds == result.rows[i].metrics.ds);
    }
}

TEST_CASE("oversized ablation size clamps with a warning") {
    const auto scenario = write_scenario(worlds::minimal_scenario(120.0, 80.0), "clamp.json");
    EpisodeConfig acfg = basic_config(scenario);
    agent::MemoryBank bank;
    run_episode(acfg, bank);

    EpisodeConfig base = basic_config(scenario);
    base.heuristic_backend = "rule";
    const AblationResult result = run_ablation(base, {1}, {100000}, {3}, bank);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].bank_size == bank.size());
    CHECK_FALSE(result.warnings.empty());
}

TEST_CASE("bank stats split decisions and provenance") {
    agent::MemoryBank bank;
    std::mt19937_64 rng(1);
    auto tok = [&rng] {
        SceneToken t;
        t.values.assign(256, 0.0);
        std::normal_distribution<double> n(0.0, 1.0);
        for (double& v : t.values) v = n(rng);
        return t;
    };
    for (int i = 0; i < 4; ++i) {
        agent::Experience e;
        e.token = tok();
        e.decision = agent::MetaAction::AC;
        e.provenance = agent::Provenance::analytic;
        bank.insert(std::move(e));
    }
    for (int i = 0; i < 3; ++i) {
        agent::Experience e;
        e.token = tok();
        e.decision = agent::MetaAction::DC;
        e.provenance = agent::Provenance::reflection;
        bank.insert(std::move(e));
    }
    const BankStats stats = bank_stats(bank);
    CHECK(stats.size == 7);
    CHECK(stats.analytic == 4);
    CHECK(stats.reflection == 3);
    CHECK(stats.decisions.at(agent::MetaAction::AC) == 4);
    CHECK(stats.decisions.at(agent::MetaAction::DC) == 3);
}

TEST_CASE("red-light scenario: analytic agent stops during red and proceeds on green") {
    EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/red_light.json";
    cfg.mode = Mode::analytic;
    cfg.seed = 7;
    agent::MemoryBank bank;
    const EpisodeReport report = run_episode(cfg, bank);
    CHECK(report.termination == "route_complete");
    CHECK(report.infractions.empty());
    CHECK(report.metrics.ds == doctest::Approx(100.0));
    bool saw_stop = false;
    for (const auto& d : report.decisions) saw_stop |= d.action == agent::MetaAction::STOP;
    CHECK(saw_stop);
}

TEST_CASE("lane-change scenario: navigation hint drives an LCL and the route completes") {
    EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/lane_change.json";
    cfg.mode = Mode::analytic;
    cfg.seed = 7;
    agent::MemoryBank bank;
    const EpisodeReport report = run_episode(cfg, bank);
    CHECK(report.termination == "route_complete");
    CHECK(report.infractions.empty());
    bool saw_lcl = false;
    for (const auto& d : report.decisions) saw_lcl |= d.action == agent::MetaAction::LCL;
    CHECK(saw_lcl);
}

TEST_CASE("lead-brake scenario: naive heuristic collides, full-table analytic does not") {
    EpisodeConfig naive_cfg;
    naive_cfg.scenario_path = "scenarios/lead_brake.json";
    naive_cfg.mode = Mode::heuristic;
    naive_cfg.heuristic_backend = "naive";
    naive_cfg.k = 0;
    naive_cfg.seed = 7;
    agent::MemoryBank bank;
    const EpisodeReport naive_report = run_episode(naive_cfg, bank);
    REQUIRE_FALSE(naive_report.infractions.empty());
    CHECK(naive_report.infractions.front().kind == sim::AccidentInfo::Kind::collision_vehicle);

    EpisodeConfig rule_cfg = naive_cfg;
    rule_cfg.mode = Mode::analytic;
    agent::MemoryBank bank2;
    const EpisodeReport rule_report = run_episode(rule_cfg, bank2);
    CHECK(rule_report.infractions.empty());  // TTC rule brakes early enough
}

TEST_CASE("repeated reflection rounds eventually clear the red-light violation") {
    EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/red_light.json";
    cfg.mode = Mode::heuristic;
    cfg.heuristic_backend = "naive";
    cfg.k = 3;
    cfg.reflection = true;
    cfg.seed = 7;

    agent::MemoryBank bank;
    const auto rounds = run_reflection_loop(cfg, 6, bank);
    REQUIRE(rounds.size() == 7);
    CHECK(rounds.front().metrics.ds < 100.0);
    CHECK(rounds.back().metrics.ds == doctest::Approx(100.0));
    CHECK(rounds.back().infractions.empty());
    // one corrected experience per violating round
    long violations = 0;
    for (const auto& r : rounds) violations += static_cast<long>(r.infractions.size());
    CHECK(bank.size() == static_cast<std::size_t>(violations));
}

TEST_CASE("heuristic retrieval episodes are deterministic under a fixed seed") {
    EpisodeConfig cfg;
    cfg.scenario_path = "scenarios/lead_brake.json";
    cfg.mode = Mode::heuristic;
    cfg.heuristic_backend = "naive";
    cfg.k = 3;
    cfg.reflection = true;
    cfg.seed = 7;

    auto run_two_rounds = [&] {
        agent::MemoryBank bank;
        const auto rounds = run_reflection_loop(cfg, 1, bank);
        std::vector<std::string> trace;
        for (const auto& r : rounds) {
            for (const auto& d : r.decisions) {
                trace.push_back(std::to_string(d.tick) + agent::to_string(d.action));
            }
        }
        return trace;
    };
    CHECK(run_two_rounds() == run_two_rounds());
}
