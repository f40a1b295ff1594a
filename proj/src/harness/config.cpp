#include "dualdrive/harness/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace dd::harness {

using nlohmann::json;

std::string to_string(Mode m) { return m == Mode::analytic ? "analytic" : "heuristic"; }

Mode mode_from_string(const std::string& s) {
    if (s == "analytic") return Mode::analytic;
    if (s == "heuristic") return Mode::heuristic;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

void EpisodeConfig::validate() const {
    if (scenario_path.empty()) throw std::invalid_argument("config: scenario path is required");
    if (k < 0) throw std::invalid_argument("config: k must be >= 0");
    if (mode == Mode::heuristic && k > 0 && bank_in.empty() && !reflection)
        throw std::invalid_argument(
            "config: heuristic mode with k > 0 requires a bank path (or reflection, which "
            "grows one in-loop)");
    if (rates.physics_hz <= 0 || rates.decision_hz <= 0 || rates.history_hz <= 0)
        throw std::invalid_argument("config: rates must be positive");
    if (rates.physics_hz < rates.decision_hz || rates.decision_hz < rates.history_hz)
        throw std::invalid_argument("config: expected physics_hz >= decision_hz >= history_hz");
    if (perceiver_frames < 1) throw std::invalid_argument("config: perceiver frames must be >= 1");
}

namespace {

json penalties_to_json(const PenaltyTable& t) {
    json j;
    for (const auto& [kind, mult] : t.multipliers) j[sim::to_string(kind)] = mult;
    return j;
}

PenaltyTable penalties_from_json(const json& j) {
    PenaltyTable t;
    for (const auto& [key, value] : j.items()) {
        t.multipliers[sim::accident_kind_from_string(key)] = value.get<double>();
    }
    return t;
}

json planner_to_json(const control::PlannerConfig& p) {
    return json{{"horizon", p.horizon},
                {"sample_dt", p.sample_dt},
                {"accel_delta", p.accel_delta},
                {"max_accel", p.max_accel},
                {"comfort_decel", p.comfort_decel},
                {"emergency_decel", p.emergency_decel},
                {"weight_jerk", p.weight_jerk},
                {"weight_accel", p.weight_accel},
                {"weight_speed", p.weight_speed},
                {"weight_lateral", p.weight_lateral},
                {"weight_clearance", p.weight_clearance},
                {"clearance", p.clearance},
                {"collision_margin", p.collision_margin}};
}

control::PlannerConfig planner_from_json(const json& j) {
    control::PlannerConfig p;
    p.horizon = j.value("horizon", p.horizon);
    p.sample_dt = j.value("sample_dt", p.sample_dt);
    p.accel_delta = j.value("accel_delta", p.accel_delta);
    p.max_accel = j.value("max_accel", p.max_accel);
    p.comfort_decel = j.value("comfort_decel", p.comfort_decel);
    p.emergency_decel = j.value("emergency_decel", p.emergency_decel);
    p.weight_jerk = j.value("weight_jerk", p.weight_jerk);
    p.weight_accel = j.value("weight_accel", p.weight_accel);
    p.weight_speed = j.value("weight_speed", p.weight_speed);
    p.weight_lateral = j.value("weight_lateral", p.weight_lateral);
    p.weight_clearance = j.value("weight_clearance", p.weight_clearance);
    p.clearance = j.value("clearance", p.clearance);
    p.collision_margin = j.value("collision_margin", p.collision_margin);
    return p;
}

}  // namespace

std::string EpisodeConfig::to_json() const {
    json j{{"scenario", scenario_path},
           {"mode", to_string(mode)},
           {"backends", {{"analytic", analytic_backend}, {"heuristic", heuristic_backend}}},
           {"k", k},
           {"bank_in", bank_in},
           {"bank_out", bank_out},
           {"reflection", reflection},
           {"seed", seed},
           {"rates",
            {{"physics_hz", rates.physics_hz},
             {"decision_hz", rates.decision_hz},
             {"history_hz", rates.history_hz}}},
           {"penalties", penalties_to_json(penalties)},
           {"perceiver_frames", perceiver_frames},
           {"encoder_params", encoder_params_path},
           {"prompts_dir", prompts_dir},
           {"dataset_out", dataset_out},
           {"planner", planner_to_json(planner)}};
    return j.dump(2);
}

EpisodeConfig EpisodeConfig::from_json(const std::string& text) {
    const json j = json::parse(text);
    EpisodeConfig c;
    c.scenario_path = j.at("scenario").get<std::string>();
    c.mode = mode_from_string(j.value("mode", std::string("analytic")));
    if (j.contains("backends")) {
        c.analytic_backend = j["backends"].value("analytic", c.analytic_backend);
        c.heuristic_backend = j["backends"].value("heuristic", c.heuristic_backend);
    }
    c.k = j.value("k", c.k);
    c.bank_in = j.value("bank_in", std::string());
    c.bank_out = j.value("bank_out", std::string());
    c.reflection = j.value("reflection", false);
    c.seed = j.value("seed", 0ul);
    if (j.contains("rates")) {
        c.rates.physics_hz = j["rates"].value("physics_hz", c.rates.physics_hz);
        c.rates.decision_hz = j["rates"].value("decision_hz", c.rates.decision_hz);
        c.rates.history_hz = j["rates"].value("history_hz", c.rates.history_hz);
    }
    if (j.contains("penalties")) c.penalties = penalties_from_json(j["penalties"]);
    c.perceiver_frames = j.value("perceiver_frames", c.perceiver_frames);
    c.encoder_params_path = j.value("encoder_params", std::string());
    c.prompts_dir = j.value("prompts_dir", std::string());
    c.dataset_out = j.value("dataset_out", std::string());
    if (j.contains("planner")) c.planner = planner_from_json(j["planner"]);
    c.validate();
    return c;
}

EpisodeConfig EpisodeConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace dd::harness
