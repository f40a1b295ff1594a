#pragma once

#include <string>

#include "dualdrive/control/planner.hpp"
#include "dualdrive/harness/metrics.hpp"

namespace dd::harness {

struct Rates {
    double physics_hz = 20.0;
    double decision_hz = 2.0;
    double history_hz = 1.0;
};

enum class Mode { analytic, heuristic };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct EpisodeConfig {
    std::string scenario_path;
    Mode mode = Mode::analytic;
    std::string analytic_backend = "rule";
    std::string heuristic_backend = "naive";
    int k = 3;  // few-shot count for heuristic mode
    std::string bank_in;
    std::string bank_out;
    bool reflection = false;
    unsigned long seed = 0;
    Rates rates;
    PenaltyTable penalties;
    int perceiver_frames = 5;
    std::string encoder_params_path;  // empty: parameters seeded from `seed`
    std::string prompts_dir;          // empty: builtin prompt set
    std::string dataset_out;          // when set, dump encoder training records
    control::PlannerConfig planner;

    void validate() const;  // throws std::invalid_argument

    std::string to_json() const;
    static EpisodeConfig from_json(const std::string& text);
    static EpisodeConfig from_file(const std::string& path);
};

}  // namespace dd::harness
