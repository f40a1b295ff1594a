#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualdrive/agent/experience.hpp"
#include "dualdrive/agent/meta_action.hpp"
#include "dualdrive/harness/config.hpp"
#include "dualdrive/harness/metrics.hpp"

namespace dd::harness {

struct DecisionTraceEntry {
    long tick = 0;
    double time = 0.0;
    agent::MetaAction action = agent::MetaAction::IDLE;
    std::string reasoning;
    double top1_similarity = -1.0;  // heuristic mode only
    bool backend_fallback = false;  // backend failed, DC substituted
    bool lane_change_downgraded = false;
    bool emergency_trajectory = false;
};

struct EpisodeReport {
    Metrics metrics;
    std::vector<sim::AccidentInfo> infractions;
    std::vector<DecisionTraceEntry> decisions;
    std::string termination;  // route_complete | collision | sim_time_cap | wall_time_cap
    bool timeout = false;
    double sim_time = 0.0;
    long ticks = 0;
    double wall_seconds = 0.0;
    long bank_inserts = 0;             // experiences added this episode, before revise
    long bank_removed_by_revise = 0;
    std::string config_echo;           // JSON; sufficient to re-run bit-identically
    std::map<std::string, std::string> prompt_hashes;

    std::string to_json() const;
};

// Runs one closed-loop episode per the dual-process loop: perceive at the
// decision rate, decide (analytic inserts into the bank; heuristic retrieves
// from it), plan, track at the physics rate. Accidents trigger reflection in
// heuristic mode when enabled, inserting exactly one corrected experience.
// Writes a line-delimited log when log_path is non-empty.
EpisodeReport run_episode(const EpisodeConfig& config, agent::MemoryBank& bank,
                          const std::string& log_path = "", long episode_index = 0);

// Convenience wrapper handling bank_in / bank_out paths from the config.
EpisodeReport run_episode(const EpisodeConfig& config, const std::string& log_path = "");

}  // namespace dd::harness
