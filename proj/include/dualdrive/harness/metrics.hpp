#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualdrive/sim/world.hpp"

namespace dd::harness {

// Multiplicative penalty per infraction kind (CARLA-leaderboard style for
// the collision/red-light entries; the off-road value is ours).
struct PenaltyTable {
    std::map<sim::AccidentInfo::Kind, double> multipliers = {
        {sim::AccidentInfo::Kind::collision_pedestrian, 0.50},
        {sim::AccidentInfo::Kind::collision_vehicle, 0.60},
        {sim::AccidentInfo::Kind::collision_static, 0.65},
        {sim::AccidentInfo::Kind::red_light_violation, 0.70},
        {sim::AccidentInfo::Kind::off_road, 0.80},
    };

    double penalty(sim::AccidentInfo::Kind kind) const;
};

struct Metrics {
    double rc = 0.0;  // route completion, [0, 100]
    double is = 1.0;  // infraction score, [0, 1]
    double ds = 0.0;  // driving score = rc * is, [0, 100]
};

// RC = 100 * max progress, IS = product of penalties, DS = RC * IS.
Metrics compute_metrics(double max_route_progress,
                        const std::vector<sim::AccidentInfo>& infractions,
                        const PenaltyTable& table);

// Same computation over a line-delimited episode log file.
Metrics compute_metrics_from_log(const std::string& log_path, const PenaltyTable& table);

}  // namespace dd::harness
