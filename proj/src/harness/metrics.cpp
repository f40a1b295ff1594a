#include "dualdrive/harness/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace dd::harness {

using nlohmann::json;

double PenaltyTable::penalty(sim::AccidentInfo::Kind kind) const {
    const auto it = multipliers.find(kind);
    if (it == multipliers.end())
        throw std::runtime_error("penalty table has no entry for " + sim::to_string(kind));
    return it->second;
}

Metrics compute_metrics(double max_route_progress,
                        const std::vector<sim::AccidentInfo>& infractions,
                        const PenaltyTable& table) {
    Metrics m;
    m.rc = 100.0 * std::clamp(max_route_progress, 0.0, 1.0);
    m.is = 1.0;
    for (const sim::AccidentInfo& inf : infractions) m.is *= table.penalty(inf.kind);
    m.ds = m.rc * m.is;
    return m;
}

Metrics compute_metrics_from_log(const std::string& log_path, const PenaltyTable& table) {
    std::ifstream in(log_path);
    if (!in) throw std::runtime_error("cannot open episode log: " + log_path);
    double max_progress = 0.0;
    std::vector<sim::AccidentInfo> infractions;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        const std::string type = j.value("type", std::string());
        if (type == "tick") {
            max_progress = std::max(max_progress, j.value("progress", 0.0));
        } else if (type == "accident") {
            sim::AccidentInfo info;
            info.kind = sim::accident_kind_from_string(j.at("kind").get<std::string>());
            info.timestep = j.value("tick", 0L);
            infractions.push_back(info);
        }
    }
    return compute_metrics(max_progress, infractions, table);
}

}  // namespace dd::harness
