#include "dualdrive/harness/ablation.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace dd::harness {

using nlohmann::json;

std::vector<EpisodeReport> run_reflection_loop(const EpisodeConfig& config, int rounds,
                                               agent::MemoryBank& bank,
                                               const std::string& log_dir) {
    if (rounds < 0) throw std::invalid_argument("reflection loop: rounds must be >= 0");
    std::vector<EpisodeReport> reports;
    for (int round = 0; round <= rounds; ++round) {
        const std::string log_path =
            log_dir.empty() ? "" : log_dir + "/round" + std::to_string(round) + ".jsonl";
        reports.push_back(run_episode(config, bank, log_path, round));
    }
    return reports;
}

AblationResult run_ablation(const EpisodeConfig& base, const std::vector<int>& ks,
                            const std::vector<std::size_t>& sizes,
                            const std::vector<unsigned long>& seeds,
                            const agent::MemoryBank& bank) {
    AblationResult result;
    for (unsigned long seed : seeds) {
        for (std::size_t size : sizes) {
            std::size_t effective = size;
            if (size > bank.size()) {
                effective = bank.size();
                result.warnings.push_back("requested bank size " + std::to_string(size) +
                                          " exceeds bank (" + std::to_string(bank.size()) +
                                          "); clamped");
            }
            agent::MemoryBank subset = bank.subsample(effective, seed);
            for (int k : ks) {
                EpisodeConfig cfg = base;
                cfg.mode = Mode::heuristic;
                cfg.k = k;
                cfg.seed = seed;
                cfg.bank_in = "subsample:size=" + std::to_string(effective) +
                              ",seed=" + std::to_string(seed);
                cfg.bank_out.clear();
                if (k > 0 && subset.size() == 0) {
                    result.warnings.push_back("skipping k=" + std::to_string(k) +
                                              " with an empty bank subset");
                    continue;
                }
                agent::MemoryBank working = subset;
                const EpisodeReport report = run_episode(cfg, working);
                result.rows.push_back({k, effective, seed, report.metrics});
            }
        }
    }
    return result;
}

void write_ablation_csv(const std::string& path, const AblationResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write ablation csv: " + path);
    out << "k,size,seed,rc,is,ds\n";
    char buf[160];
    for (const AblationRow& row : result.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%zu,%lu,%.17g,%.17g,%.17g\n", row.k, row.bank_size,
                      row.seed, row.metrics.rc, row.metrics.is, row.metrics.ds);
        out << buf;
    }
}

AblationResult read_ablation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ablation csv: " + path);
    AblationResult result;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ablation csv is empty");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        AblationRow row;
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        row.k = std::stoi(field);
        std::getline(ss, field, ',');
        row.bank_size = std::stoul(field);
        std::getline(ss, field, ',');
        row.seed = std::stoul(field);
        std::getline(ss, field, ',');
        row.metrics.rc = std::stod(field);
        std::getline(ss, field, ',');
        row.metrics.is = std::stod(field);
        std::getline(ss, field, ',');
        row.metrics.ds = std::stod(field);
        result.rows.push_back(row);
    }
    return result;
}

std::string BankStats::to_json() const {
    json dec;
    for (const auto& [action, count] : decisions) dec[agent::to_string(action)] = count;
    return json{{"size", size},
                {"decisions", dec},
                {"provenance", {{"analytic", analytic}, {"reflection", reflection}}}}
        .dump(2);
}

BankStats bank_stats(const agent::MemoryBank& bank) {
    BankStats stats;
    const std::vector<agent::Experience> all = bank.all();
    stats.size = all.size();
    for (const agent::Experience& e : all) {
        ++stats.decisions[e.decision];
        if (e.provenance == agent::Provenance::analytic) {
            ++stats.analytic;
        } else {
            ++stats.reflection;
        }
    }
    return stats;
}

}  // namespace dd::harness
