#pragma once

#include <string>
#include <vector>

#include "dualdrive/harness/episode.hpp"

namespace dd::harness {

// Repeats the same seeded scenario; each round reuses the bank grown by the
// previous rounds' reflections. rounds = 0 degenerates to a single episode.
std::vector<EpisodeReport> run_reflection_loop(const EpisodeConfig& config, int rounds,
                                               agent::MemoryBank& bank,
                                               const std::string& log_dir = "");

struct AblationRow {
    int k = 0;
    std::size_t bank_size = 0;
    unsigned long seed = 0;
    Metrics metrics;
};

struct AblationResult {
    std::vector<AblationRow> rows;
    std::vector<std::string> warnings;  // e.g. requested size clamped
};

// Grid over few-shot counts and seeded bank subsamples.
AblationResult run_ablation(const EpisodeConfig& base, const std::vector<int>& ks,
                            const std::vector<std::size_t>& sizes,
                            const std::vector<unsigned long>& seeds,
                            const agent::MemoryBank& bank);

void write_ablation_csv(const std::string& path, const AblationResult& result);
AblationResult read_ablation_csv(const std::string& path);

struct BankStats {
    std::size_t size = 0;
    std::map<agent::MetaAction, long> decisions;
    long analytic = 0;
    long reflection = 0;

    std::string to_json() const;
};

BankStats bank_stats(const agent::MemoryBank& bank);

}  // namespace dd::harness
