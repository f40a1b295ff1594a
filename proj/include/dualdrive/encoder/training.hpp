#pragma once

#include <string>
#include <vector>

#include "dualdrive/encoder/dictionary.hpp"
#include "dualdrive/encoder/encoder.hpp"
#include "dualdrive/encoder/loss.hpp"

namespace dd::encoder {

struct TrainingRecord {
    Eigen::MatrixXd features;  // N x C
    int intent = 0;            // [0, 7]
    double speed = 0.0;        // m/s
    double steer = 0.0;        // [-1, 1]
    double brake = 0.0;        // [0, 1]
};

struct EpochStats {
    double mean_loss = 0.0;
    long skipped_act = 0;
    long skipped_acc = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    long steps = 0;
    long records = 0;
    bool empty_dataset = false;
    std::string warning;

    std::string to_json() const;
};

struct TrainResult {
    EncoderParams params;
    EncoderParams momentum_params;
    TrainReport report;
};

// Seed-deterministic training loop: two augmented views per record, query
// through the live encoder, key through the momentum encoder, key set =
// dictionary plus the current batch, SGD step, momentum update, dict push.
TrainResult train(const EncoderConfig& cfg, const std::vector<TrainingRecord>& dataset);

// Hook for tests that need to observe the parameter trajectory.
struct TrainObserver {
    virtual ~TrainObserver() = default;
    virtual void after_step(long step, const EncoderParams& params,
                            const EncoderParams& momentum_params) = 0;
};

TrainResult train(const EncoderConfig& cfg, const std::vector<TrainingRecord>& dataset,
                  TrainObserver* observer);

// Dataset file: one JSON record per line
// {"features": [...], "shape": [N, C], "intent": 0-7, "speed": v,
//  "steer": s, "brake": b}
std::vector<TrainingRecord> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<TrainingRecord>& records);

// Validates label ranges and shapes; throws on the first bad record.
void validate_dataset(const EncoderConfig& cfg, const std::vector<TrainingRecord>& records);

}  // namespace dd::encoder
