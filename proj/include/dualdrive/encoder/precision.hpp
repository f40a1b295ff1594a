#pragma once

#include <vector>

#include "dualdrive/encoder/encoder.hpp"
#include "dualdrive/token.hpp"

namespace dd::encoder {

struct LabeledToken {
    SceneToken token;
    double steer = 0.0;
    double brake = 0.0;
};

struct PrecisionResult {
    double steer = 0.0;  // fraction of queries with a steer match in the top k
    double brake = 0.0;
    long queries = 0;
};

// Retrieval quality over full 256-d tokens by cosine similarity. A query
// scores a steer hit when some top-k neighbor has |steer offset| <= sigma,
// and a brake hit when the braking states are concurrent (both > 0 or both
// zero) under the default rule. k = 1 reproduces the headline metric.
PrecisionResult precision_at_k(
    const std::vector<LabeledToken>& train, const std::vector<LabeledToken>& queries, int k = 1,
    double sigma_steer = 0.04,
    EncoderConfig::BrakePartition brake_rule = EncoderConfig::BrakePartition::concurrence,
    double sigma_brake = 0.04);

}  // namespace dd::encoder
