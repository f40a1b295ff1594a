#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dualdrive/encoder/encoder.hpp"

namespace dd::encoder {

enum class Space { act, acc };

struct PairPartition {
    std::vector<int> positives;
    std::vector<int> negatives;
};

// Threshold rule: keys whose label lies within sigma of the query label are
// positives, everything else is a negative.
PairPartition partition_pairs(double query_label, const std::vector<double>& key_labels,
                              Space space, double sigma);

// Brake concurrence rule: positive iff both brake (> 0) or both do not.
PairPartition partition_pairs_concurrence(double query_label,
                                          const std::vector<double>& key_labels);

struct ContrastiveResult {
    double loss = 0.0;
    bool valid = false;  // false when either side of the partition is empty
    Eigen::VectorXd d_query;  // gradient w.r.t. the query half (zero when skipped)
};

// Dual-space contrastive term for one query half against the key set.
// keys: one row per key, same dim as the query. The denominator covers the
// negatives only by default; Denominator::all adds the positives to it.
ContrastiveResult contrastive_loss(
    const Eigen::VectorXd& query, const Eigen::MatrixXd& keys, const PairPartition& partition,
    double temperature,
    EncoderConfig::Denominator denominator = EncoderConfig::Denominator::negatives_only);

double total_loss(double loss_act, double loss_acc, double lambda_act, double lambda_acc);

}  // namespace dd::encoder
