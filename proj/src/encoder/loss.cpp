#include "dualdrive/encoder/loss.hpp"

#include <cmath>
#include <limits>

namespace dd::encoder {

PairPartition partition_pairs(double query_label, const std::vector<double>& key_labels,
                              Space /*space*/, double sigma) {
    PairPartition out;
    for (int i = 0; i < static_cast<int>(key_labels.size()); ++i) {
        if (std::abs(key_labels[i] - query_label) < sigma) {
            out.positives.push_back(i);
        } else {
            out.negatives.push_back(i);
        }
    }
    return out;
}

PairPartition partition_pairs_concurrence(double query_label,
                                          const std::vector<double>& key_labels) {
    PairPartition out;
    const bool query_brakes = query_label > 0.0;
    for (int i = 0; i < static_cast<int>(key_labels.size()); ++i) {
        if ((key_labels[i] > 0.0) == query_brakes) {
            out.positives.push_back(i);
        } else {
            out.negatives.push_back(i);
        }
    }
    return out;
}

namespace {

// log(sum_i exp(s_i)) over a subset, stabilized by the subset max.
double logsumexp(const Eigen::VectorXd& scores, const std::vector<int>& idx) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i : idx) m = std::max(m, scores(i));
    double sum = 0.0;
    for (int i : idx) sum += std::exp(scores(i) - m);
    return m + std::log(sum);
}

// softmax weights within the subset, written into w at subset positions
void subset_softmax(const Eigen::VectorXd& scores, const std::vector<int>& idx,
                    Eigen::VectorXd& w) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i : idx) m = std::max(m, scores(i));
    double sum = 0.0;
    for (int i : idx) sum += std::exp(scores(i) - m);
    for (int i : idx) w(i) = std::exp(scores(i) - m) / sum;
}

}  // namespace

ContrastiveResult contrastive_loss(const Eigen::VectorXd& query, const Eigen::MatrixXd& keys,
                                   const PairPartition& partition, double temperature,
                                   EncoderConfig::Denominator denominator) {
    ContrastiveResult res;
    res.d_query = Eigen::VectorXd::Zero(query.size());
    if (partition.positives.empty() || partition.negatives.empty()) {
        return res;  // skipped sample, contributes 0
    }
    if (keys.cols() != query.size()) {
        throw std::invalid_argument("contrastive_loss: key dim mismatch");
    }

    const Eigen::VectorXd scores = keys * query / temperature;

    const double lse_pos = logsumexp(scores, partition.positives);
    Eigen::VectorXd w_pos = Eigen::VectorXd::Zero(scores.size());
    subset_softmax(scores, partition.positives, w_pos);

    std::vector<int> denom_idx = partition.negatives;
    if (denominator == EncoderConfig::Denominator::all) {
        denom_idx.insert(denom_idx.end(), partition.positives.begin(), partition.positives.end());
    }
    const double lse_den = logsumexp(scores, denom_idx);
    Eigen::VectorXd w_den = Eigen::VectorXd::Zero(scores.size());
    subset_softmax(scores, denom_idx, w_den);

    res.loss = lse_den - lse_pos;  // == -log(sum_pos / sum_den)
    res.valid = true;
    // d/dq [lse_den - lse_pos] = sum_i (w_den_i - w_pos_i) z_i / tau
    res.d_query = keys.transpose() * (w_den - w_pos) / temperature;
    return res;
}

double total_loss(double loss_act, double loss_acc, double lambda_act, double lambda_acc) {
    return lambda_act * loss_act + lambda_acc * loss_acc;
}

}  // namespace dd::encoder
