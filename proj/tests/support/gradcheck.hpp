// Finite-difference gradient checking for the full dual-space loss.
#pragma once

#include <random>

#include "dualdrive/encoder/encoder.hpp"
#include "dualdrive/encoder/loss.hpp"
#include "support/oracles.hpp"

namespace gradcheck {

struct Instance {
    dd::encoder::EncoderConfig cfg;
    Eigen::MatrixXd grid;
    Eigen::VectorXd ego;
    Eigen::MatrixXd keys_act;  // n x 128, unit rows
    Eigen::MatrixXd keys_acc;
    std::vector<double> labels_steer;
    std::vector<double> labels_brake;
    double query_steer = 0.0;
    double query_brake = 0.0;
};

// Small-net instance with a guaranteed mixed positive/negative partition in
// both spaces.
inline Instance random_instance(unsigned long seed, dd::encoder::EncoderConfig::Pooling pooling,
                                int n_keys = 64) {
    Instance inst;
    inst.cfg.grid_n = 4;
    inst.cfg.grid_c = 8;
    inst.cfg.ego_hidden = 4;
    inst.cfg.fusion_hidden = 8;
    inst.cfg.pooling = pooling;
    inst.cfg.batch_size = 1;
    inst.cfg.dictionary_capacity = 8;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> steer(-1.0, 1.0);
    std::uniform_real_distribution<double> brake(0.0, 1.0);

    inst.grid.resize(inst.cfg.grid_n, inst.cfg.grid_c);
    for (int r = 0; r < inst.grid.rows(); ++r) {
        for (int c = 0; c < inst.grid.cols(); ++c) inst.grid(r, c) = normal(rng);
    }
    inst.ego = Eigen::VectorXd::Zero(9);
    inst.ego(static_cast<int>(rng() % 8)) = 1.0;
    inst.ego(8) = std::abs(normal(rng)) * 5.0;

    const int half = dd::SceneToken::kHalf;
    inst.keys_act.resize(n_keys, half);
    inst.keys_acc.resize(n_keys, half);
    inst.query_steer = steer(rng);
    inst.query_brake = brake(rng);
    for (int i = 0; i < n_keys; ++i) {
        Eigen::VectorXd ka(half), kc(half);
        for (int d = 0; d < half; ++d) {
            ka(d) = normal(rng);
            kc(d) = normal(rng);
        }
        inst.keys_act.row(i) = ka.normalized().transpose();
        inst.keys_acc.row(i) = kc.normalized().transpose();
        // first half of the keys are positives by construction
        if (i < n_keys / 2) {
            inst.labels_steer.push_back(inst.query_steer + 0.03 * (steer(rng)));
            inst.labels_brake.push_back(inst.query_brake + 0.03 * (brake(rng) - 0.5));
        } else {
            inst.labels_steer.push_back(inst.query_steer + 0.5 + 0.4 * brake(rng));
            inst.labels_brake.push_back(inst.query_brake + 0.5 + 0.4 * brake(rng));
        }
    }
    return inst;
}

inline double instance_loss(const Instance& inst, const dd::encoder::EncoderParams& params) {
    using namespace dd::encoder;
    ForwardCache cache;
    encode(inst.cfg, params, inst.grid, inst.ego, &cache);
    const PairPartition pa =
        partition_pairs(inst.query_steer, inst.labels_steer, Space::act, inst.cfg.sigma_act);
    const PairPartition pc =
        partition_pairs(inst.query_brake, inst.labels_brake, Space::acc, inst.cfg.sigma_acc);
    const ContrastiveResult act = contrastive_loss(cache.g_act, inst.keys_act, pa,
                                                   inst.cfg.temperature, inst.cfg.denominator);
    const ContrastiveResult acc = contrastive_loss(cache.g_acc, inst.keys_acc, pc,
                                                   inst.cfg.temperature, inst.cfg.denominator);
    return total_loss(act.valid ? act.loss : 0.0, acc.valid ? acc.loss : 0.0,
                      inst.cfg.lambda_act, inst.cfg.lambda_acc);
}

inline dd::encoder::EncoderParams instance_gradient(const Instance& inst,
                                                    const dd::encoder::EncoderParams& params) {
    using namespace dd::encoder;
    ForwardCache cache;
    encode(inst.cfg, params, inst.grid, inst.ego, &cache);
    const PairPartition pa =
        partition_pairs(inst.query_steer, inst.labels_steer, Space::act, inst.cfg.sigma_act);
    const PairPartition pc =
        partition_pairs(inst.query_brake, inst.labels_brake, Space::acc, inst.cfg.sigma_acc);
    const ContrastiveResult act = contrastive_loss(cache.g_act, inst.keys_act, pa,
                                                   inst.cfg.temperature, inst.cfg.denominator);
    const ContrastiveResult acc = contrastive_loss(cache.g_acc, inst.keys_acc, pc,
                                                   inst.cfg.temperature, inst.cfg.denominator);
    EncoderParams grad = EncoderParams::zeros_like(params);
    backward(inst.cfg, params, cache, inst.cfg.lambda_act * act.d_query,
             inst.cfg.lambda_acc * acc.d_query, grad);
    return grad;
}

// Relative L2 error between the analytic gradient and central differences.
inline double relative_gradient_error(const Instance& inst, unsigned long param_seed) {
    using namespace dd::encoder;
    std::mt19937_64 rng(param_seed);
    EncoderParams params = EncoderParams::init(inst.cfg, rng);

    const EncoderParams analytic = instance_gradient(inst, params);
    const Eigen::VectorXd analytic_flat = analytic.flatten();

    EncoderParams probe = params;
    const Eigen::VectorXd fd = oracles::finite_difference_gradient(
        params.flatten(),
        [&](const Eigen::VectorXd& theta) {
            probe.unflatten(theta);
            return instance_loss(inst, probe);
        },
        1e-5);
    return (analytic_flat - fd).norm() / std::max(1e-12, fd.norm());
}

}  // namespace gradcheck
