#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "dualdrive/token.hpp"

namespace dd::encoder {

struct EncoderConfig {
    // feature grid shape (N positions x C channels)
    int grid_n = 16;
    int grid_c = 64;
    int ego_dim = 9;  // 8-way intent one-hot + speed scalar

    int ego_hidden = 64;
    int fusion_hidden = 256;

    enum class Pooling { max_pool, attention };
    Pooling pooling = Pooling::max_pool;

    double momentum = 0.999;    // key-encoder update coefficient
    double temperature = 0.07;
    double sigma_act = 0.04;
    double sigma_acc = 0.04;
    double lambda_act = 1.0;
    double lambda_acc = 1.0;
    int dictionary_capacity = 4096;

    double learning_rate = 0.03;
    double weight_decay = 1e-4;
    int batch_size = 128;
    int epochs = 12;
    unsigned long seed = 0;

    enum class Denominator { negatives_only, all };
    Denominator denominator = Denominator::negatives_only;

    enum class BrakePartition { threshold, concurrence };
    BrakePartition brake_partition = BrakePartition::threshold;

    // two-view augmentation
    double jitter_sigma = 0.01;
    double dropout_p = 0.1;

    void validate() const;  // throws std::invalid_argument
    std::string pooling_name() const;
};

// All learnable tensors; the momentum copy mirrors these shapes exactly.
struct EncoderParams {
    Eigen::MatrixXd w_ego1;
    Eigen::VectorXd b_ego1;
    Eigen::MatrixXd w_ego2;
    Eigen::VectorXd b_ego2;
    Eigen::VectorXd attn;  // attention score vector, length C
    Eigen::MatrixXd w_scene;
    Eigen::VectorXd b_scene;
    Eigen::MatrixXd w_fus1;
    Eigen::VectorXd b_fus1;
    Eigen::MatrixXd w_fus2;
    Eigen::VectorXd b_fus2;

    static EncoderParams init(const EncoderConfig& cfg, std::mt19937_64& rng);
    static EncoderParams zeros_like(const EncoderParams& other);

    long parameter_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);

    // this += scale * other (shapes must match)
    void axpy(double scale, const EncoderParams& other);
    void scale(double factor);
    bool same_shape(const EncoderParams& other) const;
    double max_abs_diff(const EncoderParams& other) const;
};

// Intermediate activations kept for the backward pass.
struct ForwardCache {
    Eigen::MatrixXd grid;
    Eigen::VectorXd ego;
    Eigen::VectorXd h_ego;
    Eigen::VectorXd f_ego;
    Eigen::VectorXd alpha;   // attention weights (attention mode)
    Eigen::VectorXd pooled;
    Eigen::VectorXd z;       // [f_ego; f_scene]
    Eigen::VectorXd h_fus;
    Eigen::VectorXd t_raw;
    double norm_act = 1.0;
    double norm_acc = 1.0;
    Eigen::VectorXd g_act;   // normalized halves
    Eigen::VectorXd g_acc;
};

// Deterministic forward pass; output halves are unit norm.
// Throws std::invalid_argument naming expected/actual dims on shape mismatch.
SceneToken encode(const EncoderConfig& cfg, const EncoderParams& params,
                  const Eigen::MatrixXd& grid, const Eigen::VectorXd& ego_state,
                  ForwardCache* cache = nullptr);

Eigen::VectorXd ego_state_vector(int intent, double speed);

// Accumulates d(loss)/d(params) given the loss gradient w.r.t. the two
// normalized output halves.
void backward(const EncoderConfig& cfg, const EncoderParams& params, const ForwardCache& cache,
              const Eigen::VectorXd& d_g_act, const Eigen::VectorXd& d_g_acc,
              EncoderParams& grad);

// theta_m <- alpha * theta_m + (1 - alpha) * theta, elementwise.
// Throws std::invalid_argument on shape mismatch or alpha outside [0, 1).
void momentum_update(EncoderParams& theta_m, const EncoderParams& theta, double alpha);

// Params file round-trip (JSON with a shape manifest and a config echo).
void save_params(const std::string& path, const EncoderConfig& cfg, const EncoderParams& params);
std::pair<EncoderConfig, EncoderParams> load_params(const std::string& path);

std::string config_to_json(const EncoderConfig& cfg);
EncoderConfig config_from_json(const std::string& text);

}  // namespace dd::encoder
