#include "dualdrive/encoder/encoder.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace dd::encoder {

using nlohmann::json;

void EncoderConfig::validate() const {
    if (grid_n <= 0 || grid_c <= 0) throw std::invalid_argument("grid shape must be positive");
    if (ego_dim != 9) throw std::invalid_argument("ego state dim is fixed at 9");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw std::invalid_argument("momentum must lie in [0, 1)");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
    if (!(sigma_act > 0.0 && sigma_act < 1.0) || !(sigma_acc > 0.0 && sigma_acc < 1.0))
        throw std::invalid_argument("sigma thresholds must lie in (0, 1)");
    if (dictionary_capacity < batch_size)
        throw std::invalid_argument("dictionary capacity must be >= batch size");
    if (batch_size <= 0 || epochs < 0) throw std::invalid_argument("bad batch size or epochs");
    if (ego_hidden <= 0 || fusion_hidden <= 0)
        throw std::invalid_argument("hidden sizes must be positive");
}

std::string EncoderConfig::pooling_name() const {
    return pooling == Pooling::max_pool ? "max_pool" : "attention";
}

namespace {

constexpr int kTokenDim = SceneToken::kDim;
constexpr int kHalf = SceneToken::kHalf;

Eigen::MatrixXd xavier(int rows, int cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
    }
    return m;
}

template <typename Fn>
void for_each_tensor(EncoderParams& p, Fn&& fn) {
    fn(p.w_ego1);
    fn(p.b_ego1);
    fn(p.w_ego2);
    fn(p.b_ego2);
    fn(p.attn);
    fn(p.w_scene);
    fn(p.b_scene);
    fn(p.w_fus1);
    fn(p.b_fus1);
    fn(p.w_fus2);
    fn(p.b_fus2);
}

template <typename Fn>
void for_each_tensor(const EncoderParams& p, Fn&& fn) {
    fn(p.w_ego1);
    fn(p.b_ego1);
    fn(p.w_ego2);
    fn(p.b_ego2);
    fn(p.attn);
    fn(p.w_scene);
    fn(p.b_scene);
    fn(p.w_fus1);
    fn(p.b_fus1);
    fn(p.w_fus2);
    fn(p.b_fus2);
}

template <typename Fn>
void for_each_pair(EncoderParams& a, const EncoderParams& b, Fn&& fn) {
    fn(a.w_ego1, b.w_ego1);
    fn(a.b_ego1, b.b_ego1);
    fn(a.w_ego2, b.w_ego2);
    fn(a.b_ego2, b.b_ego2);
    fn(a.attn, b.attn);
    fn(a.w_scene, b.w_scene);
    fn(a.b_scene, b.b_scene);
    fn(a.w_fus1, b.w_fus1);
    fn(a.b_fus1, b.b_fus1);
    fn(a.w_fus2, b.w_fus2);
    fn(a.b_fus2, b.b_fus2);
}

}  // namespace

EncoderParams EncoderParams::init(const EncoderConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    EncoderParams p;
    p.w_ego1 = xavier(cfg.ego_hidden, cfg.ego_dim, rng);
    p.b_ego1 = Eigen::VectorXd::Zero(cfg.ego_hidden);
    p.w_ego2 = xavier(kTokenDim, cfg.ego_hidden, rng);
    p.b_ego2 = Eigen::VectorXd::Zero(kTokenDim);
    p.attn = xavier(cfg.grid_c, 1, rng).col(0);
    p.w_scene = xavier(kTokenDim, cfg.grid_c, rng);
    p.b_scene = Eigen::VectorXd::Zero(kTokenDim);
    p.w_fus1 = xavier(cfg.fusion_hidden, 2 * kTokenDim, rng);
    p.b_fus1 = Eigen::VectorXd::Zero(cfg.fusion_hidden);
    p.w_fus2 = xavier(kTokenDim, cfg.fusion_hidden, rng);
    p.b_fus2 = Eigen::VectorXd::Zero(kTokenDim);
    return p;
}

EncoderParams EncoderParams::zeros_like(const EncoderParams& other) {
    EncoderParams p = other;
    for_each_tensor(p, [](auto& t) { t.setZero(); });
    return p;
}

long EncoderParams::parameter_count() const {
    long n = 0;
    for_each_tensor(*this, [&n](const auto& t) { n += t.size(); });
    return n;
}

Eigen::VectorXd EncoderParams::flatten() const {
    Eigen::VectorXd out(parameter_count());
    long off = 0;
    for_each_tensor(*this, [&](const auto& t) {
        out.segment(off, t.size()) = Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
        off += t.size();
    });
    return out;
}

void EncoderParams::unflatten(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count())
        throw std::invalid_argument("unflatten: size mismatch");
    long off = 0;
    for_each_tensor(*this, [&](auto& t) {
        Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) = flat.segment(off, t.size());
        off += t.size();
    });
}

void EncoderParams::axpy(double scale, const EncoderParams& other) {
    if (!same_shape(other)) throw std::invalid_argument("axpy: shape mismatch");
    for_each_pair(*this, other, [scale](auto& a, const auto& b) { a += scale * b; });
}

void EncoderParams::scale(double factor) {
    for_each_tensor(*this, [factor](auto& t) { t *= factor; });
}

bool EncoderParams::same_shape(const EncoderParams& other) const {
    bool ok = true;
    for_each_pair(const_cast<EncoderParams&>(*this), other, [&ok](auto& a, const auto& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols()) ok = false;
    });
    return ok;
}

double EncoderParams::max_abs_diff(const EncoderParams& other) const {
    double m = 0.0;
    for_each_pair(const_cast<EncoderParams&>(*this), other, [&m](auto& a, const auto& b) {
        if (a.size() > 0) m = std::max(m, (a - b).cwiseAbs().maxCoeff());
    });
    return m;
}

Eigen::VectorXd ego_state_vector(int intent, double speed) {
    if (intent < 0 || intent > 7)
        throw std::invalid_argument("intent must be in [0, 7], got " + std::to_string(intent));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(9);
    v(intent) = 1.0;
    v(8) = speed;
    return v;
}

SceneToken encode(const EncoderConfig& cfg, const EncoderParams& params,
                  const Eigen::MatrixXd& grid, const Eigen::VectorXd& ego_state,
                  ForwardCache* cache) {
    if (grid.rows() != cfg.grid_n || grid.cols() != cfg.grid_c) {
        std::ostringstream os;
        os << "encode: feature grid shape mismatch, expected " << cfg.grid_n << "x" << cfg.grid_c
           << ", got " << grid.rows() << "x" << grid.cols();
        throw std::invalid_argument(os.str());
    }
    if (ego_state.size() != cfg.ego_dim) {
        std::ostringstream os;
        os << "encode: ego state dim mismatch, expected " << cfg.ego_dim << ", got "
           << ego_state.size();
        throw std::invalid_argument(os.str());
    }

    const Eigen::VectorXd h_ego = (params.w_ego1 * ego_state + params.b_ego1).array().tanh();
    const Eigen::VectorXd f_ego = params.w_ego2 * h_ego + params.b_ego2;

    Eigen::VectorXd pooled(cfg.grid_c);
    Eigen::VectorXd alpha;
    if (cfg.pooling == EncoderConfig::Pooling::max_pool) {
        pooled = grid.colwise().maxCoeff().transpose();
    } else {
        Eigen::VectorXd scores = grid * params.attn;
        const double m = scores.maxCoeff();
        Eigen::VectorXd e = (scores.array() - m).exp();
        alpha = e / e.sum();
        pooled = grid.transpose() * alpha;
    }
    const Eigen::VectorXd f_scene = params.w_scene * pooled + params.b_scene;

    Eigen::VectorXd z(2 * kTokenDim);
    z << f_ego, f_scene;
    const Eigen::VectorXd h_fus = (params.w_fus1 * z + params.b_fus1).array().tanh();
    const Eigen::VectorXd t_raw = params.w_fus2 * h_fus + params.b_fus2;

    const Eigen::VectorXd raw_act = t_raw.head(kHalf);
    const Eigen::VectorXd raw_acc = t_raw.tail(kHalf);
    const double n_act = raw_act.norm();
    const double n_acc = raw_acc.norm();
    if (n_act <= 0.0 || n_acc <= 0.0) throw std::runtime_error("encode: degenerate zero half");
    const Eigen::VectorXd g_act = raw_act / n_act;
    const Eigen::VectorXd g_acc = raw_acc / n_acc;

    if (cache) {
        cache->grid = grid;
        cache->ego = ego_state;
        cache->h_ego = h_ego;
        cache->f_ego = f_ego;
        cache->alpha = alpha;
        cache->pooled = pooled;
        cache->z = z;
        cache->h_fus = h_fus;
        cache->t_raw = t_raw;
        cache->norm_act = n_act;
        cache->norm_acc = n_acc;
        cache->g_act = g_act;
        cache->g_acc = g_acc;
    }

    SceneToken token;
    token.values.resize(kTokenDim);
    Eigen::Map<Eigen::VectorXd>(token.values.data(), kHalf) = g_act;
    Eigen::Map<Eigen::VectorXd>(token.values.data() + kHalf, kHalf) = g_acc;
    return token;
}

void backward(const EncoderConfig& cfg, const EncoderParams& params, const ForwardCache& cache,
              const Eigen::VectorXd& d_g_act, const Eigen::VectorXd& d_g_acc,
              EncoderParams& grad) {
    // through the per-half normalization: d/dv (v/|v|) = (I - g g^T)/|v|
    Eigen::VectorXd d_raw(kTokenDim);
    d_raw.head(kHalf) =
        (d_g_act - cache.g_act * cache.g_act.dot(d_g_act)) / cache.norm_act;
    d_raw.tail(kHalf) =
        (d_g_acc - cache.g_acc * cache.g_acc.dot(d_g_acc)) / cache.norm_acc;

    // fusion output layer
    grad.w_fus2 += d_raw * cache.h_fus.transpose();
    grad.b_fus2 += d_raw;
    Eigen::VectorXd d_hfus = params.w_fus2.transpose() * d_raw;
    Eigen::VectorXd d_pre_fus =
        d_hfus.array() * (1.0 - cache.h_fus.array() * cache.h_fus.array());
    grad.w_fus1 += d_pre_fus * cache.z.transpose();
    grad.b_fus1 += d_pre_fus;
    Eigen::VectorXd d_z = params.w_fus1.transpose() * d_pre_fus;

    // ego branch
    Eigen::VectorXd d_fego = d_z.head(kTokenDim);
    grad.w_ego2 += d_fego * cache.h_ego.transpose();
    grad.b_ego2 += d_fego;
    Eigen::VectorXd d_hego = params.w_ego2.transpose() * d_fego;
    Eigen::VectorXd d_pre_ego =
        d_hego.array() * (1.0 - cache.h_ego.array() * cache.h_ego.array());
    grad.w_ego1 += d_pre_ego * cache.ego.transpose();
    grad.b_ego1 += d_pre_ego;

    // scene branch
    Eigen::VectorXd d_fscene = d_z.tail(kTokenDim);
    grad.w_scene += d_fscene * cache.pooled.transpose();
    grad.b_scene += d_fscene;
    if (cfg.pooling == EncoderConfig::Pooling::attention) {
        // pooled = G^T alpha, alpha = softmax(G attn)
        const Eigen::VectorXd d_pooled = params.w_scene.transpose() * d_fscene;
        const Eigen::VectorXd d_alpha = cache.grid * d_pooled;
        const double mean = cache.alpha.dot(d_alpha);
        const Eigen::VectorXd d_scores =
            cache.alpha.array() * (d_alpha.array() - mean);
        grad.attn += cache.grid.transpose() * d_scores;
    }
    // max pooling: pooled is a constant function of the parameters
}

void momentum_update(EncoderParams& theta_m, const EncoderParams& theta, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("momentum_update: alpha must lie in [0, 1)");
    if (!theta_m.same_shape(theta))
        throw std::invalid_argument("momentum_update: parameter shapes differ");
    for_each_pair(theta_m, theta,
                  [alpha](auto& m, const auto& t) { m = alpha * m + (1.0 - alpha) * t; });
}

// ---- params / config serialization ----

std::string config_to_json(const EncoderConfig& cfg) {
    json j{{"grid_n", cfg.grid_n},
           {"grid_c", cfg.grid_c},
           {"ego_dim", cfg.ego_dim},
           {"ego_hidden", cfg.ego_hidden},
           {"fusion_hidden", cfg.fusion_hidden},
           {"pooling", cfg.pooling_name()},
           {"momentum", cfg.momentum},
           {"temperature", cfg.temperature},
           {"sigma_act", cfg.sigma_act},
           {"sigma_acc", cfg.sigma_acc},
           {"lambda_act", cfg.lambda_act},
           {"lambda_acc", cfg.lambda_acc},
           {"dictionary_capacity", cfg.dictionary_capacity},
           {"learning_rate", cfg.learning_rate},
           {"weight_decay", cfg.weight_decay},
           {"batch_size", cfg.batch_size},
           {"epochs", cfg.epochs},
           {"seed", cfg.seed},
           {"denominator",
            cfg.denominator == EncoderConfig::Denominator::negatives_only ? "negatives_only"
                                                                          : "all"},
           {"brake_partition",
            cfg.brake_partition == EncoderConfig::BrakePartition::threshold ? "threshold"
                                                                            : "concurrence"},
           {"jitter_sigma", cfg.jitter_sigma},
           {"dropout_p", cfg.dropout_p}};
    return j.dump(2);
}

EncoderConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    EncoderConfig cfg;
    cfg.grid_n = j.value("grid_n", cfg.grid_n);
    cfg.grid_c = j.value("grid_c", cfg.grid_c);
    cfg.ego_hidden = j.value("ego_hidden", cfg.ego_hidden);
    cfg.fusion_hidden = j.value("fusion_hidden", cfg.fusion_hidden);
    if (j.contains("pooling")) {
        const std::string p = j["pooling"].get<std::string>();
        if (p == "max_pool") {
            cfg.pooling = EncoderConfig::Pooling::max_pool;
        } else if (p == "attention") {
            cfg.pooling = EncoderConfig::Pooling::attention;
        } else {
            throw std::invalid_argument("unknown pooling mode '" + p + "'");
        }
    }
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.sigma_act = j.value("sigma_act", cfg.sigma_act);
    cfg.sigma_acc = j.value("sigma_acc", cfg.sigma_acc);
    cfg.lambda_act = j.value("lambda_act", cfg.lambda_act);
    cfg.lambda_acc = j.value("lambda_acc", cfg.lambda_acc);
    cfg.dictionary_capacity = j.value("dictionary_capacity", cfg.dictionary_capacity);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("denominator")) {
        const std::string d = j["denominator"].get<std::string>();
        if (d == "negatives_only") {
            cfg.denominator = EncoderConfig::Denominator::negatives_only;
        } else if (d == "all") {
            cfg.denominator = EncoderConfig::Denominator::all;
        } else {
            throw std::invalid_argument("unknown denominator mode '" + d + "'");
        }
    }
    if (j.contains("brake_partition")) {
        const std::string b = j["brake_partition"].get<std::string>();
        if (b == "threshold") {
            cfg.brake_partition = EncoderConfig::BrakePartition::threshold;
        } else if (b == "concurrence") {
            cfg.brake_partition = EncoderConfig::BrakePartition::concurrence;
        } else {
            throw std::invalid_argument("unknown brake partition rule '" + b + "'");
        }
    }
    cfg.jitter_sigma = j.value("jitter_sigma", cfg.jitter_sigma);
    cfg.dropout_p = j.value("dropout_p", cfg.dropout_p);
    cfg.validate();
    return cfg;
}

namespace {

json tensor_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> data(m.data(), m.data() + m.size());
    return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

json tensor_to_json(const Eigen::VectorXd& v) {
    std::vector<double> data(v.data(), v.data() + v.size());
    return json{{"shape", {v.size()}}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto shape = j.at("shape");
    const auto data = j.at("data").get<std::vector<double>>();
    Eigen::MatrixXd m(shape[0].get<long>(), shape[1].get<long>());
    if (static_cast<long>(data.size()) != m.size())
        throw std::runtime_error("params file: tensor size mismatch");
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
    const auto data = j.at("data").get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<long>(data.size()));
}

}  // namespace

void save_params(const std::string& path, const EncoderConfig& cfg, const EncoderParams& p) {
    json j;
    j["config"] = json::parse(config_to_json(cfg));
    j["tensors"] = {{"w_ego1", tensor_to_json(p.w_ego1)},   {"b_ego1", tensor_to_json(p.b_ego1)},
                    {"w_ego2", tensor_to_json(p.w_ego2)},   {"b_ego2", tensor_to_json(p.b_ego2)},
                    {"attn", tensor_to_json(p.attn)},       {"w_scene", tensor_to_json(p.w_scene)},
                    {"b_scene", tensor_to_json(p.b_scene)}, {"w_fus1", tensor_to_json(p.w_fus1)},
                    {"b_fus1", tensor_to_json(p.b_fus1)},   {"w_fus2", tensor_to_json(p.w_fus2)},
                    {"b_fus2", tensor_to_json(p.b_fus2)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write params file: " + path);
    out << j.dump();
}

std::pair<EncoderConfig, EncoderParams> load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open params file: " + path);
    json j;
    in >> j;
    EncoderConfig cfg = config_from_json(j.at("config").dump());
    const json& t = j.at("tensors");
    EncoderParams p;
    p.w_ego1 = matrix_from_json(t.at("w_ego1"));
    p.b_ego1 = vector_from_json(t.at("b_ego1"));
    p.w_ego2 = matrix_from_json(t.at("w_ego2"));
    p.b_ego2 = vector_from_json(t.at("b_ego2"));
    p.attn = vector_from_json(t.at("attn"));
    p.w_scene = matrix_from_json(t.at("w_scene"));
    p.b_scene = vector_from_json(t.at("b_scene"));
    p.w_fus1 = matrix_from_json(t.at("w_fus1"));
    p.b_fus1 = vector_from_json(t.at("b_fus1"));
    p.w_fus2 = matrix_from_json(t.at("w_fus2"));
    p.b_fus2 = vector_from_json(t.at("b_fus2"));
    return {cfg, p};
}

}  // namespace dd::encoder
