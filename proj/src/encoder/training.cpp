#include "dualdrive/encoder/training.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

namespace dd::encoder {

using nlohmann::json;

std::string TrainReport::to_json() const {
    json epochs_json = json::array();
    for (const EpochStats& e : epochs) {
        epochs_json.push_back({{"mean_loss", e.mean_loss},
                               {"skipped_act", e.skipped_act},
                               {"skipped_acc", e.skipped_acc}});
    }
    return json{{"epochs", epochs_json},
                {"steps", steps},
                {"records", records},
                {"empty_dataset", empty_dataset},
                {"warning", warning}}
        .dump(2);
}

void validate_dataset(const EncoderConfig& cfg, const std::vector<TrainingRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TrainingRecord& r = records[i];
        const std::string tag = "record " + std::to_string(i);
        if (r.features.rows() != cfg.grid_n || r.features.cols() != cfg.grid_c)
            throw std::invalid_argument(tag + ": feature shape mismatch");
        if (r.intent < 0 || r.intent > 7) throw std::invalid_argument(tag + ": intent out of [0,7]");
        if (r.steer < -1.0 || r.steer > 1.0)
            throw std::invalid_argument(tag + ": steer out of [-1,1]");
        if (r.brake < 0.0 || r.brake > 1.0)
            throw std::invalid_argument(tag + ": brake out of [0,1]");
        if (r.speed < 0.0) throw std::invalid_argument(tag + ": negative speed");
    }
}

namespace {

Eigen::MatrixXd augment(const TrainingRecord& rec, const EncoderConfig& cfg,
                        std::mt19937_64& rng) {
    Eigen::MatrixXd g = rec.features;
    std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < g.rows(); ++i) {
        const bool drop = unit(rng) < cfg.dropout_p;
        for (int c = 0; c < g.cols(); ++c) {
            g(i, c) = drop ? 0.0 : g(i, c) + jitter(rng);
        }
    }
    return g;
}

}  // namespace

TrainResult train(const EncoderConfig& cfg, const std::vector<TrainingRecord>& dataset) {
    return train(cfg, dataset, nullptr);
}

TrainResult train(const EncoderConfig& cfg, const std::vector<TrainingRecord>& dataset,
                  TrainObserver* observer) {
    cfg.validate();

    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    result.params = EncoderParams::init(cfg, rng);
    result.momentum_params = result.params;  // E_m starts as a copy of E

    if (dataset.empty()) {
        result.report.empty_dataset = true;
        result.report.warning = "empty dataset: parameters left at initialization";
        return result;
    }
    validate_dataset(cfg, dataset);
    result.report.records = static_cast<long>(dataset.size());

    KeyDictionary dictionary(static_cast<std::size_t>(cfg.dictionary_capacity));
    const int half = SceneToken::kHalf;

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        EpochStats stats;
        double loss_sum = 0.0;
        long sample_count = 0;

        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(cfg.batch_size));
            const long bsz = static_cast<long>(batch_end - batch_start);

            // Query pass (view 1, live encoder) and key pass (view 2,
            // momentum encoder, no gradient).
            std::vector<ForwardCache> caches(bsz);
            std::vector<const TrainingRecord*> recs(bsz);
            std::vector<KeyEntry> batch_keys(bsz);
            for (long b = 0; b < bsz; ++b) {
                const TrainingRecord& rec = dataset[order[batch_start + b]];
                recs[b] = &rec;
                const Eigen::MatrixXd view1 = augment(rec, cfg, rng);
                const Eigen::MatrixXd view2 = augment(rec, cfg, rng);
                const Eigen::VectorXd ego = ego_state_vector(rec.intent, rec.speed);
                encode(cfg, result.params, view1, ego, &caches[b]);
                batch_keys[b].token = encode(cfg, result.momentum_params, view2, ego);
                batch_keys[b].steer = rec.steer;
                batch_keys[b].brake = rec.brake;
            }

            // key set K = dictionary ∪ current batch keys
            const std::size_t n_keys = dictionary.size() + batch_keys.size();
            Eigen::MatrixXd keys_act(n_keys, half), keys_acc(n_keys, half);
            std::vector<double> labels_steer(n_keys), labels_brake(n_keys);
            std::size_t row = 0;
            for (const KeyEntry& e : dictionary.entries()) {
                keys_act.row(row) =
                    Eigen::Map<const Eigen::VectorXd>(e.token.values.data(), half).transpose();
                keys_acc.row(row) =
                    Eigen::Map<const Eigen::VectorXd>(e.token.values.data() + half, half)
                        .transpose();
                labels_steer[row] = e.steer;
                labels_brake[row] = e.brake;
                ++row;
            }
            for (const KeyEntry& e : batch_keys) {
                keys_act.row(row) =
                    Eigen::Map<const Eigen::VectorXd>(e.token.values.data(), half).transpose();
                keys_acc.row(row) =
                    Eigen::Map<const Eigen::VectorXd>(e.token.values.data() + half, half)
                        .transpose();
                labels_steer[row] = e.steer;
                labels_brake[row] = e.brake;
                ++row;
            }

            EncoderParams grad = EncoderParams::zeros_like(result.params);
            for (long b = 0; b < bsz; ++b) {
                const TrainingRecord& rec = *recs[b];
                const PairPartition part_act =
                    partition_pairs(rec.steer, labels_steer, Space::act, cfg.sigma_act);
                const PairPartition part_acc =
                    cfg.brake_partition == EncoderConfig::BrakePartition::threshold
                        ? partition_pairs(rec.brake, labels_brake, Space::acc, cfg.sigma_acc)
                        : partition_pairs_concurrence(rec.brake, labels_brake);

                const ContrastiveResult act = contrastive_loss(
                    caches[b].g_act, keys_act, part_act, cfg.temperature, cfg.denominator);
                const ContrastiveResult acc = contrastive_loss(
                    caches[b].g_acc, keys_acc, part_acc, cfg.temperature, cfg.denominator);
                if (!act.valid) ++stats.skipped_act;
                if (!acc.valid) ++stats.skipped_acc;

                loss_sum += total_loss(act.valid ? act.loss : 0.0, acc.valid ? acc.loss : 0.0,
                                       cfg.lambda_act, cfg.lambda_acc);
                ++sample_count;

                const Eigen::VectorXd d_act = cfg.lambda_act * act.d_query;
                const Eigen::VectorXd d_acc = cfg.lambda_acc * acc.d_query;
                backward(cfg, result.params, caches[b], d_act, d_acc, grad);
            }
            grad.scale(1.0 / static_cast<double>(bsz));

            // SGD with decoupled weight decay, then the momentum update.
            grad.axpy(cfg.weight_decay, result.params);
            result.params.axpy(-cfg.learning_rate, grad);
            momentum_update(result.momentum_params, result.params, cfg.momentum);
            dictionary.push(batch_keys);

            ++result.report.steps;
            if (observer) {
                observer->after_step(result.report.steps, result.params, result.momentum_params);
            }
        }

        stats.mean_loss = loss_sum / static_cast<double>(std::max<long>(1, sample_count));
        result.report.epochs.push_back(stats);
    }
    return result;
}

std::vector<TrainingRecord> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<TrainingRecord> records;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        TrainingRecord r;
        const auto shape = j.at("shape");
        const long n = shape[0].get<long>(), c = shape[1].get<long>();
        const auto data = j.at("features").get<std::vector<double>>();
        if (static_cast<long>(data.size()) != n * c)
            throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                     ": features length does not match shape");
        r.features = Eigen::Map<const Eigen::MatrixXd>(data.data(), n, c);
        r.intent = j.at("intent").get<int>();
        r.speed = j.at("speed").get<double>();
        r.steer = j.at("steer").get<double>();
        r.brake = j.at("brake").get<double>();
        records.push_back(std::move(r));
    }
    return records;
}

void save_dataset(const std::string& path, const std::vector<TrainingRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (const TrainingRecord& r : records) {
        std::vector<double> data(r.features.data(), r.features.data() + r.features.size());
        const json j{{"features", data},
                     {"shape", {r.features.rows(), r.features.cols()}},
                     {"intent", r.intent},
                     {"speed", r.speed},
                     {"steer", r.steer},
                     {"brake", r.brake}};
        out << j.dump() << "\n";
    }
}

}  // namespace dd::encoder
