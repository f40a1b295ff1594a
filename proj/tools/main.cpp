#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "dualdrive/agent/experience.hpp"
#include "dualdrive/encoder/precision.hpp"
#include "dualdrive/encoder/training.hpp"
#include "dualdrive/harness/ablation.hpp"
#include "dualdrive/harness/episode.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

dd::harness::EpisodeConfig load_config(const std::string& path, long seed_override) {
    dd::harness::EpisodeConfig cfg = dd::harness::EpisodeConfig::from_file(path);
    if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::vector<dd::encoder::LabeledToken> encode_dataset(const dd::encoder::EncoderConfig& cfg,
                                                      const dd::encoder::EncoderParams& params,
                                                      const std::vector<dd::encoder::TrainingRecord>& recs) {
    std::vector<dd::encoder::LabeledToken> out;
    out.reserve(recs.size());
    for (const auto& r : recs) {
        dd::encoder::LabeledToken lt;
        lt.token = dd::encoder::encode(cfg, params, r.features,
                                       dd::encoder::ego_state_vector(r.intent, r.speed));
        lt.steer = r.steer;
        lt.brake = r.brake;
        out.push_back(std::move(lt));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dualdrive: closed-loop dual-process driving agent harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    long seed_override = -1;

    // ---- run ----
    auto* run = app.add_subcommand("run", "run one episode");
    run->add_option("--config", config_path, "episode config JSON")->required();
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--out-dir", out_dir, "output directory");
    run->callback([&]() {
        const auto cfg = load_config(config_path, seed_override);
        fs::create_directories(out_dir);
        const auto report =
            dd::harness::run_episode(cfg, (fs::path(out_dir) / "episode.jsonl").string());
        write_text(fs::path(out_dir) / "report.json", report.to_json());
        std::cout << "RC " << report.metrics.rc << "  IS " << report.metrics.is << "  DS "
                  << report.metrics.ds << "  (" << report.termination << ")\n";
    });

    // ---- reflect-loop ----
    auto* loop = app.add_subcommand("reflect-loop", "repeat a seeded scenario with reflection");
    int rounds = 1;
    loop->add_option("--config", config_path, "episode config JSON")->required();
    loop->add_option("--rounds", rounds, "additional rounds after the first episode");
    loop->add_option("--seed", seed_override, "override the config seed");
    loop->add_option("--out-dir", out_dir, "output directory");
    loop->callback([&]() {
        const auto cfg = load_config(config_path, seed_override);
        fs::create_directories(out_dir);
        dd::agent::MemoryBank bank;
        if (!cfg.bank_in.empty()) bank = dd::agent::MemoryBank::load(cfg.bank_in);
        const auto reports = dd::harness::run_reflection_loop(cfg, rounds, bank, out_dir);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            write_text(fs::path(out_dir) / ("report_round" + std::to_string(i) + ".json"),
                       reports[i].to_json());
            std::cout << "round " << i << ": DS " << reports[i].metrics.ds << " ("
                      << reports[i].termination << ")\n";
        }
        if (!cfg.bank_out.empty()) bank.persist(cfg.bank_out);
    });

    // ---- ablate ----
    auto* ablate = app.add_subcommand("ablate", "few-shot x bank-size grid");
    std::vector<int> ks{0, 1, 3};
    std::vector<std::size_t> sizes{90, 900};
    std::vector<unsigned long> seeds{0};
    std::string bank_path;
    ablate->add_option("--config", config_path, "episode config JSON")->required();
    ablate->add_option("--bank", bank_path, "bank file for subsampling")->required();
    ablate->add_option("--k", ks, "few-shot counts");
    ablate->add_option("--sizes", sizes, "bank sizes");
    ablate->add_option("--seeds", seeds, "subsample/run seeds");
    ablate->add_option("--out-dir", out_dir, "output directory");
    ablate->callback([&]() {
        const auto cfg = load_config(config_path, -1);
        fs::create_directories(out_dir);
        const auto bank = dd::agent::MemoryBank::load(bank_path);
        const auto result = dd::harness::run_ablation(cfg, ks, sizes, seeds, bank);
        const auto csv = (fs::path(out_dir) / "ablation.csv").string();
        dd::harness::write_ablation_csv(csv, result);
        for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "wrote " << result.rows.size() << " rows to " << csv << "\n";
    });

    // ---- bank ----
    auto* bank_cmd = app.add_subcommand("bank", "memory bank tools");
    bank_cmd->require_subcommand(1);
    std::string bank_in, bank_out2;
    auto* bexport = bank_cmd->add_subcommand("export", "copy a bank file (validating)");
    bexport->add_option("--in", bank_in)->required();
    bexport->add_option("--out", bank_out2)->required();
    bexport->callback([&]() {
        dd::agent::MemoryBank::load(bank_in).persist(bank_out2);
        std::cout << "exported " << bank_in << " -> " << bank_out2 << "\n";
    });
    auto* bimport = bank_cmd->add_subcommand("import", "import, skipping corrupt records");
    bimport->add_option("--in", bank_in)->required();
    bimport->add_option("--out", bank_out2)->required();
    bimport->callback([&]() {
        std::size_t skipped = 0;
        const auto bank = dd::agent::MemoryBank::load_lenient(bank_in, &skipped);
        bank.persist(bank_out2);
        std::cout << "imported " << bank.size() << " records, skipped " << skipped << "\n";
        if (skipped > 0) std::exit(2);
    });
    auto* bstats = bank_cmd->add_subcommand("stats", "size, decision and provenance histograms");
    bstats->add_option("--in", bank_in)->required();
    bstats->callback([&]() {
        std::cout << dd::harness::bank_stats(dd::agent::MemoryBank::load(bank_in)).to_json()
                  << "\n";
    });
    auto* bsub = bank_cmd->add_subcommand("subsample", "seeded uniform subsample");
    std::size_t sub_count = 90;
    unsigned long sub_seed = 0;
    bsub->add_option("--in", bank_in)->required();
    bsub->add_option("--out", bank_out2)->required();
    bsub->add_option("--count", sub_count)->required();
    bsub->add_option("--seed", sub_seed);
    bsub->callback([&]() {
        const auto bank = dd::agent::MemoryBank::load(bank_in);
        bank.subsample(sub_count, sub_seed).persist(bank_out2);
        std::cout << "subsampled " << std::min(sub_count, bank.size()) << " of " << bank.size()
                  << "\n";
    });

    // ---- train-encoder ----
    auto* trainc = app.add_subcommand("train-encoder", "train the scene encoder");
    std::string dataset_path, enc_config_path, params_out = "encoder_params.json";
    trainc->add_option("--dataset", dataset_path, "JSONL training records")->required();
    trainc->add_option("--config", enc_config_path, "encoder config JSON");
    trainc->add_option("--seed", seed_override, "override the config seed");
    trainc->add_option("--out", params_out, "params output path");
    trainc->callback([&]() {
        dd::encoder::EncoderConfig cfg;
        if (!enc_config_path.empty()) {
            std::ifstream in(enc_config_path);
            if (!in) throw std::runtime_error("cannot open " + enc_config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            cfg = dd::encoder::config_from_json(ss.str());
        }
        if (seed_override >= 0) cfg.seed = static_cast<unsigned long>(seed_override);
        const auto dataset = dd::encoder::load_dataset(dataset_path);
        const auto result = dd::encoder::train(cfg, dataset);
        dd::encoder::save_params(params_out, cfg, result.params);
        write_text(params_out + ".report.json", result.report.to_json());
        std::cout << result.report.to_json() << "\n";
    });

    // ---- encode ----
    auto* enc = app.add_subcommand("encode", "encode dataset records to tokens");
    std::string params_path, tokens_out = "tokens.jsonl";
    enc->add_option("--params", params_path, "trained params file")->required();
    enc->add_option("--dataset", dataset_path, "JSONL records")->required();
    enc->add_option("--out", tokens_out, "token output JSONL");
    enc->callback([&]() {
        const auto [cfg, params] = dd::encoder::load_params(params_path);
        const auto dataset = dd::encoder::load_dataset(dataset_path);
        std::ofstream out(tokens_out);
        if (!out) throw std::runtime_error("cannot write " + tokens_out);
        for (const auto& r : dataset) {
            const auto token = dd::encoder::encode(
                cfg, params, r.features, dd::encoder::ego_state_vector(r.intent, r.speed));
            out << json{{"token", token.values}, {"steer", r.steer}, {"brake", r.brake}}.dump()
                << "\n";
        }
        std::cout << "encoded " << dataset.size() << " records to " << tokens_out << "\n";
    });

    // ---- eval-precision ----
    auto* evalp = app.add_subcommand("eval-precision", "retrieval precision@k");
    std::string train_path, query_path;
    int k = 1;
    evalp->add_option("--params", params_path, "trained params file")->required();
    evalp->add_option("--train", train_path, "JSONL training records")->required();
    evalp->add_option("--query", query_path, "JSONL query records")->required();
    evalp->add_option("--k", k, "neighbors considered");
    evalp->callback([&]() {
        const auto [cfg, params] = dd::encoder::load_params(params_path);
        const auto train_tokens = encode_dataset(cfg, params, dd::encoder::load_dataset(train_path));
        const auto query_tokens = encode_dataset(cfg, params, dd::encoder::load_dataset(query_path));
        const auto res = dd::encoder::precision_at_k(train_tokens, query_tokens, k);
        std::cout << json{{"k", k},
                          {"steer", res.steer},
                          {"brake", res.brake},
                          {"queries", res.queries}}
                         .dump(2)
                  << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
