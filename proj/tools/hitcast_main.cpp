#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hitcast/cli.hpp"
#include "hitcast/config.hpp"
#include "hitcast/errors.hpp"

namespace {

hitcast::RunConfig effective_config(const std::string& config_path, std::uint64_t* seed_override,
                                    const std::string& out_override) {
    hitcast::RunConfig cfg;
    if (!config_path.empty()) cfg = hitcast::load_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Track popularity prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_value = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "run configuration file (key = value lines)");
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--seed", seed_value, "global seed (overrides config)")
        ->each([&seed_set](const std::string&) { seed_set = true; });

    auto* ingest = app.add_subcommand("ingest", "convert a catalog fixture to the tracks CSV");
    std::string ingest_catalog;
    std::string ingest_out;
    ingest->add_option("--catalog", ingest_catalog, "catalog fixture JSON (overrides config)");
    ingest->add_option("--out-csv", ingest_out, "destination CSV (overrides config tracks_csv)");

    auto* train = app.add_subcommand("train", "train a model from the configured dataset");
    auto* evaluate = app.add_subcommand("evaluate", "score the held-out split with a checkpoint");
    std::string eval_checkpoint;
    evaluate->add_option("--checkpoint", eval_checkpoint,
                         "checkpoint file (default: <out_dir>/model.ckpt)");
    auto* analyze = app.add_subcommand("analyze", "dataset correlation and heatmap reports");
    auto* predict = app.add_subcommand("predict", "score one track from audio plus metadata");
    std::string predict_checkpoint;
    std::string predict_row;
    std::string predict_audio;
    predict->add_option("--checkpoint", predict_checkpoint,
                        "checkpoint file (default: <out_dir>/model.ckpt)");
    predict->add_option("--row", predict_row, "single-row tracks CSV with the track's metadata")
        ->required();
    predict->add_option("--audio", predict_audio, "audio file (overrides the CSV row's path)");

    CLI11_PARSE(app, argc, argv);

    try {
        const hitcast::RunConfig cfg =
            effective_config(config_path, seed_set ? &seed_value : nullptr, out_override);
        if (ingest->parsed()) {
            const std::string catalog = ingest_catalog.empty() ? cfg.catalog : ingest_catalog;
            const std::string out_csv = ingest_out.empty() ? cfg.tracks_csv : ingest_out;
            return hitcast::cmd_ingest(catalog, out_csv, std::cout);
        }
        if (train->parsed()) return hitcast::cmd_train(cfg, std::cout);
        if (evaluate->parsed()) {
            std::string ckpt = eval_checkpoint;
            if (ckpt.empty()) ckpt = (std::filesystem::path(cfg.out_dir) / "model.ckpt").string();
            return hitcast::cmd_evaluate(cfg, ckpt, std::cout);
        }
        if (analyze->parsed()) return hitcast::cmd_analyze(cfg, std::cout);
        if (predict->parsed()) {
            std::string ckpt = predict_checkpoint;
            if (ckpt.empty()) ckpt = (std::filesystem::path(cfg.out_dir) / "model.ckpt").string();
            return hitcast::cmd_predict(cfg, ckpt, predict_row, predict_audio, std::cout);
        }
    } catch (const hitcast::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
