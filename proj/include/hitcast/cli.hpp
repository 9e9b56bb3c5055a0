#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hitcast/config.hpp"
#include "hitcast/dataset.hpp"
#include "hitcast/errors.hpp"
#include "hitcast/evaluation.hpp"
#include "hitcast/features.hpp"
#include "hitcast/net.hpp"
#include "hitcast/training.hpp"

namespace hitcast {

namespace detail {

inline void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path is not configured");
    if (!std::filesystem::exists(path)) throw IoError(what + " not found: " + path);
}

inline std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("out_dir path is not configured");
    std::filesystem::create_directories(cfg.out_dir);
    return cfg.out_dir;
}

inline void write_config_echo(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::ofstream out(out_dir / "config_echo.txt");
    if (!out) throw IoError("cannot write config echo");
    out << serialize_run_config(cfg);
}

inline double clamp_popularity(double v) { return std::min(100.0, std::max(0.0, v)); }

struct LoadedRun {
    std::vector<TrackRecord> records;
    DatasetSplit split;
};

inline LoadedRun load_split(const RunConfig& cfg) {
    require_file(cfg.tracks_csv, "tracks CSV");
    LoadedRun run;
    auto loaded = load_tracks_csv(cfg.tracks_csv);
    run.records = std::move(loaded.records);
    run.split = split_by_artist(run.records, cfg.train_fraction, cfg.seed);
    return run;
}

inline FeatureCache open_cache(const RunConfig& cfg) {
    std::filesystem::path dir = cfg.cache_dir;
    if (dir.empty()) dir = std::filesystem::path(cfg.out_dir) / "feature_cache";
    return FeatureCache(dir, feature_config(cfg), cfg.audio_dir);
}

inline InputFn cache_input_fn(FeatureCache& cache) {
    return [&cache](const TrackRecord& rec) { return input_from_mel(cache.get(rec)); };
}

inline std::vector<double> predict_scores(const PopularityNet& net,
                                          const std::vector<TrackRecord>& records,
                                          const FeatureScaler& scaler,
                                          const InputFn& input_fn) {
    std::vector<double> preds;
    preds.reserve(records.size());
    for (const auto& r : records)
        preds.push_back(100.0 * forward(net, input_fn(r), apply_scaler(scaler, r)));
    return preds;
}

}  // namespace detail

/// Fixture JSON in, canonical tracks CSV out. Prints artist/track/dropped
/// counts so ingestion problems are visible at a glance.
inline int cmd_ingest(const std::filesystem::path& catalog_path,
                      const std::filesystem::path& out_csv, std::ostream& out) {
    detail::require_file(catalog_path.string(), "catalog fixture");
    LoadResult loaded = load_catalog_json(catalog_path);
    std::vector<TrackRecord> records = clean_records(loaded.records);
    std::set<std::string> artists;
    for (const auto& r : records) artists.insert(r.artist_id);
    if (out_csv.has_parent_path()) std::filesystem::create_directories(out_csv.parent_path());
    write_tracks_csv(out_csv, records);
    out << "artists " << artists.size() << "\n"
        << "tracks " << records.size() << "\n"
        << "dropped_incomplete " << loaded.dropped_incomplete << "\n"
        << "wrote " << out_csv.string() << "\n";
    return 0;
}

/// Full training run: artist-disjoint split, scaler fit on train, warmed
/// feature cache, seeded epochs. Leaves checkpoint, epoch log, scaler sidecar,
/// and a config echo in out_dir.
inline int cmd_train(const RunConfig& cfg, std::ostream& out) {
    validate_run_config(cfg);
    const std::filesystem::path out_dir = detail::ensure_out_dir(cfg);
    detail::LoadedRun run = detail::load_split(cfg);

    const FeatureScaler scaler = fit_scaler(run.split.train, !cfg.ablate_artist_features);
    FeatureCache cache = detail::open_cache(cfg);
    const std::size_t computed = cache.warm(run.records, cfg.training.threads);
    out << "features " << run.records.size() << " (" << computed << " computed)\n";

    TrainingConfig tcfg = cfg.training;
    tcfg.seed = cfg.seed;
    const PopularityNet net = init_parameters(net_config(cfg), cfg.seed);
    const auto input_fn = detail::cache_input_fn(cache);
    const std::filesystem::path ckpt_path = out_dir / "model.ckpt";
    const TrainResult result =
        train(net, run.split, scaler, input_fn, tcfg,
              [&](const PopularityNet& best, std::size_t epoch) {
                  save_checkpoint(ckpt_path, best, cfg.seed, static_cast<std::uint32_t>(epoch));
              });

    write_epoch_log_csv(out_dir / "epoch_log.csv", result.log);
    write_scaler_csv(out_dir / "scaler.csv", scaler);
    detail::write_config_echo(cfg, out_dir);
    out << "epochs " << result.epochs_run << (result.stopped_early ? " (stopped early)" : "")
        << "\n"
        << "best_epoch " << result.best_epoch << "\n"
        << "best_val_loss " << detail::fmt_g17(result.best_val_loss) << "\n"
        << "wrote " << ckpt_path.string() << "\n";
    return 0;
}

/// Scores the held-out split with a trained checkpoint and emits the metric
/// summary plus the comparison and histogram tables.
inline int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint_path,
                        std::ostream& out) {
    validate_run_config(cfg);
    const std::filesystem::path out_dir = detail::ensure_out_dir(cfg);
    detail::require_file(checkpoint_path.string(), "checkpoint");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);

    detail::LoadedRun run = detail::load_split(cfg);
    const std::filesystem::path scaler_path = out_dir / "scaler.csv";
    detail::require_file(scaler_path.string(), "scaler sidecar");
    const FeatureScaler scaler = read_scaler_csv(scaler_path);
    if (scaler.names.size() != ckpt.net.config.meta_dim)
        throw VersionError("checkpoint expects " + std::to_string(ckpt.net.config.meta_dim) +
                           " metadata features, scaler provides " +
                           std::to_string(scaler.names.size()));

    FeatureCache cache = detail::open_cache(cfg);
    const auto input_fn = detail::cache_input_fn(cache);
    const std::vector<TrackRecord>& test = run.split.test;
    const std::vector<double> raw = detail::predict_scores(ckpt.net, test, scaler, input_fn);
    std::vector<double> preds(raw.size());
    std::transform(raw.begin(), raw.end(), preds.begin(), detail::clamp_popularity);
    std::vector<double> targets;
    targets.reserve(test.size());
    for (const auto& r : test) targets.push_back(r.popularity);

    const double test_mae = mae(preds, targets);
    const ThresholdMetrics tm = threshold_metrics(preds, targets, cfg.threshold);
    std::optional<double> r_pred;
    try {
        r_pred = pearson(preds, targets);
    } catch (const UndefinedCorrelationError&) {
    }
    const ErrorHistogram hist = error_histogram(preds, targets, cfg.histogram_bins);

    write_comparison_csv(out_dir / "prediction_comparison.csv",
                         prediction_comparison(test, raw));
    write_histogram_csv(out_dir / "error_histogram.csv", hist);

    nlohmann::ordered_json j;
    j["n_test"] = test.size();
    j["mae"] = test_mae;
    j["pearson"] = r_pred ? nlohmann::ordered_json(*r_pred) : nlohmann::ordered_json(nullptr);
    j["threshold"] = tm.threshold;
    j["confusion"] = {{"tp", tm.confusion.tp},
                      {"fp", tm.confusion.fp},
                      {"tn", tm.confusion.tn},
                      {"fn", tm.confusion.fn}};
    j["accuracy"] = tm.accuracy;
    j["precision"] = tm.precision ? nlohmann::ordered_json(*tm.precision)
                                  : nlohmann::ordered_json(nullptr);
    j["recall"] =
        tm.recall ? nlohmann::ordered_json(*tm.recall) : nlohmann::ordered_json(nullptr);
    j["f1"] = tm.f1 ? nlohmann::ordered_json(*tm.f1) : nlohmann::ordered_json(nullptr);
    j["class_balance"] = {{"actual_positive", tm.confusion.tp + tm.confusion.fn},
                          {"actual_negative", tm.confusion.fp + tm.confusion.tn}};
    j["mean_error"] = hist.mean_error;
    j["checkpoint_epoch"] = ckpt.epoch;
    nlohmann::ordered_json echo;
    {
        std::stringstream ss(serialize_run_config(cfg));
        std::string line;
        while (std::getline(ss, line)) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) echo[line.substr(0, eq)] = line.substr(eq + 3);
        }
    }
    j["config"] = echo;

    std::ofstream summary(out_dir / "evaluation_summary.json");
    if (!summary) throw IoError("cannot write evaluation summary");
    summary << j.dump(2) << "\n";

    detail::write_config_echo(cfg, out_dir);
    out << "n_test " << test.size() << "\n"
        << "mae " << detail::fmt_g17(test_mae) << "\n"
        << "accuracy " << detail::fmt_g17(tm.accuracy) << "\n";
    if (r_pred) out << "pearson " << detail::fmt_g17(*r_pred) << "\n";
    return 0;
}

/// Dataset-level analyses that need no model: feature correlations and the
/// release-date popularity heatmap.
inline int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    validate_run_config(cfg);
    const std::filesystem::path out_dir = detail::ensure_out_dir(cfg);
    detail::require_file(cfg.tracks_csv, "tracks CSV");
    const auto loaded = load_tracks_csv(cfg.tracks_csv);

    const CorrelationTable table = correlation_report(loaded.records);
    write_correlation_csv(out_dir / "correlation.csv", table);
    const HeatmapGrid grid = monthly_popularity_heatmap(loaded.records);
    write_heatmap_csv(out_dir / "heatmap.csv", grid);
    detail::write_config_echo(cfg, out_dir);

    for (auto it = table.entries.rbegin(); it != table.entries.rend(); ++it) {
        if (it->r) {
            out << "strongest_correlate " << it->feature << " " << detail::fmt_g17(*it->r)
                << "\n";
            break;
        }
    }
    out << "tracks " << loaded.records.size() << "\n"
        << "heatmap_cells " << grid.cells.size() << "\n";
    return 0;
}

/// One-off scoring: a checkpoint, a single-row tracks CSV, and optionally an
/// audio path override. Prints the clamped popularity prediction.
inline int cmd_predict(const RunConfig& cfg, const std::filesystem::path& checkpoint_path,
                       const std::filesystem::path& row_csv, const std::string& audio_override,
                       std::ostream& out) {
    detail::require_file(checkpoint_path.string(), "checkpoint");
    detail::require_file(row_csv.string(), "metadata row CSV");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);

    const std::filesystem::path scaler_path = std::filesystem::path(cfg.out_dir) / "scaler.csv";
    detail::require_file(scaler_path.string(), "scaler sidecar");
    const FeatureScaler scaler = read_scaler_csv(scaler_path);
    if (scaler.names.size() != ckpt.net.config.meta_dim)
        throw VersionError("checkpoint expects " + std::to_string(ckpt.net.config.meta_dim) +
                           " metadata features, scaler provides " +
                           std::to_string(scaler.names.size()));

    const auto loaded = load_tracks_csv(row_csv);
    if (loaded.records.empty()) throw InvalidInputError("metadata row CSV has no usable rows");
    TrackRecord rec = loaded.records.front();
    if (!audio_override.empty()) rec.audio_path = audio_override;
    if (rec.audio_path.empty())
        throw InvalidInputError("no audio path: provide one in the CSV row or as an argument");

    FeatureConfig fc = feature_config(cfg);
    fc.spec.n_mels = ckpt.net.config.input_mels;
    fc.input_frames = ckpt.net.config.input_frames;
    std::filesystem::path audio = rec.audio_path;
    if (audio.is_relative() && !cfg.audio_dir.empty())
        audio = std::filesystem::path(cfg.audio_dir) / audio;
    const AudioClip clip = load_wav_file(audio);
    const MelSpectrogram mel = compute_clip_features(clip, fc);
    const double score = 100.0 * forward(ckpt.net, input_from_mel(mel), apply_scaler(scaler, rec));
    out << detail::fmt_g17(detail::clamp_popularity(score)) << "\n";
    return 0;
}

}  // namespace hitcast
