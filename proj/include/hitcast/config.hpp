#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hitcast/dataset.hpp"
#include "hitcast/errors.hpp"
#include "hitcast/features.hpp"
#include "hitcast/net.hpp"
#include "hitcast/spectrogram.hpp"
#include "hitcast/training.hpp"

namespace hitcast {

/// Every knob a run can turn, loadable from a flat key = value file. The
/// config echo written next to each run's outputs is this same format, so a
/// run can always be replayed from its artifacts.
struct RunConfig {
    std::string catalog;
    std::string tracks_csv;
    std::string audio_dir;
    std::string cache_dir;
    std::string out_dir;

    SpectrogramConfig spec;
    int sample_rate = 22050;
    std::size_t input_frames = 256;

    std::vector<std::size_t> conv_filters = {16, 32, 64, 128};
    std::vector<std::size_t> meta_hidden = {32, 32};
    std::vector<std::size_t> head_hidden = {128, 64};

    TrainingConfig training;
    double train_fraction = 0.8;

    double threshold = 70.0;
    std::size_t histogram_bins = 20;
    bool ablate_artist_features = false;
    std::uint64_t seed = 0;
};

inline NetConfig net_config(const RunConfig& cfg) {
    NetConfig net;
    net.conv_filters = cfg.conv_filters;
    net.meta_dim = model_feature_names(!cfg.ablate_artist_features).size();
    net.meta_hidden = cfg.meta_hidden;
    net.head_hidden = cfg.head_hidden;
    net.input_mels = cfg.spec.n_mels;
    net.input_frames = cfg.input_frames;
    return net;
}

inline FeatureConfig feature_config(const RunConfig& cfg) {
    FeatureConfig fc;
    fc.spec = cfg.spec;
    fc.sample_rate = cfg.sample_rate;
    fc.input_frames = cfg.input_frames;
    return fc;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + value + "' is not a number");
    }
}

inline std::uint64_t config_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("key '" + key + "': '" + value + "' is not a non-negative integer");
    return v;
}

inline int config_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    return v;
}

inline bool config_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': '" + value + "' is not a boolean");
}

inline std::vector<std::size_t> config_size_list(const std::string& key,
                                                 const std::string& value) {
    std::vector<std::size_t> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        out.push_back(static_cast<std::size_t>(config_u64(key, t)));
    }
    return out;
}

inline std::string size_list_to_string(const std::vector<std::size_t>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(xs[i]);
    }
    return s;
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
    using namespace detail;
    if (key == "catalog") cfg.catalog = value;
    else if (key == "tracks_csv") cfg.tracks_csv = value;
    else if (key == "audio_dir") cfg.audio_dir = value;
    else if (key == "cache_dir") cfg.cache_dir = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "n_fft") cfg.spec.n_fft = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "hop") cfg.spec.hop = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "n_mels") cfg.spec.n_mels = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "f_min") cfg.spec.f_min = config_double(key, value);
    else if (key == "f_max") cfg.spec.f_max = config_double(key, value);
    else if (key == "floor_db") cfg.spec.floor_db = config_double(key, value);
    else if (key == "sample_rate") cfg.sample_rate = config_int(key, value);
    else if (key == "input_frames") cfg.input_frames = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "conv_filters") cfg.conv_filters = config_size_list(key, value);
    else if (key == "meta_hidden") cfg.meta_hidden = config_size_list(key, value);
    else if (key == "head_hidden") cfg.head_hidden = config_size_list(key, value);
    else if (key == "batch_size") cfg.training.batch_size = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "max_epochs") cfg.training.max_epochs = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "learning_rate") cfg.training.learning_rate = config_double(key, value);
    else if (key == "patience") cfg.training.patience = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "min_delta") cfg.training.min_delta = config_double(key, value);
    else if (key == "val_fraction") cfg.training.val_fraction = config_double(key, value);
    else if (key == "threads") cfg.training.threads = config_int(key, value);
    else if (key == "train_fraction") cfg.train_fraction = config_double(key, value);
    else if (key == "threshold") cfg.threshold = config_double(key, value);
    else if (key == "histogram_bins") cfg.histogram_bins = static_cast<std::size_t>(config_u64(key, value));
    else if (key == "ablate_artist_features") cfg.ablate_artist_features = config_bool(key, value);
    else if (key == "seed") cfg.seed = config_u64(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

inline RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

inline std::string serialize_run_config(const RunConfig& cfg) {
    using detail::fmt_g17;
    std::string s;
    auto put = [&s](const std::string& key, const std::string& value) {
        s += key + " = " + value + "\n";
    };
    put("catalog", cfg.catalog);
    put("tracks_csv", cfg.tracks_csv);
    put("audio_dir", cfg.audio_dir);
    put("cache_dir", cfg.cache_dir);
    put("out_dir", cfg.out_dir);
    put("n_fft", std::to_string(cfg.spec.n_fft));
    put("hop", std::to_string(cfg.spec.hop));
    put("n_mels", std::to_string(cfg.spec.n_mels));
    put("f_min", fmt_g17(cfg.spec.f_min));
    put("f_max", fmt_g17(cfg.spec.f_max));
    put("floor_db", fmt_g17(cfg.spec.floor_db));
    put("sample_rate", std::to_string(cfg.sample_rate));
    put("input_frames", std::to_string(cfg.input_frames));
    put("conv_filters", detail::size_list_to_string(cfg.conv_filters));
    put("meta_hidden", detail::size_list_to_string(cfg.meta_hidden));
    put("head_hidden", detail::size_list_to_string(cfg.head_hidden));
    put("batch_size", std::to_string(cfg.training.batch_size));
    put("max_epochs", std::to_string(cfg.training.max_epochs));
    put("learning_rate", fmt_g17(cfg.training.learning_rate));
    put("patience", std::to_string(cfg.training.patience));
    put("min_delta", fmt_g17(cfg.training.min_delta));
    put("val_fraction", fmt_g17(cfg.training.val_fraction));
    put("threads", std::to_string(cfg.training.threads));
    put("train_fraction", fmt_g17(cfg.train_fraction));
    put("threshold", fmt_g17(cfg.threshold));
    put("histogram_bins", std::to_string(cfg.histogram_bins));
    put("ablate_artist_features", cfg.ablate_artist_features ? "true" : "false");
    put("seed", std::to_string(cfg.seed));
    return s;
}

/// Numeric sanity across every embedded config; path existence is checked by
/// the command that actually reads each path.
inline void validate_run_config(const RunConfig& cfg) {
    validate_spectrogram_config(cfg.spec, cfg.sample_rate);
    validate_net_config(net_config(cfg));
    validate_training_config(cfg.training);
    if (cfg.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    if (cfg.input_frames == 0) throw ConfigError("input_frames must be positive");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw ConfigError("train_fraction must be inside (0, 1)");
    if (!(cfg.threshold > 0.0 && cfg.threshold < 100.0))
        throw ConfigError("threshold must be inside (0, 100)");
    if (cfg.histogram_bins == 0) throw ConfigError("histogram_bins must be positive");
    if (cfg.spec.floor_db >= 0.0) throw ConfigError("floor_db must be negative");
}

}  // namespace hitcast
