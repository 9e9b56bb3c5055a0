#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hitcast/audio.hpp"
#include "hitcast/dataset.hpp"
#include "hitcast/errors.hpp"
#include "hitcast/net.hpp"
#include "hitcast/spectrogram.hpp"

namespace hitcast {

/// Everything that determines a clip's feature tensor. input_frames fixes the
/// time axis; clips are resampled and center-cropped/padded to fit exactly.
struct FeatureConfig {
    SpectrogramConfig spec;
    int sample_rate = 22050;
    std::size_t input_frames = 256;

    std::size_t target_samples() const {
        return spec.n_fft + spec.hop * (input_frames - 1);
    }
};

/// Decode-independent part of the pipeline: resample, fit to the configured
/// length, mel-analyze, quantize to float32 (the cache storage precision, so
/// cold and warm runs see identical values).
inline MelSpectrogram compute_clip_features(const AudioClip& raw, const FeatureConfig& fc) {
    const AudioClip clip = fit_length(resample(raw, fc.sample_rate), fc.target_samples());
    MelSpectrogram mel = mel_spectrogram(clip, fc.spec);
    quantize_to_float32(mel.values);
    return mel;
}

/// Scale a normalized dB grid (floor_db..0) into a [0,1] net input tensor.
inline Tensor input_from_mel(const MelSpectrogram& mel) {
    if (mel.config.floor_db >= 0.0)
        throw ConfigError("floor_db must be negative to span a unit interval");
    Tensor t({1, mel.values.rows, mel.values.cols});
    const double floor = mel.config.floor_db;
    for (std::size_t i = 0; i < t.values.size(); ++i)
        t.values[i] = (mel.values.v[i] - floor) / (-floor);
    return t;
}

inline std::uint64_t feature_config_hash(const FeatureConfig& fc) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    mix(fc.spec.n_fft);
    mix(fc.spec.hop);
    mix(fc.spec.n_mels);
    mix(std::bit_cast<std::uint64_t>(fc.spec.f_min));
    mix(std::bit_cast<std::uint64_t>(fc.spec.f_max));
    mix(std::bit_cast<std::uint64_t>(fc.spec.floor_db));
    mix(static_cast<std::uint64_t>(fc.sample_rate));
    mix(fc.input_frames);
    return h;
}

/// On-disk mel tensor store keyed by track id and a hash of the feature
/// configuration, so a config change never reuses stale entries. get() for
/// distinct records is safe to call from several threads.
class FeatureCache {
  public:
    FeatureCache(std::filesystem::path dir, FeatureConfig cfg,
                 std::filesystem::path audio_root = {})
        : dir_(std::move(dir)), cfg_(cfg), audio_root_(std::move(audio_root)) {
        std::filesystem::create_directories(dir_);
    }

    const FeatureConfig& config() const { return cfg_; }
    const std::filesystem::path& dir() const { return dir_; }

    std::filesystem::path entry_path(const std::string& track_id) const {
        std::string safe;
        for (char c : track_id) {
            const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                            (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
            safe += ok ? c : '_';
            if (safe.size() >= 64) break;
        }
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(feature_config_hash(cfg_)));
        return dir_ / (safe + "_" + hash + ".melf");
    }

    std::filesystem::path resolve_audio(const std::string& audio_path) const {
        const std::filesystem::path p(audio_path);
        if (p.is_absolute() || audio_root_.empty()) return p;
        return audio_root_ / p;
    }

    MelSpectrogram get(const TrackRecord& rec) {
        const auto path = entry_path(rec.track_id);
        if (std::filesystem::exists(path)) {
            try {
                MelSpectrogram mel = read_mel_file(path, rec.track_id);
                if (mel.values.rows == cfg_.spec.n_mels && mel.values.cols == cfg_.input_frames)
                    return mel;
            } catch (const Error&) {
                // unreadable entry: fall through and recompute
            }
        }
        const AudioClip raw = load_wav_file(resolve_audio(rec.audio_path));
        MelSpectrogram mel = compute_clip_features(raw, cfg_);
        mel.source_id = rec.track_id;
        write_mel_file(path, mel);
        return mel;
    }

    /// Precompute features for every record; returns how many were computed
    /// (as opposed to already cached).
    std::size_t warm(const std::vector<TrackRecord>& records, int threads = 1) {
        std::size_t missing = 0;
        for (const auto& r : records)
            if (!std::filesystem::exists(entry_path(r.track_id))) ++missing;

        const std::size_t n = records.size();
        const std::size_t workers =
            std::min<std::size_t>(std::max(threads, 1), n == 0 ? 1 : n);
        if (workers <= 1) {
            for (const auto& r : records) get(r);
            return missing;
        }
        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::atomic<bool> failed{false};
        std::mutex error_mutex;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) {
                    if (failed.load()) return;
                    try {
                        get(records[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        failed.store(true);
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
        return missing;
    }

  private:
    std::filesystem::path dir_;
    FeatureConfig cfg_;
    std::filesystem::path audio_root_;
};

}  // namespace hitcast
