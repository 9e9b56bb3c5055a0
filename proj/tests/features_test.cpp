#include "hitcast/features.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "hitcast/errors.hpp"

namespace hitcast {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::path(::testing::TempDir()) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

FeatureConfig tiny_config() {
    FeatureConfig fc;
    fc.spec.n_fft = 256;
    fc.spec.hop = 128;
    fc.spec.n_mels = 16;
    fc.sample_rate = 8000;
    fc.input_frames = 8;
    return fc;
}

std::vector<double> sine(double hz, int sample_rate, std::size_t n, double amp = 0.5) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / sample_rate);
    return v;
}

TrackRecord audio_record(const std::string& id, const fs::path& wav) {
    TrackRecord r;
    r.track_id = id;
    r.artist_id = "artist";
    r.audio_path = wav.string();
    return r;
}

TEST(InputFromMel, MapsDbRangeOntoUnitInterval) {
    MelSpectrogram mel;
    mel.config.floor_db = -80.0;
    mel.values = Grid(1, 3);
    mel.values.v = {-80.0, -40.0, 0.0};
    const Tensor t = input_from_mel(mel);
    ASSERT_EQ(t.shape, (std::vector<std::size_t>{1, 1, 3}));
    EXPECT_DOUBLE_EQ(t.values[0], 0.0);
    EXPECT_DOUBLE_EQ(t.values[1], 0.5);
    EXPECT_DOUBLE_EQ(t.values[2], 1.0);
}

TEST(InputFromMel, KeepsGridOrientation) {
    MelSpectrogram mel;
    mel.config.floor_db = -80.0;
    mel.values = Grid(2, 4);
    mel.values.at(1, 3) = -20.0;
    const Tensor t = input_from_mel(mel);
    ASSERT_EQ(t.shape, (std::vector<std::size_t>{1, 2, 4}));
    EXPECT_DOUBLE_EQ(t.at3(0, 1, 3), 0.75);
}

TEST(InputFromMel, RejectsNonNegativeFloor) {
    MelSpectrogram mel;
    mel.config.floor_db = 0.0;
    mel.values = Grid(1, 1);
    EXPECT_THROW(input_from_mel(mel), ConfigError);
}

TEST(FeatureConfigOps, TargetSamplesCoversExactlyTheFrameCount) {
    FeatureConfig fc;
    fc.spec.n_fft = 2048;
    fc.spec.hop = 512;
    fc.input_frames = 32;
    EXPECT_EQ(fc.target_samples(), 2048u + 512u * 31u);

    const FeatureConfig tiny = tiny_config();
    EXPECT_EQ(tiny.target_samples(), 256u + 128u * 7u);
}

TEST(FeatureConfigOps, HashSeparatesDifferentConfigs) {
    const FeatureConfig a = tiny_config();
    FeatureConfig b = a;
    b.spec.n_mels = 24;
    FeatureConfig c = a;
    c.sample_rate = 16000;
    EXPECT_NE(feature_config_hash(a), feature_config_hash(b));
    EXPECT_NE(feature_config_hash(a), feature_config_hash(c));
    EXPECT_EQ(feature_config_hash(a), feature_config_hash(tiny_config()));
}

TEST(ComputeClipFeatures, ProducesConfiguredShapeForLongClips) {
    const FeatureConfig fc = tiny_config();
    AudioClip clip;
    clip.sample_rate = fc.sample_rate;
    clip.samples = sine(440.0, fc.sample_rate, fc.target_samples() * 3);
    const MelSpectrogram mel = compute_clip_features(clip, fc);
    EXPECT_EQ(mel.values.rows, fc.spec.n_mels);
    EXPECT_EQ(mel.values.cols, fc.input_frames);
}

TEST(ComputeClipFeatures, PadsShortClipsToTheSameShape) {
    const FeatureConfig fc = tiny_config();
    AudioClip clip;
    clip.sample_rate = fc.sample_rate;
    clip.samples = sine(440.0, fc.sample_rate, 100);
    const MelSpectrogram mel = compute_clip_features(clip, fc);
    EXPECT_EQ(mel.values.rows, fc.spec.n_mels);
    EXPECT_EQ(mel.values.cols, fc.input_frames);
}

TEST(ComputeClipFeatures, ResamplesForeignRates) {
    const FeatureConfig fc = tiny_config();
    AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples = sine(440.0, 16000, 4000);
    const MelSpectrogram mel = compute_clip_features(clip, fc);
    EXPECT_EQ(mel.values.rows, fc.spec.n_mels);
    EXPECT_EQ(mel.values.cols, fc.input_frames);
}

TEST(ComputeClipFeatures, ValuesSurviveFloat32RoundTrip) {
    const FeatureConfig fc = tiny_config();
    AudioClip clip;
    clip.sample_rate = fc.sample_rate;
    clip.samples = sine(523.25, fc.sample_rate, fc.target_samples());
    MelSpectrogram mel = compute_clip_features(clip, fc);
    Grid copy = mel.values;
    quantize_to_float32(copy);
    EXPECT_EQ(copy.v, mel.values.v);
}

TEST(Cache, MissComputesStoresAndReturns) {
    const fs::path dir = temp_dir("cache_miss");
    const FeatureConfig fc = tiny_config();
    const fs::path wav = dir / "tone.wav";
    save_wav_file(wav, sine(330.0, fc.sample_rate, fc.target_samples()), 1, fc.sample_rate);

    FeatureCache cache(dir / "store", fc);
    const TrackRecord rec = audio_record("track_a", wav);
    EXPECT_FALSE(fs::exists(cache.entry_path(rec.track_id)));
    const MelSpectrogram mel = cache.get(rec);
    EXPECT_TRUE(fs::exists(cache.entry_path(rec.track_id)));
    EXPECT_EQ(mel.values.rows, fc.spec.n_mels);
    EXPECT_EQ(mel.values.cols, fc.input_frames);

    const AudioClip raw = load_wav_file(wav);
    const MelSpectrogram direct = compute_clip_features(raw, fc);
    EXPECT_EQ(mel.values.v, direct.values.v);
}

TEST(Cache, HitSkipsTheAudioFileEntirely) {
    const fs::path dir = temp_dir("cache_hit");
    const FeatureConfig fc = tiny_config();
    const fs::path wav = dir / "tone.wav";
    save_wav_file(wav, sine(330.0, fc.sample_rate, fc.target_samples()), 1, fc.sample_rate);

    const TrackRecord rec = audio_record("track_b", wav);
    std::vector<double> cold;
    {
        FeatureCache cache(dir / "store", fc);
        cold = cache.get(rec).values.v;
    }
    fs::remove(wav);
    FeatureCache cache(dir / "store", fc);
    const MelSpectrogram warm = cache.get(rec);
    EXPECT_EQ(warm.values.v, cold);
}

TEST(Cache, ConfigChangeUsesADifferentEntry) {
    const FeatureConfig a = tiny_config();
    FeatureConfig b = a;
    b.spec.n_mels = 24;
    const fs::path dir = temp_dir("cache_keys");
    FeatureCache ca(dir, a);
    FeatureCache cb(dir, b);
    EXPECT_NE(ca.entry_path("same_id"), cb.entry_path("same_id"));
}

TEST(Cache, SanitizesHostileTrackIds) {
    FeatureCache cache(temp_dir("cache_ids"), tiny_config());
    const fs::path p = cache.entry_path("tr/ack: 1*?");
    const std::string name = p.filename().string();
    for (char c : {'/', ':', ' ', '*', '?'}) EXPECT_EQ(name.find(c), std::string::npos);
    EXPECT_NE(name.find("tr_ack"), std::string::npos);
}

TEST(Cache, MissingAudioRaisesIoError) {
    FeatureCache cache(temp_dir("cache_gone"), tiny_config());
    const TrackRecord rec = audio_record("ghost", "no/such/file.wav");
    EXPECT_THROW(cache.get(rec), IoError);
}

TEST(Cache, ResolvesRelativePathsAgainstAudioRoot) {
    const fs::path dir = temp_dir("cache_root");
    const FeatureConfig fc = tiny_config();
    save_wav_file(dir / "clip.wav", sine(330.0, fc.sample_rate, 512), 1, fc.sample_rate);
    FeatureCache cache(dir / "store", fc, dir);
    TrackRecord rec = audio_record("rel", "clip.wav");
    EXPECT_NO_THROW(cache.get(rec));
}

TEST(Cache, WarmReportsMissesAndMatchesSingleThreaded) {
    const fs::path dir = temp_dir("cache_warm");
    const FeatureConfig fc = tiny_config();
    std::vector<TrackRecord> records;
    for (int i = 0; i < 6; ++i) {
        const fs::path wav = dir / ("tone" + std::to_string(i) + ".wav");
        save_wav_file(wav, sine(220.0 + 55.0 * i, fc.sample_rate, fc.target_samples()), 1,
                      fc.sample_rate);
        records.push_back(audio_record("warm" + std::to_string(i), wav));
    }

    FeatureCache threaded(dir / "threaded", fc);
    EXPECT_EQ(threaded.warm(records, 3), 6u);
    EXPECT_EQ(threaded.warm(records, 3), 0u);

    FeatureCache serial(dir / "serial", fc);
    EXPECT_EQ(serial.warm(records, 1), 6u);
    for (const auto& r : records)
        EXPECT_EQ(threaded.get(r).values.v, serial.get(r).values.v) << r.track_id;
}

TEST(Cache, WarmPropagatesWorkerFailures) {
    const fs::path dir = temp_dir("cache_warm_fail");
    const FeatureConfig fc = tiny_config();
    std::vector<TrackRecord> records;
    const fs::path wav = dir / "ok.wav";
    save_wav_file(wav, sine(330.0, fc.sample_rate, 512), 1, fc.sample_rate);
    records.push_back(audio_record("ok", wav));
    records.push_back(audio_record("broken", dir / "missing.wav"));
    FeatureCache cache(dir / "store", fc);
    EXPECT_THROW(cache.warm(records, 2), IoError);
}

}  // namespace
}  // namespace hitcast
