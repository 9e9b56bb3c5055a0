// Synthesizes a two-tone clip and walks it through the audio feature path,
// printing the resulting mel grid as a coarse intensity map.

#include <cmath>
#include <cstdio>

#include "hitcast/features.hpp"

int main() {
    using namespace hitcast;

    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples.resize(22050);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const double t = static_cast<double>(i) / clip.sample_rate;
        clip.samples[i] = 0.6 * std::sin(2.0 * M_PI * 440.0 * t) +
                          0.3 * std::sin(2.0 * M_PI * 1760.0 * t);
    }

    FeatureConfig fc;
    fc.spec.n_fft = 1024;
    fc.spec.hop = 512;
    fc.spec.n_mels = 24;
    fc.sample_rate = clip.sample_rate;
    fc.input_frames = 40;

    const MelSpectrogram mel = compute_clip_features(clip, fc);
    std::printf("mel grid: %zu bands x %zu frames, values in [%.1f, 0] dB\n",
                mel.values.rows, mel.values.cols, fc.spec.floor_db);

    const char ramp[] = " .:-=+*#%@";
    for (std::size_t r = mel.values.rows; r-- > 0;) {
        std::printf("band %2zu |", r);
        for (std::size_t c = 0; c < mel.values.cols; ++c) {
            const double level = (mel.values.at(r, c) - fc.spec.floor_db) / -fc.spec.floor_db;
            const int idx = static_cast<int>(level * 9.0 + 0.5);
            std::putchar(ramp[idx < 0 ? 0 : (idx > 9 ? 9 : idx)]);
        }
        std::printf("|\n");
    }
    std::printf("the strongest stripe is the 440 Hz tone; the weaker one is its 1760 Hz partial\n");
    return 0;
}
