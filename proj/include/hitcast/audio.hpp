#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "hitcast/errors.hpp"

namespace hitcast {

/// Decoded mono audio. Samples are amplitudes in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;  // Hz
    std::string source_id;
};

namespace detail {

inline std::uint32_t read_u32le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint16_t read_u16le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline bool tag_is(std::span<const std::uint8_t> b, std::size_t off, const char* tag) {
    for (int i = 0; i < 4; ++i)
        if (b[off + i] != static_cast<std::uint8_t>(tag[i])) return false;
    return true;
}

}  // namespace detail

/// Decode a RIFF/WAVE container holding 16- or 24-bit integer PCM with one or
/// two channels. Integer samples are scaled by the type's max magnitude; stereo
/// is downmixed to mono by the per-frame arithmetic mean.
inline AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = "") {
    using namespace detail;
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
        throw FormatError("not a RIFF/WAVE stream");

    bool have_fmt = false;
    std::uint16_t format_tag = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_off = 0, data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::size_t chunk_off = pos;
        const std::uint32_t chunk_size = read_u32le(bytes, pos + 4);
        pos += 8;
        if (pos + chunk_size > bytes.size()) throw FormatError("truncated chunk");
        if (tag_is(bytes, chunk_off, "fmt ")) {
            if (chunk_size < 16) throw FormatError("fmt chunk too small");
            format_tag = read_u16le(bytes, pos);
            channels = read_u16le(bytes, pos + 2);
            rate = read_u32le(bytes, pos + 4);
            bits = read_u16le(bytes, pos + 14);
            have_fmt = true;
        } else if (tag_is(bytes, chunk_off, "data")) {
            data_off = pos;
            data_size = chunk_size;
            have_data = true;
        }
        pos += chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }
    if (!have_fmt || !have_data) throw FormatError("missing fmt or data chunk");
    if (format_tag != 1)
        throw UnsupportedEncodingError("only uncompressed integer PCM is supported");
    if (bits != 16 && bits != 24)
        throw UnsupportedEncodingError("only 16- or 24-bit PCM is supported");
    if (channels != 1 && channels != 2)
        throw UnsupportedEncodingError("only mono or stereo is supported");
    if (rate == 0) throw FormatError("zero sample rate");
    if (data_size == 0) throw EmptyAudioError("data chunk is empty");

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_size = bytes_per_sample * channels;
    const std::size_t frames = data_size / frame_size;
    if (frames == 0) throw EmptyAudioError("data chunk holds no complete frame");

    const double scale = bits == 16 ? 32768.0 : 8388608.0;
    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.source_id = std::move(source_id);
    clip.samples.reserve(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
            const std::size_t off = data_off + f * frame_size + c * bytes_per_sample;
            std::int32_t v;
            if (bits == 16) {
                v = static_cast<std::int16_t>(read_u16le(bytes, off));
            } else {
                v = bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16);
                if (v & 0x800000) v -= 0x1000000;  // sign-extend
            }
            acc += static_cast<double>(v) / scale;
        }
        clip.samples.push_back(acc / channels);
    }
    return clip;
}

/// Encode interleaved samples as a 16-bit PCM WAV. Values are clamped to
/// [-1, 1] and quantized by round(x * 32768).
inline std::vector<std::uint8_t> encode_wav_pcm16(std::span<const double> interleaved,
                                                  int channels, int sample_rate) {
    std::vector<std::uint8_t> v;
    auto u16 = [&](std::uint16_t x) {
        v.push_back(static_cast<std::uint8_t>(x & 0xff));
        v.push_back(static_cast<std::uint8_t>(x >> 8));
    };
    auto u32 = [&](std::uint32_t x) {
        for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>((x >> (8 * i)) & 0xff));
    };
    auto tag = [&](const char* t) {
        for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(t[i]));
    };
    const std::uint32_t data_size = static_cast<std::uint32_t>(interleaved.size() * 2);
    const std::uint32_t block_align = static_cast<std::uint32_t>(channels) * 2;
    tag("RIFF");
    u32(36 + data_size);
    tag("WAVE");
    tag("fmt ");
    u32(16);
    u16(1);
    u16(static_cast<std::uint16_t>(channels));
    u32(static_cast<std::uint32_t>(sample_rate));
    u32(static_cast<std::uint32_t>(sample_rate) * block_align);
    u16(static_cast<std::uint16_t>(block_align));
    u16(16);
    tag("data");
    u32(data_size);
    for (double s : interleaved) {
        long q = std::lround(s * 32768.0);
        if (q > 32767) q = 32767;
        if (q < -32768) q = -32768;
        u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return v;
}

/// Linear-interpolation resampling. Output count = round(n * target / input).
/// Identity (bitwise) when the rates already match.
inline AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw InvalidInputError("target_rate must be positive");
    if (clip.sample_rate == target_rate) return clip;
    AudioClip out;
    out.sample_rate = target_rate;
    out.source_id = clip.source_id;
    const std::size_t n = clip.samples.size();
    if (n == 0) return out;
    const std::size_t n_out = static_cast<std::size_t>(std::llround(
        static_cast<double>(n) * target_rate / clip.sample_rate));
    out.samples.reserve(n_out);
    const double step = static_cast<double>(clip.sample_rate) / target_rate;
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = i * step;
        std::size_t i0 = static_cast<std::size_t>(pos);
        if (i0 >= n - 1) {
            out.samples.push_back(clip.samples[n - 1]);
            continue;
        }
        const double frac = pos - static_cast<double>(i0);
        const double a = clip.samples[i0];
        const double b = clip.samples[i0 + 1];
        out.samples.push_back(a + frac * (b - a));
    }
    return out;
}

/// Force a clip to exactly target_samples: longer clips are center-cropped,
/// shorter ones zero-padded symmetrically with the extra sample on the right.
inline AudioClip fit_length(const AudioClip& clip, std::size_t target_samples) {
    if (target_samples == 0) throw InvalidInputError("target_samples must be positive");
    const std::size_t n = clip.samples.size();
    if (n == target_samples) return clip;
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.source_id = clip.source_id;
    out.samples.resize(target_samples, 0.0);
    if (n > target_samples) {
        const std::size_t start = (n - target_samples) / 2;
        for (std::size_t i = 0; i < target_samples; ++i) out.samples[i] = clip.samples[start + i];
    } else {
        const std::size_t left = (target_samples - n) / 2;
        for (std::size_t i = 0; i < n; ++i) out.samples[left + i] = clip.samples[i];
    }
    return out;
}

inline AudioClip load_wav_file(const std::filesystem::path& path, std::string source_id = "") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (source_id.empty()) source_id = path.stem().string();
    return decode_wav(bytes, std::move(source_id));
}

inline void save_wav_file(const std::filesystem::path& path, std::span<const double> interleaved,
                          int channels, int sample_rate) {
    auto bytes = encode_wav_pcm16(interleaved, channels, sample_rate);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace hitcast
