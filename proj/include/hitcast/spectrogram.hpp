#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hitcast/audio.hpp"
#include "hitcast/binio.hpp"
#include "hitcast/errors.hpp"

namespace hitcast {

/// STFT / mel analysis parameters. f_max == 0 means "Nyquist of the clip".
struct SpectrogramConfig {
    std::size_t n_fft = 2048;
    std::size_t hop = 512;
    std::size_t n_mels = 128;
    double f_min = 0.0;
    double f_max = 0.0;
    double floor_db = -80.0;
};

/// Dense row-major real matrix.
struct Grid {
    std::size_t rows = 0, cols = 0;
    std::vector<double> v;
    Grid() = default;
    Grid(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

/// Complex [bins x frames] STFT output.
struct ComplexGrid {
    std::size_t bins = 0, frames = 0;
    std::vector<std::complex<double>> v;
    ComplexGrid(std::size_t b, std::size_t f) : bins(b), frames(f), v(b * f) {}
    std::complex<double>& at(std::size_t b, std::size_t f) { return v[b * frames + f]; }
    const std::complex<double>& at(std::size_t b, std::size_t f) const { return v[b * frames + f]; }
};

/// Log-power mel grid in dB, per-clip max-normalized to 0 dB.
struct MelSpectrogram {
    Grid values;  // [n_mels x n_frames]
    SpectrogramConfig config;
    std::string source_id;
};

inline double resolve_f_max(const SpectrogramConfig& cfg, int sample_rate) {
    return cfg.f_max > 0.0 ? cfg.f_max : sample_rate / 2.0;
}

inline void validate_spectrogram_config(const SpectrogramConfig& cfg, int sample_rate) {
    if (cfg.hop == 0 || cfg.hop > cfg.n_fft)
        throw ConfigError("spectrogram: need 0 < hop <= n_fft");
    if (cfg.n_mels < 2) throw ConfigError("spectrogram: n_mels must be >= 2");
    const double f_max = resolve_f_max(cfg, sample_rate);
    if (cfg.f_min < 0.0 || cfg.f_min >= f_max || f_max > sample_rate / 2.0)
        throw ConfigError("spectrogram: need 0 <= f_min < f_max <= sample_rate/2");
}

/// Hann window, w[i] = 0.5*(1 - cos(2*pi*i/(n-1))).
inline std::vector<double> hann_window(std::size_t n) {
    if (n < 2) throw InvalidSizeError("hann window needs n >= 2");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / (n - 1)));
    return w;
}

namespace detail {

inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto t = a[i + k + len / 2] * w;
                a[i + k] = u + t;
                a[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

/// Hopped, Hann-windowed DFT. Only bins 0..n_fft/2 are kept.
/// n_frames = 1 + floor((len - n_fft)/hop).
inline ComplexGrid stft(const AudioClip& clip, const SpectrogramConfig& cfg) {
    validate_spectrogram_config(cfg, clip.sample_rate);
    const std::size_t n = clip.samples.size();
    if (n < cfg.n_fft)
        throw TooShortError("clip shorter than the analysis window (" +
                            std::to_string(n) + " < " + std::to_string(cfg.n_fft) + ")");
    const std::size_t frames = 1 + (n - cfg.n_fft) / cfg.hop;
    const std::size_t bins = cfg.n_fft / 2 + 1;
    const auto window = hann_window(cfg.n_fft);
    ComplexGrid grid(bins, frames);

    if (detail::is_pow2(cfg.n_fft)) {
        std::vector<std::complex<double>> buf(cfg.n_fft);
        for (std::size_t f = 0; f < frames; ++f) {
            for (std::size_t i = 0; i < cfg.n_fft; ++i)
                buf[i] = {window[i] * clip.samples[f * cfg.hop + i], 0.0};
            detail::fft_inplace(buf);
            for (std::size_t b = 0; b < bins; ++b) grid.at(b, f) = buf[b];
        }
    } else {
        // direct DFT fallback for odd window sizes
        for (std::size_t f = 0; f < frames; ++f) {
            for (std::size_t b = 0; b < bins; ++b) {
                std::complex<double> acc{0.0, 0.0};
                for (std::size_t i = 0; i < cfg.n_fft; ++i) {
                    const double ang =
                        -2.0 * M_PI * static_cast<double>(b * i) / static_cast<double>(cfg.n_fft);
                    acc += window[i] * clip.samples[f * cfg.hop + i] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
                grid.at(b, f) = acc;
            }
        }
    }
    return grid;
}

/// HTK mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// n_mels + 2 breakpoints equally spaced on the mel scale, mapped back to Hz.
inline std::vector<double> mel_breakpoints_hz(const SpectrogramConfig& cfg, int sample_rate) {
    validate_spectrogram_config(cfg, sample_rate);
    const double lo = hz_to_mel(cfg.f_min);
    const double hi = hz_to_mel(resolve_f_max(cfg, sample_rate));
    std::vector<double> pts(cfg.n_mels + 2);
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(cfg.n_mels + 1));
    // pin the ends exactly; the mel round-trip can drift by an ulp
    pts.front() = cfg.f_min;
    pts.back() = resolve_f_max(cfg, sample_rate);
    return pts;
}

/// Center frequency (triangle peak) of each mel band.
inline std::vector<double> mel_band_centers_hz(const SpectrogramConfig& cfg, int sample_rate) {
    auto pts = mel_breakpoints_hz(cfg, sample_rate);
    return {pts.begin() + 1, pts.end() - 1};
}

/// Triangular mel filterbank, [n_mels x n_fft/2+1]. Row m peaks at breakpoint
/// m+1 and is zero outside [breakpoint m, breakpoint m+2].
inline Grid mel_filterbank(const SpectrogramConfig& cfg, int sample_rate) {
    const auto pts = mel_breakpoints_hz(cfg, sample_rate);
    const std::size_t bins = cfg.n_fft / 2 + 1;
    Grid fb(cfg.n_mels, bins);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const double lo = pts[m], mid = pts[m + 1], hi = pts[m + 2];
        bool any = false;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.n_fft);
            double w = 0.0;
            if (f > lo && f < hi)
                w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            fb.at(m, k) = w;
            any = any || w > 0.0;
        }
        if (!any)
            throw DegenerateFilterbankError("mel band " + std::to_string(m) +
                                            " spans no FFT bin; reduce n_mels or raise n_fft");
    }
    return fb;
}

/// Mel-projected power grid, |STFT|^2 through the filterbank. No dB scaling.
inline Grid mel_power(const AudioClip& clip, const SpectrogramConfig& cfg) {
    const auto spec = stft(clip, cfg);
    const auto fb = mel_filterbank(cfg, clip.sample_rate);
    Grid power(cfg.n_mels, spec.frames);
    for (std::size_t f = 0; f < spec.frames; ++f) {
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
            double acc = 0.0;
            for (std::size_t b = 0; b < spec.bins; ++b) {
                const double w = fb.at(m, b);
                if (w == 0.0) continue;
                acc += w * std::norm(spec.at(b, f));
            }
            power.at(m, f) = acc;
        }
    }
    return power;
}

/// Log-power mel spectrogram: 10*log10(max(p, 1e-10)), shifted so the per-clip
/// max is 0 dB, clamped below at floor_db. A clip with no energy at all has no
/// max to normalize against and every cell lands on the floor.
inline MelSpectrogram mel_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg) {
    Grid power = mel_power(clip, cfg);
    double max_power = 0.0;
    for (double p : power.v) max_power = std::max(max_power, p);

    MelSpectrogram out;
    out.config = cfg;
    out.source_id = clip.source_id;
    out.values = Grid(power.rows, power.cols);
    for (std::size_t i = 0; i < power.v.size(); ++i)
        out.values.v[i] = 10.0 * std::log10(std::max(power.v[i], 1e-10));
    if (max_power > 0.0) {
        const double ref = *std::max_element(out.values.v.begin(), out.values.v.end());
        for (double& x : out.values.v) x -= ref;
    }
    for (double& x : out.values.v) x = std::max(x, cfg.floor_db);
    return out;
}

// ---------------------------------------------------------------------------
// Feature dump format: "HMEL" magic, version, dimensions and a config echo,
// followed by row-major 32-bit float cells. Used to cache features between
// runs; the float32 quantization is part of the format.

inline void write_mel_file(const std::filesystem::path& path, const MelSpectrogram& spec) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os.write("HMEL", 4);
    detail::write_pod<std::uint32_t>(os, 1);  // version
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.values.rows));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.values.cols));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.config.n_fft));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.config.hop));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.config.n_mels));
    detail::write_pod<double>(os, spec.config.f_min);
    detail::write_pod<double>(os, spec.config.f_max);
    detail::write_pod<double>(os, spec.config.floor_db);
    for (double x : spec.values.v) detail::write_pod<float>(os, static_cast<float>(x));
}

inline MelSpectrogram read_mel_file(const std::filesystem::path& path, std::string source_id = "") {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "HMEL") throw FormatError("not a mel feature file");
    const auto version = detail::read_pod<std::uint32_t>(is);
    if (version != 1) throw VersionError("unsupported feature file version");
    MelSpectrogram spec;
    const auto rows = detail::read_pod<std::uint32_t>(is);
    const auto cols = detail::read_pod<std::uint32_t>(is);
    spec.config.n_fft = detail::read_pod<std::uint32_t>(is);
    spec.config.hop = detail::read_pod<std::uint32_t>(is);
    spec.config.n_mels = detail::read_pod<std::uint32_t>(is);
    spec.config.f_min = detail::read_pod<double>(is);
    spec.config.f_max = detail::read_pod<double>(is);
    spec.config.floor_db = detail::read_pod<double>(is);
    spec.values = Grid(rows, cols);
    for (double& x : spec.values.v) x = static_cast<double>(detail::read_pod<float>(is));
    spec.source_id = std::move(source_id);
    return spec;
}

/// Round every cell to float32 precision, matching what a cache round-trip
/// produces. Keeps cold- and warm-cache runs bit-identical.
inline void quantize_to_float32(Grid& g) {
    for (double& x : g.v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace hitcast
