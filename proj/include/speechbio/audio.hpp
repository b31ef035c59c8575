#pragma once

// Audio ingest: WAV I/O, resampling, fixed-length segmentation, 16 ms / 8 ms
// framing, energy+ZCR voicing and pause structure.

#include "speechbio/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace speechbio {

/// Canonical analysis rate; everything downstream of ingest assumes it.
inline constexpr int canonical_rate = 16000;

/// Mono PCM in [-1, 1].
struct audio_buffer {
    std::vector<double> samples;
    int sample_rate = canonical_rate;

    [[nodiscard]] double duration() const noexcept {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

enum class wav_encoding { pcm16, float32 };

namespace detail {

inline std::uint16_t read_u16(const unsigned char *p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

inline std::uint32_t read_u32(const unsigned char *p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) | (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::string &out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

inline std::vector<unsigned char> read_file_bytes(const std::string &path) {
    std::ifstream in{ path, std::ios::binary };
    if (!in) {
        throw error{ "cannot open file: " + path };
    }
    return { std::istreambuf_iterator<char>{ in }, std::istreambuf_iterator<char>{} };
}

}  // namespace detail

/**
 * Decodes an in-memory RIFF/WAVE image.
 *
 * Accepts PCM 16-bit integer and IEEE 32-bit float (plain or
 * WAVE_FORMAT_EXTENSIBLE), one or two channels. Stereo is downmixed by the
 * per-sample channel mean; integers are scaled by 1/32768.
 */
inline audio_buffer decode_wav(std::span<const unsigned char> bytes) {
    if (bytes.size() < 12) {
        throw format_error{ "WAV: file too small for a RIFF header" };
    }
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0) {
        throw format_error{ "WAV: missing RIFF magic" };
    }
    if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw format_error{ "WAV: missing WAVE form type" };
    }

    bool have_fmt = false;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    std::span<const unsigned char> data;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char *chunk = bytes.data() + pos;
        const std::uint32_t size = detail::read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) {
            throw format_error{ "WAV: chunk extends past end of file" };
        }
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) {
                throw format_error{ "WAV: fmt chunk too short" };
            }
            const unsigned char *f = bytes.data() + body;
            format = detail::read_u16(f);
            channels = detail::read_u16(f + 2);
            rate = detail::read_u32(f + 4);
            bits = detail::read_u16(f + 14);
            if (format == 0xFFFE) {
                if (size < 40) {
                    throw format_error{ "WAV: extensible fmt chunk too short" };
                }
                format = detail::read_u16(f + 24);  // first two bytes of the subformat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.subspan(body, size);
            have_data = true;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) {
        throw format_error{ "WAV: no fmt chunk" };
    }
    if (!have_data) {
        throw format_error{ "WAV: no data chunk" };
    }
    if (rate == 0) {
        throw format_error{ "WAV: zero sample rate" };
    }
    if (channels < 1 || channels > 2) {
        throw unsupported_codec_error{ "WAV: unsupported channel count " + std::to_string(channels) };
    }
    const bool pcm16 = format == 1 && bits == 16;
    const bool f32 = format == 3 && bits == 32;
    if (!pcm16 && !f32) {
        throw unsupported_codec_error{ "WAV: unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) + " bits)" };
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t n = data.size() / frame_bytes;

    audio_buffer out;
    out.sample_rate = static_cast<int>(rate);
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char *p = data.data() + i * frame_bytes + c * bytes_per_sample;
            double v = 0.0;
            if (pcm16) {
                v = static_cast<std::int16_t>(detail::read_u16(p)) / 32768.0;
            } else {
                const std::uint32_t raw = detail::read_u32(p);
                float fv = 0.0f;
                std::memcpy(&fv, &raw, sizeof fv);
                v = static_cast<double>(fv);
                if (!std::isfinite(v)) {
                    throw format_error{ "WAV: non-finite float sample at index " + std::to_string(i) };
                }
                v = std::clamp(v, -1.0, 1.0);
            }
            acc += v;
        }
        out.samples[i] = acc / channels;
    }
    return out;
}

inline audio_buffer load_wav(const std::string &path) {
    const auto bytes = detail::read_file_bytes(path);
    try {
        return decode_wav(bytes);
    } catch (const format_error &e) {
        throw format_error{ path + ": " + e.what() };
    } catch (const unsupported_codec_error &e) {
        throw unsupported_codec_error{ path + ": " + e.what() };
    }
}

/// Encodes interleaved frames (`channels` values per frame) as a WAV image.
inline std::string encode_wav(std::span<const double> interleaved, int sample_rate, int channels = 1, wav_encoding enc = wav_encoding::pcm16) {
    const std::uint16_t bits = enc == wav_encoding::pcm16 ? 16 : 32;
    const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
    const auto data_size = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));

    std::string out;
    out.reserve(44 + data_size);
    out += "RIFF";
    detail::put_u32(out, 36 + data_size);
    out += "WAVEfmt ";
    detail::put_u32(out, 16);
    detail::put_u16(out, enc == wav_encoding::pcm16 ? 1 : 3);
    detail::put_u16(out, static_cast<std::uint16_t>(channels));
    detail::put_u32(out, static_cast<std::uint32_t>(sample_rate));
    detail::put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
    detail::put_u16(out, block);
    detail::put_u16(out, bits);
    out += "data";
    detail::put_u32(out, data_size);
    for (const double s : interleaved) {
        if (enc == wav_encoding::pcm16) {
            const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
            const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
            detail::put_u16(out, static_cast<std::uint16_t>(v));
        } else {
            const auto f = static_cast<float>(s);
            std::uint32_t raw = 0;
            std::memcpy(&raw, &f, sizeof raw);
            detail::put_u32(out, raw);
        }
    }
    return out;
}

inline void write_wav(const std::string &path, const audio_buffer &buf, wav_encoding enc = wav_encoding::pcm16) {
    const std::string image = encode_wav(buf.samples, buf.sample_rate, 1, enc);
    std::ofstream out{ path, std::ios::binary };
    if (!out) {
        throw error{ "cannot write WAV: " + path };
    }
    out.write(image.data(), static_cast<std::streamsize>(image.size()));
}

/**
 * Windowed-sinc resampler, 16 input taps per output sample under a Kaiser
 * window. The sinc cutoff tracks the lower of the two Nyquist rates so
 * downsampling is anti-aliased.
 */
inline audio_buffer resample(const audio_buffer &buf, int target_rate) {
    if (buf.sample_rate <= 0 || target_rate <= 0) {
        throw error{ "resample: sample rates must be positive" };
    }
    if (buf.sample_rate == target_rate) {
        return buf;
    }
    constexpr int taps = 16;
    constexpr double half_width = taps / 2.0;
    constexpr double kaiser_beta = 6.0;
    constexpr double pi = 3.14159265358979323846;

    const double ratio = static_cast<double>(target_rate) / buf.sample_rate;
    const double cutoff = std::min(1.0, ratio);
    const auto n_in = static_cast<long long>(buf.samples.size());
    const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * ratio));
    const double i0_beta = std::cyl_bessel_i(0.0, kaiser_beta);

    audio_buffer out;
    out.sample_rate = target_rate;
    out.samples.resize(n_out);
    for (std::size_t n = 0; n < n_out; ++n) {
        const double x = static_cast<double>(n) / ratio;
        const auto base = static_cast<long long>(std::floor(x));
        double acc = 0.0;
        double weight_sum = 0.0;
        for (long long k = base - taps / 2 + 1; k <= base + taps / 2; ++k) {
            const double t = x - static_cast<double>(k);
            const double u = t / half_width;
            if (std::abs(u) >= 1.0) {
                continue;
            }
            const double arg = pi * cutoff * t;
            const double sinc = arg == 0.0 ? 1.0 : std::sin(arg) / arg;
            const double w = cutoff * sinc * std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(1.0 - u * u)) / i0_beta;
            weight_sum += w;
            if (k >= 0 && k < n_in) {
                acc += w * buf.samples[static_cast<std::size_t>(k)];
            }
        }
        out.samples[n] = std::clamp(weight_sum != 0.0 ? acc / weight_sum : 0.0, -1.0, 1.0);
    }
    return out;
}

struct segment_params {
    double segment_seconds = 10.0;
    /// Final partial segment is kept only if at least this long.
    double min_tail_seconds = 2.0;
};

/// Splits into consecutive non-overlapping segments.
inline std::vector<audio_buffer> segment(const audio_buffer &buf, const segment_params &p = {}) {
    if (buf.samples.empty()) {
        throw empty_input_error{ "segment: empty audio buffer" };
    }
    const auto seg_len = static_cast<std::size_t>(std::llround(p.segment_seconds * buf.sample_rate));
    const auto min_tail = static_cast<std::size_t>(std::llround(p.min_tail_seconds * buf.sample_rate));
    if (seg_len == 0) {
        throw config_error{ "segment: segment length rounds to zero samples" };
    }
    std::vector<audio_buffer> out;
    for (std::size_t start = 0; start < buf.samples.size(); start += seg_len) {
        const std::size_t len = std::min(seg_len, buf.samples.size() - start);
        if (len < seg_len && len < min_tail) {
            break;
        }
        audio_buffer s;
        s.sample_rate = buf.sample_rate;
        s.samples.assign(buf.samples.begin() + static_cast<std::ptrdiff_t>(start), buf.samples.begin() + static_cast<std::ptrdiff_t>(start + len));
        out.push_back(std::move(s));
    }
    return out;
}

/// Fixed-length analysis windows, stored contiguously.
struct frame_sequence {
    std::vector<double> data;
    std::size_t window_len = 0;
    std::size_t hop = 0;
    std::size_t count = 0;
    int sample_rate = canonical_rate;
    /// Length of the buffer the frames were cut from.
    std::size_t total_samples = 0;

    [[nodiscard]] std::span<const double> frame(std::size_t i) const { return { data.data() + i * window_len, window_len }; }

    [[nodiscard]] double origin_time(std::size_t i) const { return static_cast<double>(i * hop) / sample_rate; }

    [[nodiscard]] double hop_seconds() const { return static_cast<double>(hop) / sample_rate; }

    [[nodiscard]] double total_seconds() const { return static_cast<double>(total_samples) / sample_rate; }

    [[nodiscard]] bool empty() const noexcept { return count == 0; }
};

inline constexpr double frame_window_seconds = 0.016;
inline constexpr double frame_hop_seconds = 0.008;

/// 16 ms windows every 8 ms (256 / 128 samples at 16 kHz).
inline frame_sequence frame(const audio_buffer &buf) {
    frame_sequence fs;
    fs.sample_rate = buf.sample_rate;
    fs.window_len = static_cast<std::size_t>(std::llround(frame_window_seconds * buf.sample_rate));
    fs.hop = static_cast<std::size_t>(std::llround(frame_hop_seconds * buf.sample_rate));
    fs.total_samples = buf.samples.size();
    if (fs.hop == 0 || fs.window_len == 0) {
        throw config_error{ "frame: sample rate too low for 8 ms hop" };
    }
    if (buf.samples.size() < fs.window_len) {
        throw too_short_error{ "frame: " + std::to_string(buf.samples.size()) + " samples is shorter than one " + std::to_string(fs.window_len) + "-sample window" };
    }
    fs.count = (buf.samples.size() - fs.window_len) / fs.hop + 1;
    fs.data.resize(fs.count * fs.window_len);
    for (std::size_t i = 0; i < fs.count; ++i) {
        std::copy_n(buf.samples.begin() + static_cast<std::ptrdiff_t>(i * fs.hop), fs.window_len, fs.data.begin() + static_cast<std::ptrdiff_t>(i * fs.window_len));
    }
    return fs;
}

/// Sign changes per sample pair; zero counts as positive.
inline double zero_crossing_rate(std::span<const double> x) {
    if (x.size() < 2) {
        return 0.0;
    }
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if ((x[i - 1] >= 0.0) != (x[i] >= 0.0)) {
            ++crossings;
        }
    }
    return static_cast<double>(crossings) / static_cast<double>(x.size() - 1);
}

inline double rms(std::span<const double> x) {
    if (x.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const double v : x) {
        acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(x.size()));
}

using voicing_mask = std::vector<bool>;

struct voicing_params {
    /// Frame RMS, full scale = 1.
    double energy_threshold = 0.02;
    /// Crossings per sample.
    double zcr_threshold = 0.25;
};

/// Voiced iff loud enough and not noise-like.
inline voicing_mask detect_voiced(const frame_sequence &frames, const voicing_params &p = {}) {
    voicing_mask mask(frames.count);
    for (std::size_t i = 0; i < frames.count; ++i) {
        const auto f = frames.frame(i);
        mask[i] = rms(f) >= p.energy_threshold && zero_crossing_rate(f) <= p.zcr_threshold;
    }
    return mask;
}

enum class pause_class { short_pause, medium_pause, long_pause };

inline const char *to_string(pause_class c) {
    switch (c) {
        case pause_class::short_pause: return "short";
        case pause_class::medium_pause: return "medium";
        case pause_class::long_pause: return "long";
    }
    return "?";
}

/// Bins: short [floor, 1 s), medium [1 s, 2 s], long (2 s, inf).
inline pause_class classify_pause(double seconds) {
    constexpr double tol = 1e-9;
    if (seconds < 1.0 - tol) {
        return pause_class::short_pause;
    }
    if (seconds <= 2.0 + tol) {
        return pause_class::medium_pause;
    }
    return pause_class::long_pause;
}

struct pause {
    double start_s = 0.0;
    double end_s = 0.0;
    pause_class kind = pause_class::short_pause;

    [[nodiscard]] double duration() const noexcept { return end_s - start_s; }
};

struct pause_list {
    std::vector<pause> pauses;
    double total_speech_s = 0.0;
    double total_audio_s = 0.0;
};

struct pause_params {
    double min_pause_seconds = 0.25;
};

/// Maximal unvoiced runs of at least `min_pause_seconds` become pauses.
inline pause_list detect_pauses(const voicing_mask &mask, const frame_sequence &frames, const pause_params &p = {}) {
    if (mask.size() != frames.count) {
        throw shape_error{ "detect_pauses: mask has " + std::to_string(mask.size()) + " entries for " + std::to_string(frames.count) + " frames" };
    }
    pause_list out;
    out.total_audio_s = frames.total_seconds();
    const double hop_s = frames.hop_seconds();
    double paused = 0.0;
    std::size_t i = 0;
    while (i < mask.size()) {
        if (mask[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < mask.size() && !mask[j]) {
            ++j;
        }
        const double dur = static_cast<double>((j - i) * frames.hop) / frames.sample_rate;
        if (dur >= p.min_pause_seconds - 1e-9) {
            const double start = static_cast<double>(i) * hop_s;
            out.pauses.push_back({ start, start + dur, classify_pause(dur) });
            paused += dur;
        }
        i = j;
    }
    out.total_speech_s = out.total_audio_s - paused;
    return out;
}

}  // namespace speechbio
