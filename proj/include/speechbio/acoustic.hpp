#pragma once

// Hand-crafted acoustic features: MFCC 0-12 + energy with deltas, ZCR, F0,
// HNR, jitter/shimmer, intensity, durations, pauses and phonation rate.

#include "speechbio/audio.hpp"
#include "speechbio/common.hpp"
#include "speechbio/fft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace speechbio {

// ---------------------------------------------------------------------------
// MFCC
// ---------------------------------------------------------------------------

struct mfcc_params {
    std::size_t fft_size = 512;
    std::size_t num_filters = 26;
    std::size_t num_coeffs = 13;
    double low_hz = 0.0;
    double high_hz = 8000.0;
    double log_floor = 1e-10;
    /// Regression half-width for deltas.
    int delta_window = 2;
};

/// Per-frame vector layout: cepstra 0..12 then log energy.
inline constexpr std::size_t mfcc_frame_dim = 14;
using mfcc_frame = std::array<double, mfcc_frame_dim>;

struct mfcc_result {
    std::vector<mfcc_frame> coeffs;
    std::vector<mfcc_frame> delta;
    std::vector<mfcc_frame> delta2;
    mfcc_frame mean{};
    mfcc_frame delta_mean{};
    mfcc_frame delta2_mean{};
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular filter weights, `num_filters` rows over `fft_size/2 + 1` bins.
inline std::vector<std::vector<double>> mel_filterbank(const mfcc_params &p, int sample_rate) {
    const double high = std::min(p.high_hz, sample_rate / 2.0);
    const double mel_lo = hz_to_mel(p.low_hz);
    const double mel_hi = hz_to_mel(high);
    std::vector<double> edges(p.num_filters + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(p.num_filters + 1));
    }
    const std::size_t bins = p.fft_size / 2 + 1;
    std::vector<std::vector<double>> bank(p.num_filters, std::vector<double>(bins, 0.0));
    for (std::size_t m = 0; m < p.num_filters; ++m) {
        const double lo = edges[m];
        const double mid = edges[m + 1];
        const double hi = edges[m + 2];
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(p.fft_size);
            if (f > lo && f <= mid) {
                bank[m][k] = (f - lo) / (mid - lo);
            } else if (f > mid && f < hi) {
                bank[m][k] = (hi - f) / (hi - mid);
            }
        }
    }
    return bank;
}

/// Regression deltas with edge frames replicated.
inline std::vector<mfcc_frame> compute_deltas(const std::vector<mfcc_frame> &x, int window) {
    const auto n = static_cast<long long>(x.size());
    double denom = 0.0;
    for (int k = 1; k <= window; ++k) {
        denom += 2.0 * k * k;
    }
    std::vector<mfcc_frame> d(x.size());
    for (long long t = 0; t < n; ++t) {
        for (std::size_t c = 0; c < mfcc_frame_dim; ++c) {
            double acc = 0.0;
            for (int k = 1; k <= window; ++k) {
                const auto ahead = static_cast<std::size_t>(std::min(t + k, n - 1));
                const auto behind = static_cast<std::size_t>(std::max(t - k, 0LL));
                acc += k * (x[ahead][c] - x[behind][c]);
            }
            d[static_cast<std::size_t>(t)][c] = acc / denom;
        }
    }
    return d;
}

inline mfcc_frame frame_mean(const std::vector<mfcc_frame> &x) {
    mfcc_frame m{};
    for (const auto &f : x) {
        for (std::size_t c = 0; c < mfcc_frame_dim; ++c) {
            m[c] += f[c];
        }
    }
    for (auto &v : m) {
        v /= static_cast<double>(x.size());
    }
    return m;
}

/**
 * MFCC 0-12 plus log energy for every frame, their deltas and delta-deltas, and
 * the means over the whole sample.
 *
 * Per frame: Hamming window, zero-padded FFT magnitude, triangular mel
 * filters, natural log floored at `log_floor`, orthonormal DCT-II. Energy is
 * the log of the windowed frame's sum of squares.
 */
inline mfcc_result mfcc(const frame_sequence &frames, const mfcc_params &p = {}) {
    if (frames.count < 3) {
        throw too_short_error{ "mfcc: need at least 3 frames for delta-deltas, got " + std::to_string(frames.count) };
    }
    if (p.num_coeffs + 1 != mfcc_frame_dim) {
        throw config_error{ "mfcc: coefficient count is fixed at 13" };
    }
    if (frames.window_len > p.fft_size) {
        throw config_error{ "mfcc: window longer than FFT size" };
    }
    constexpr double pi = 3.14159265358979323846;
    const std::size_t w = frames.window_len;
    std::vector<double> hamming(w);
    for (std::size_t n = 0; n < w; ++n) {
        hamming[n] = 0.54 - 0.46 * std::cos(2.0 * pi * static_cast<double>(n) / static_cast<double>(w - 1));
    }
    const auto bank = mel_filterbank(p, frames.sample_rate);
    const std::size_t m_count = p.num_filters;
    std::vector<std::vector<double>> dct(p.num_coeffs, std::vector<double>(m_count));
    for (std::size_t c = 0; c < p.num_coeffs; ++c) {
        const double scale = std::sqrt((c == 0 ? 1.0 : 2.0) / static_cast<double>(m_count));
        for (std::size_t m = 0; m < m_count; ++m) {
            dct[c][m] = scale * std::cos(pi * static_cast<double>(c) * (static_cast<double>(m) + 0.5) / static_cast<double>(m_count));
        }
    }

    mfcc_result out;
    out.coeffs.resize(frames.count);
    std::vector<double> windowed(w);
    std::vector<double> log_mel(m_count);
    for (std::size_t i = 0; i < frames.count; ++i) {
        const auto f = frames.frame(i);
        double energy = 0.0;
        for (std::size_t n = 0; n < w; ++n) {
            windowed[n] = f[n] * hamming[n];
            energy += windowed[n] * windowed[n];
        }
        const auto mag = magnitude_spectrum(windowed, p.fft_size);
        for (std::size_t m = 0; m < m_count; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < mag.size(); ++k) {
                e += bank[m][k] * mag[k];
            }
            log_mel[m] = std::log(std::max(e, p.log_floor));
        }
        auto &row = out.coeffs[i];
        for (std::size_t c = 0; c < p.num_coeffs; ++c) {
            double acc = 0.0;
            for (std::size_t m = 0; m < m_count; ++m) {
                acc += dct[c][m] * log_mel[m];
            }
            row[c] = acc;
        }
        row[p.num_coeffs] = std::log(std::max(energy, p.log_floor));
    }
    out.delta = compute_deltas(out.coeffs, p.delta_window);
    out.delta2 = compute_deltas(out.delta, p.delta_window);
    out.mean = frame_mean(out.coeffs);
    out.delta_mean = frame_mean(out.delta);
    out.delta2_mean = frame_mean(out.delta2);
    return out;
}

// ---------------------------------------------------------------------------
// Voice quality
// ---------------------------------------------------------------------------

/// Mean ZCR over voiced frames; empty when nothing is voiced.
inline std::optional<double> voiced_zcr(const frame_sequence &frames, const voicing_mask &mask) {
    if (mask.size() != frames.count) {
        throw shape_error{ "zcr: mask/frame count mismatch" };
    }
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < frames.count; ++i) {
        if (mask[i]) {
            acc += zero_crossing_rate(frames.frame(i));
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return acc / static_cast<double>(n);
}

struct pitch_params {
    double f0_min = 75.0;
    double f0_max = 500.0;
    /// Frames whose best normalized autocorrelation is below this are rejected.
    double min_correlation = 0.5;
    /// A shorter-lag peak within this much of the best peak wins (octave guard).
    double octave_tolerance = 0.02;
};

/// Normalized autocorrelation of a frame at an integer lag over the overlap.
inline double normalized_autocorrelation(std::span<const double> x, std::size_t lag) {
    if (lag >= x.size()) {
        return 0.0;
    }
    const std::size_t n = x.size() - lag;
    double xy = 0.0;
    double xx = 0.0;
    double yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xy += x[i] * x[i + lag];
        xx += x[i] * x[i];
        yy += x[i + lag] * x[i + lag];
    }
    const double d = std::sqrt(xx * yy);
    return d > 0.0 ? xy / d : 0.0;
}

/// Quadratic interpolation of the autocorrelation at a fractional lag.
inline double autocorrelation_at(std::span<const double> x, double lag) {
    const auto l = static_cast<std::size_t>(std::llround(lag));
    if (l == 0 || l + 1 >= x.size()) {
        return normalized_autocorrelation(x, l);
    }
    const double rm = normalized_autocorrelation(x, l - 1);
    const double r0 = normalized_autocorrelation(x, l);
    const double rp = normalized_autocorrelation(x, l + 1);
    const double d = lag - static_cast<double>(l);
    const double r = r0 + 0.5 * d * (rp - rm) + 0.5 * d * d * (rp - 2.0 * r0 + rm);
    return std::min(r, 1.0);
}

struct pitch_frame {
    bool accepted = false;
    double f0 = 0.0;
    /// Fractional period in samples.
    double lag = 0.0;
    double correlation = 0.0;
};

struct pitch_track {
    std::vector<pitch_frame> frames;
    std::optional<double> f0_mean;
    std::optional<double> f0_sd;

    [[nodiscard]] std::size_t accepted_count() const {
        return static_cast<std::size_t>(std::count_if(frames.begin(), frames.end(), [](const pitch_frame &f) { return f.accepted; }));
    }
};

/// Autocorrelation pitch estimate for one frame.
inline pitch_frame estimate_pitch(std::span<const double> x, int sample_rate, const pitch_params &p = {}) {
    pitch_frame out;
    const double lag_min = sample_rate / p.f0_max;
    const double lag_max = sample_rate / p.f0_min;
    const auto lo = static_cast<std::size_t>(std::ceil(lag_min));
    auto hi = static_cast<std::size_t>(std::floor(lag_max));
    if (x.size() < 3 || lo < 1) {
        return out;
    }
    hi = std::min(hi, x.size() - 2);
    if (hi <= lo) {
        return out;
    }
    std::vector<double> r(hi + 2, 0.0);
    for (std::size_t lag = lo - 1; lag <= hi + 1; ++lag) {
        r[lag] = normalized_autocorrelation(x, lag);
    }
    double best = -1.0;
    for (std::size_t lag = lo; lag <= hi; ++lag) {
        if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
            best = std::max(best, r[lag]);
        }
    }
    if (best < p.min_correlation) {
        return out;
    }
    std::size_t pick = 0;
    for (std::size_t lag = lo; lag <= hi; ++lag) {
        if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= best - p.octave_tolerance) {
            pick = lag;
            break;
        }
    }
    const double rm = r[pick - 1];
    const double r0 = r[pick];
    const double rp = r[pick + 1];
    const double curvature = rm - 2.0 * r0 + rp;
    double delta = 0.0;
    if (curvature < 0.0) {
        delta = std::clamp(0.5 * (rm - rp) / curvature, -0.5, 0.5);
    }
    const double peak = std::min(1.0, r0 - 0.25 * (rm - rp) * delta);
    if (peak < p.min_correlation) {
        return out;
    }
    out.accepted = true;
    out.lag = std::clamp(static_cast<double>(pick) + delta, lag_min, lag_max);
    out.f0 = sample_rate / out.lag;
    out.correlation = peak;
    return out;
}

/// F0 track over voiced frames; mean/sd over accepted frames.
inline pitch_track f0(const frame_sequence &frames, const voicing_mask &mask, const pitch_params &p = {}) {
    if (mask.size() != frames.count) {
        throw shape_error{ "f0: mask/frame count mismatch" };
    }
    pitch_track out;
    out.frames.resize(frames.count);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < frames.count; ++i) {
        if (!mask[i]) {
            continue;
        }
        out.frames[i] = estimate_pitch(frames.frame(i), frames.sample_rate, p);
        if (out.frames[i].accepted) {
            sum += out.frames[i].f0;
            ++n;
        }
    }
    if (n > 0) {
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto &f : out.frames) {
            if (f.accepted) {
                ss += (f.f0 - mean) * (f.f0 - mean);
            }
        }
        out.f0_mean = mean;
        out.f0_sd = std::sqrt(ss / static_cast<double>(n));
    }
    return out;
}

struct hnr_params {
    double min_db = -20.0;
    double max_db = 40.0;
};

/// 10 log10(r / (1 - r)) clamped to the configured range.
inline double hnr_from_correlation(double r, const hnr_params &p = {}) {
    if (r >= 1.0) {
        return p.max_db;
    }
    if (r <= 0.0) {
        return p.min_db;
    }
    return std::clamp(10.0 * std::log10(r / (1.0 - r)), p.min_db, p.max_db);
}

/// Mean HNR over voiced frames with an accepted F0, using r at the F0 lag.
inline std::optional<double> hnr(const frame_sequence &frames, const voicing_mask &mask, const pitch_track &track, const hnr_params &p = {}) {
    if (mask.size() != frames.count || track.frames.size() != frames.count) {
        throw shape_error{ "hnr: mask/track/frame count mismatch" };
    }
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < frames.count; ++i) {
        if (!mask[i] || !track.frames[i].accepted) {
            continue;
        }
        acc += hnr_from_correlation(autocorrelation_at(frames.frame(i), track.frames[i].lag), p);
        ++n;
    }
    if (n == 0) {
        return std::nullopt;
    }
    return acc / static_cast<double>(n);
}

struct perturbation {
    std::optional<double> jitter_local;
    std::optional<double> shimmer_local;
    /// Sub-sample pitch mark positions, for inspection.
    std::vector<double> marks;
};

namespace detail {

/// Vertex of the parabola through (i-1, i, i+1): (offset, height).
inline std::pair<double, double> refine_peak(std::span<const double> x, std::size_t i) {
    if (i == 0 || i + 1 >= x.size()) {
        return { 0.0, x[i] };
    }
    const double a = x[i - 1];
    const double b = x[i];
    const double c = x[i + 1];
    const double curv = a - 2.0 * b + c;
    if (curv >= 0.0) {
        return { 0.0, b };
    }
    const double d = std::clamp(0.5 * (a - c) / curv, -0.5, 0.5);
    return { d, b - 0.25 * (a - c) * d };
}

inline std::size_t argmax_in(std::span<const double> x, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i) {
        if (x[i] > x[best]) {
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/**
 * Local jitter and shimmer from waveform pitch marks.
 *
 * Inside each run of consecutive F0-accepted frames, one maximum is picked per
 * expected period: the first in the opening period, each next one within
 * +-25 % of the local period after its predecessor. Marks are refined to
 * sub-sample precision. Jitter is mean |T(i+1) - T(i)| / mean T; shimmer is
 * mean |A(i+1) - A(i)| / mean A with A the peak height at each mark.
 * Differences never straddle two runs.
 */
inline perturbation jitter_shimmer(const audio_buffer &buf, const pitch_track &track, std::size_t window_len, std::size_t hop) {
    perturbation out;
    const std::span<const double> x{ buf.samples };
    const std::size_t nf = track.frames.size();

    std::vector<double> periods;
    std::vector<double> amps;
    double period_diff = 0.0;
    std::size_t period_pairs = 0;
    double amp_diff = 0.0;
    std::size_t amp_pairs = 0;

    std::size_t f = 0;
    while (f < nf) {
        if (!track.frames[f].accepted) {
            ++f;
            continue;
        }
        std::size_t g = f;
        while (g < nf && track.frames[g].accepted) {
            ++g;
        }
        const std::size_t run_start = f * hop;
        const std::size_t run_end = std::min(x.size(), (g - 1) * hop + window_len);
        const auto local_period = [&](double pos) {
            const double centre = (pos - static_cast<double>(window_len) / 2.0) / static_cast<double>(hop);
            const auto idx = static_cast<std::size_t>(std::clamp(std::llround(centre), static_cast<long long>(f), static_cast<long long>(g - 1)));
            return track.frames[idx].lag;
        };

        std::vector<double> run_marks;
        std::vector<double> run_amps;
        const double t0 = local_period(static_cast<double>(run_start));
        std::size_t search_lo = run_start;
        std::size_t search_hi = std::min(run_end, run_start + static_cast<std::size_t>(std::ceil(t0)));
        while (search_hi > search_lo && search_hi <= run_end) {
            const std::size_t i = detail::argmax_in(x, search_lo, search_hi);
            const auto [offset, height] = detail::refine_peak(x, i);
            const double mark = static_cast<double>(i) + offset;
            run_marks.push_back(mark);
            run_amps.push_back(std::abs(height));
            const double t = local_period(mark);
            search_lo = static_cast<std::size_t>(std::ceil(mark + 0.75 * t));
            search_hi = static_cast<std::size_t>(std::floor(mark + 1.25 * t)) + 1;
            if (search_hi > run_end) {
                break;
            }
        }
        for (std::size_t k = 1; k < run_marks.size(); ++k) {
            periods.push_back(run_marks[k] - run_marks[k - 1]);
            if (k >= 2) {
                period_diff += std::abs(periods.back() - periods[periods.size() - 2]);
                ++period_pairs;
            }
        }
        for (std::size_t k = 0; k < run_amps.size(); ++k) {
            amps.push_back(run_amps[k]);
            if (k >= 1) {
                amp_diff += std::abs(run_amps[k] - run_amps[k - 1]);
                ++amp_pairs;
            }
        }
        out.marks.insert(out.marks.end(), run_marks.begin(), run_marks.end());
        f = g;
    }

    if (periods.size() < 3 || period_pairs == 0) {
        return out;
    }
    double mean_t = 0.0;
    for (const double t : periods) {
        mean_t += t;
    }
    mean_t /= static_cast<double>(periods.size());
    out.jitter_local = (period_diff / static_cast<double>(period_pairs)) / mean_t;

    double mean_a = 0.0;
    for (const double a : amps) {
        mean_a += a;
    }
    mean_a /= static_cast<double>(amps.size());
    if (amp_pairs > 0 && mean_a > 0.0) {
        out.shimmer_local = (amp_diff / static_cast<double>(amp_pairs)) / mean_a;
    }
    return out;
}

/// Convenience overload taking the framing geometry from a frame sequence.
inline perturbation jitter_shimmer(const audio_buffer &buf, const pitch_track &track, const frame_sequence &frames) {
    return jitter_shimmer(buf, track, frames.window_len, frames.hop);
}

// ---------------------------------------------------------------------------
// Level, duration and rate features
// ---------------------------------------------------------------------------

/// Mean over frames of 20 log10(RMS / reference), floored at 0 dB.
inline double intensity(const frame_sequence &frames, double reference = 1e-5) {
    if (frames.empty()) {
        throw empty_input_error{ "intensity: no frames" };
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < frames.count; ++i) {
        const double r = rms(frames.frame(i));
        acc += r > 0.0 ? std::max(0.0, 20.0 * std::log10(r / reference)) : 0.0;
    }
    return acc / static_cast<double>(frames.count);
}

struct pause_summary {
    double total_audio_s = 0.0;
    double total_speech_s = 0.0;
    int short_count = 0;
    int medium_count = 0;
    int long_count = 0;
    double mean_pause_s = 0.0;
    double pause_to_speech_ratio = 0.0;
    /// Set when pauses exist but no speech remains; ratio holds the cap.
    bool ratio_capped = false;
};

inline pause_summary durational_and_pauses(const pause_list &pauses, double ratio_cap = 10.0) {
    pause_summary s;
    s.total_audio_s = pauses.total_audio_s;
    s.total_speech_s = pauses.total_speech_s;
    double paused = 0.0;
    for (const auto &p : pauses.pauses) {
        switch (p.kind) {
            case pause_class::short_pause: ++s.short_count; break;
            case pause_class::medium_pause: ++s.medium_count; break;
            case pause_class::long_pause: ++s.long_count; break;
        }
        paused += p.duration();
    }
    if (pauses.pauses.empty()) {
        return s;
    }
    s.mean_pause_s = paused / static_cast<double>(pauses.pauses.size());
    if (s.total_speech_s <= 1e-12) {
        s.pause_to_speech_ratio = ratio_cap;
        s.ratio_capped = true;
    } else {
        s.pause_to_speech_ratio = std::min(paused / s.total_speech_s, ratio_cap);
        s.ratio_capped = paused / s.total_speech_s > ratio_cap;
    }
    return s;
}

inline double phonation_rate(const voicing_mask &mask) {
    if (mask.empty()) {
        throw empty_input_error{ "phonation_rate: empty mask" };
    }
    return static_cast<double>(std::count(mask.begin(), mask.end(), true)) / static_cast<double>(mask.size());
}

// ---------------------------------------------------------------------------
// Full acoustic vector
// ---------------------------------------------------------------------------

/// Values used for voiced-only features when nothing usable is voiced.
struct imputation_defaults {
    double zcr = 0.0;
    double f0 = 0.0;
    double hnr = -20.0;
    double jitter = 0.0;
    double shimmer = 0.0;
};

struct acoustic_params {
    voicing_params voicing;
    pause_params pauses;
    mfcc_params mfcc;
    pitch_params pitch;
    hnr_params hnr;
    imputation_defaults impute;
    double intensity_reference = 1e-5;
    double pause_ratio_cap = 10.0;
    double min_duration_s = 2.0;

    static acoustic_params from_config(const config &c) {
        acoustic_params p;
        p.voicing.energy_threshold = c.get_double("energy_threshold", p.voicing.energy_threshold);
        p.voicing.zcr_threshold = c.get_double("zcr_threshold", p.voicing.zcr_threshold);
        p.pauses.min_pause_seconds = c.get_double("min_pause_seconds", p.pauses.min_pause_seconds);
        p.pitch.f0_min = c.get_double("f0_min", p.pitch.f0_min);
        p.pitch.f0_max = c.get_double("f0_max", p.pitch.f0_max);
        p.pitch.min_correlation = c.get_double("f0_min_correlation", p.pitch.min_correlation);
        p.hnr.min_db = c.get_double("hnr_min_db", p.hnr.min_db);
        p.hnr.max_db = c.get_double("hnr_max_db", p.hnr.max_db);
        p.impute.f0 = c.get_double("impute_f0", p.impute.f0);
        p.impute.hnr = c.get_double("impute_hnr", p.impute.hnr);
        p.impute.jitter = c.get_double("impute_jitter", p.impute.jitter);
        p.impute.shimmer = c.get_double("impute_shimmer", p.impute.shimmer);
        p.impute.zcr = c.get_double("impute_zcr", p.impute.zcr);
        p.intensity_reference = c.get_double("intensity_reference", p.intensity_reference);
        p.pause_ratio_cap = c.get_double("pause_ratio_cap", p.pause_ratio_cap);
        return p;
    }
};

/**
 * Fixed-order acoustic feature vector. `names()` and `values()` are kept in
 * lockstep; absence flags come last as 0/1 columns.
 */
struct acoustic_feature_vector {
    std::array<double, 13> mfcc_mean{};
    double mfcc_energy_mean = 0.0;
    mfcc_frame mfcc_delta_mean{};
    mfcc_frame mfcc_delta2_mean{};
    double zcr = 0.0;
    double f0_mean = 0.0;
    double f0_sd = 0.0;
    double hnr_mean = 0.0;
    double jitter_local = 0.0;
    double shimmer_local = 0.0;
    double intensity_mean = 0.0;
    double total_audio_s = 0.0;
    double total_speech_s = 0.0;
    int short_pauses = 0;
    int medium_pauses = 0;
    int long_pauses = 0;
    double mean_pause_s = 0.0;
    double pause_to_speech_ratio = 0.0;
    double phonation_rate = 0.0;

    bool zcr_absent = false;
    bool f0_absent = false;
    bool hnr_absent = false;
    bool jitter_absent = false;
    bool shimmer_absent = false;
    bool pause_ratio_capped = false;

    static const std::vector<std::string> &names() {
        static const std::vector<std::string> n = [] {
            std::vector<std::string> v;
            for (int i = 0; i <= 12; ++i) {
                v.push_back("mfcc" + std::to_string(i) + "_mean");
            }
            v.emplace_back("mfcc_energy_mean");
            for (int i = 0; i <= 12; ++i) {
                v.push_back("mfcc" + std::to_string(i) + "_delta_mean");
            }
            v.emplace_back("mfcc_energy_delta_mean");
            for (int i = 0; i <= 12; ++i) {
                v.push_back("mfcc" + std::to_string(i) + "_delta2_mean");
            }
            v.emplace_back("mfcc_energy_delta2_mean");
            for (const char *s : { "zcr", "f0_mean", "f0_sd", "hnr_mean", "jitter_local", "shimmer_local", "intensity_mean", "total_audio_s", "total_speech_s", "short_pauses", "medium_pauses", "long_pauses", "mean_pause_s", "pause_to_speech_ratio", "phonation_rate", "zcr_absent", "f0_absent", "hnr_absent", "jitter_absent", "shimmer_absent", "pause_ratio_capped" }) {
                v.emplace_back(s);
            }
            return v;
        }();
        return n;
    }

    static std::size_t dim() { return names().size(); }

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(dim());
        v.insert(v.end(), mfcc_mean.begin(), mfcc_mean.end());
        v.push_back(mfcc_energy_mean);
        v.insert(v.end(), mfcc_delta_mean.begin(), mfcc_delta_mean.end());
        v.insert(v.end(), mfcc_delta2_mean.begin(), mfcc_delta2_mean.end());
        for (const double d : { zcr, f0_mean, f0_sd, hnr_mean, jitter_local, shimmer_local, intensity_mean, total_audio_s, total_speech_s }) {
            v.push_back(d);
        }
        v.push_back(short_pauses);
        v.push_back(medium_pauses);
        v.push_back(long_pauses);
        v.push_back(mean_pause_s);
        v.push_back(pause_to_speech_ratio);
        v.push_back(phonation_rate);
        for (const bool b : { zcr_absent, f0_absent, hnr_absent, jitter_absent, shimmer_absent, pause_ratio_capped }) {
            v.push_back(b ? 1.0 : 0.0);
        }
        return v;
    }
};

/// Runs framing, voicing, pauses and every acoustic feature on one recording.
inline acoustic_feature_vector extract_acoustic(const audio_buffer &input, const acoustic_params &p = {}) {
    const audio_buffer buf = input.sample_rate == canonical_rate ? input : resample(input, canonical_rate);
    if (buf.duration() < p.min_duration_s) {
        throw too_short_error{ "extract_acoustic: " + std::to_string(buf.duration()) + " s of audio, need at least " + std::to_string(p.min_duration_s) + " s" };
    }
    const auto frames = frame(buf);
    const auto mask = detect_voiced(frames, p.voicing);
    const auto pauses = detect_pauses(mask, frames, p.pauses);

    acoustic_feature_vector v;
    const auto m = mfcc(frames, p.mfcc);
    std::copy_n(m.mean.begin(), 13, v.mfcc_mean.begin());
    v.mfcc_energy_mean = m.mean[13];
    v.mfcc_delta_mean = m.delta_mean;
    v.mfcc_delta2_mean = m.delta2_mean;

    const auto z = voiced_zcr(frames, mask);
    v.zcr_absent = !z;
    v.zcr = z.value_or(p.impute.zcr);

    const auto track = f0(frames, mask, p.pitch);
    v.f0_absent = !track.f0_mean;
    v.f0_mean = track.f0_mean.value_or(p.impute.f0);
    v.f0_sd = track.f0_sd.value_or(0.0);

    const auto h = hnr(frames, mask, track, p.hnr);
    v.hnr_absent = !h;
    v.hnr_mean = h.value_or(p.impute.hnr);

    const auto js = jitter_shimmer(buf, track, frames);
    v.jitter_absent = !js.jitter_local;
    v.jitter_local = js.jitter_local.value_or(p.impute.jitter);
    v.shimmer_absent = !js.shimmer_local;
    v.shimmer_local = js.shimmer_local.value_or(p.impute.shimmer);

    v.intensity_mean = intensity(frames, p.intensity_reference);

    const auto ps = durational_and_pauses(pauses, p.pause_ratio_cap);
    v.total_audio_s = ps.total_audio_s;
    v.total_speech_s = ps.total_speech_s;
    v.short_pauses = ps.short_count;
    v.medium_pauses = ps.medium_count;
    v.long_pauses = ps.long_count;
    v.mean_pause_s = ps.mean_pause_s;
    v.pause_to_speech_ratio = ps.pause_to_speech_ratio;
    v.pause_ratio_capped = ps.ratio_capped;

    v.phonation_rate = phonation_rate(mask);
    return v;
}

}  // namespace speechbio
