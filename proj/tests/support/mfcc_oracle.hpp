#pragma once

// Brute-force MFCC written straight from the formulas: direct DFT, mel
// triangles evaluated per bin, explicit DCT-II and regression deltas.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace speechbio::test {

struct oracle_mfcc {
    std::vector<std::vector<double>> frames;  // [frame][13 cepstra + log energy]
    std::vector<double> mean;
    std::vector<double> delta_mean;
    std::vector<double> delta2_mean;
};

inline std::vector<std::vector<double>> oracle_deltas(const std::vector<std::vector<double>> &x) {
    const long long n = static_cast<long long>(x.size());
    std::vector<std::vector<double>> d(x.size(), std::vector<double>(x[0].size()));
    auto at = [&](long long t) -> const std::vector<double> & { return x[static_cast<std::size_t>(std::clamp(t, 0LL, n - 1))]; };
    for (long long t = 0; t < n; ++t) {
        for (std::size_t c = 0; c < x[0].size(); ++c) {
            const double num = 1.0 * (at(t + 1)[c] - at(t - 1)[c]) + 2.0 * (at(t + 2)[c] - at(t - 2)[c]);
            d[static_cast<std::size_t>(t)][c] = num / 10.0;
        }
    }
    return d;
}

inline std::vector<double> oracle_mean(const std::vector<std::vector<double>> &x) {
    std::vector<double> m(x[0].size(), 0.0);
    for (const auto &r : x) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            m[c] += r[c] / static_cast<double>(x.size());
        }
    }
    return m;
}

/// 16 ms / 8 ms frames at `rate`, Hamming, 512-point DFT magnitude, 26 mel filters 0-8000 Hz.
inline oracle_mfcc brute_force_mfcc(const std::vector<double> &signal, int rate) {
    const double pi = std::acos(-1.0);
    const std::size_t win = static_cast<std::size_t>(std::lround(0.016 * rate));
    const std::size_t hop = static_cast<std::size_t>(std::lround(0.008 * rate));
    const std::size_t nfft = 512;
    const int filters = 26;
    auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto inv_mel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    const double top = std::min(8000.0, rate / 2.0);

    oracle_mfcc out;
    for (std::size_t start = 0; start + win <= signal.size(); start += hop) {
        std::vector<double> xw(win);
        double energy = 0.0;
        for (std::size_t n = 0; n < win; ++n) {
            const double w = 0.54 - 0.46 * std::cos(2.0 * pi * static_cast<double>(n) / static_cast<double>(win - 1));
            xw[n] = signal[start + n] * w;
            energy += xw[n] * xw[n];
        }
        std::vector<double> mag(nfft / 2 + 1);
        for (std::size_t k = 0; k <= nfft / 2; ++k) {
            std::complex<double> acc{ 0.0, 0.0 };
            for (std::size_t n = 0; n < win; ++n) {
                acc += xw[n] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * n) / static_cast<double>(nfft));
            }
            mag[k] = std::abs(acc);
        }
        std::vector<double> logmel(filters);
        for (int m = 0; m < filters; ++m) {
            const double left = inv_mel(mel(top) * m / (filters + 1.0));
            const double centre = inv_mel(mel(top) * (m + 1) / (filters + 1.0));
            const double right = inv_mel(mel(top) * (m + 2) / (filters + 1.0));
            double e = 0.0;
            for (std::size_t k = 0; k <= nfft / 2; ++k) {
                const double f = static_cast<double>(k) * rate / static_cast<double>(nfft);
                double weight = 0.0;
                if (f > left && f <= centre) {
                    weight = (f - left) / (centre - left);
                } else if (f > centre && f < right) {
                    weight = (right - f) / (right - centre);
                }
                e += weight * mag[k];
            }
            logmel[m] = std::log(std::max(e, 1e-10));
        }
        std::vector<double> row(14);
        for (int c = 0; c < 13; ++c) {
            double s = 0.0;
            for (int m = 0; m < filters; ++m) {
                s += logmel[m] * std::cos(pi * c * (2.0 * m + 1.0) / (2.0 * filters));
            }
            row[c] = s * (c == 0 ? std::sqrt(1.0 / filters) : std::sqrt(2.0 / filters));
        }
        row[13] = std::log(std::max(energy, 1e-10));
        out.frames.push_back(row);
    }
    const auto d = oracle_deltas(out.frames);
    const auto dd = oracle_deltas(d);
    out.mean = oracle_mean(out.frames);
    out.delta_mean = oracle_mean(d);
    out.delta2_mean = oracle_mean(dd);
    return out;
}

}  // namespace speechbio::test
