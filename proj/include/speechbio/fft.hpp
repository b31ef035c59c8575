#pragma once

#include "speechbio/common.hpp"

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace speechbio {

/// In-place iterative radix-2 FFT. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>> &a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        throw error{ "fft: size must be a power of two" };
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    constexpr double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                // twiddles computed directly rather than by recurrence to keep rounding error flat
                const std::complex<double> w{ std::cos(ang * static_cast<double>(k)), std::sin(ang * static_cast<double>(k)) };
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

/// |X[k]| for k = 0..n/2 of a real signal zero-padded to n.
inline std::vector<double> magnitude_spectrum(std::span<const double> x, std::size_t n) {
    if (x.size() > n) {
        throw error{ "magnitude_spectrum: input longer than FFT size" };
    }
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < x.size(); ++i) {
        buf[i] = x[i];
    }
    fft_inplace(buf);
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t k = 0; k < mag.size(); ++k) {
        mag[k] = std::abs(buf[k]);
    }
    return mag;
}

}  // namespace speechbio
