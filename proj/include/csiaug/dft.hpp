// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_DFT_HPP
#define CSIAUG_DFT_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "csiaug/types.hpp"

namespace csiaug {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT, sign = -1 forward / +1 inverse (unscaled).
inline void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein plan for one non-power-of-two length: chirp and the FFT of the
// chirp filter, both reused across transforms of that length.
struct BluesteinPlan {
    std::size_t m = 0;
    std::size_t l = 0;                // power-of-two convolution length >= 2m-1
    std::vector<cplx> chirp;          // c[n] = exp(-i*pi*n^2/m)
    std::vector<cplx> filter_fft;     // FFT_l of conj(chirp) extended circularly
};

inline const BluesteinPlan& bluestein_plan(std::size_t m) {
    thread_local std::map<std::size_t, BluesteinPlan> cache;
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;

    BluesteinPlan p;
    p.m = m;
    p.l = 1;
    while (p.l < 2 * m - 1) p.l <<= 1;
    p.chirp.resize(m);
    for (std::size_t n = 0; n < m; ++n) {
        // n^2 reduced mod 2m keeps the phase argument small and accurate.
        std::uint64_t q = (static_cast<std::uint64_t>(n) * n) % (2 * m);
        double ang = -M_PI * static_cast<double>(q) / static_cast<double>(m);
        p.chirp[n] = cplx(std::cos(ang), std::sin(ang));
    }
    std::vector<cplx> b(p.l, cplx(0.0, 0.0));
    b[0] = std::conj(p.chirp[0]);
    for (std::size_t n = 1; n < m; ++n) {
        b[n] = std::conj(p.chirp[n]);
        b[p.l - n] = std::conj(p.chirp[n]);
    }
    fft_pow2(b, -1);
    p.filter_fft = std::move(b);
    return cache.emplace(m, std::move(p)).first->second;
}

// Forward DFT of arbitrary length, unnormalized.
inline std::vector<cplx> dft_any(const std::vector<cplx>& x) {
    const std::size_t m = x.size();
    if (is_pow2(m)) {
        std::vector<cplx> a = x;
        fft_pow2(a, -1);
        return a;
    }
    const BluesteinPlan& p = bluestein_plan(m);
    std::vector<cplx> a(p.l, cplx(0.0, 0.0));
    for (std::size_t n = 0; n < m; ++n) a[n] = x[n] * p.chirp[n];
    fft_pow2(a, -1);
    for (std::size_t n = 0; n < p.l; ++n) a[n] *= p.filter_fft[n];
    fft_pow2(a, +1);
    const double inv_l = 1.0 / static_cast<double>(p.l);
    std::vector<cplx> out(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = a[k] * inv_l * p.chirp[k];
    return out;
}

}  // namespace detail

/// Forward DFT: H[m] = sum_n h[n] * exp(-j*2*pi*m*n/M). No normalization.
inline ComplexVec dft_forward(const ComplexVec& h) {
    if (h.size() < 2) throw DataError("dft_forward: invalid dimension, length must be >= 2");
    return detail::dft_any(h);
}

/// Inverse DFT: h[n] = (1/M) * sum_m H[m] * exp(+j*2*pi*m*n/M).
inline ComplexVec dft_inverse(const ComplexVec& H) {
    if (H.size() < 2) throw DataError("dft_inverse: invalid dimension, length must be >= 2");
    const std::size_t m = H.size();
    std::vector<cplx> tmp(m);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = std::conj(H[i]);
    tmp = detail::dft_any(tmp);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = std::conj(tmp[i]) * inv_m;
    return tmp;
}

}  // namespace csiaug

#endif  // CSIAUG_DFT_HPP
