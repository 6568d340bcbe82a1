// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_RNG_HPP
#define CSIAUG_RNG_HPP

#include <cmath>
#include <cstdint>

#include "csiaug/types.hpp"

namespace csiaug {

namespace detail {

// Stafford mix 13 finalizer (splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Counter-based random stream addressed by (root seed, derivation path).
///
/// The path is folded into a 64-bit key with a non-commutative hash chain, so
/// child(a).child(b) and child(b).child(a) are distinct streams and streams
/// with distinct paths draw independently. Draw i depends only on (key, i),
/// never on other streams, which makes per-sample parallel augmentation
/// reproducible at any thread count.
class RngStream {
  public:
    explicit RngStream(std::uint64_t root_seed)
        : key_(detail::mix64(root_seed + detail::kGolden)) {}

    /// Derived stream with the path extended by `index`.
    RngStream child(std::uint64_t index) const {
        RngStream c(*this);
        c.key_ = detail::mix64((key_ ^ detail::mix64(index + detail::kGolden)) + detail::kGolden);
        c.counter_ = 0;
        c.has_spare_ = false;
        return c;
    }

    std::uint64_t next_u64() {
        has_spare_ = false;  // any raw draw invalidates the Box-Muller cache
        return detail::mix64(key_ + (++counter_) * detail::kGolden);
    }

    /// Uniform on [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller; generated in pairs, the spare cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        double u1 =
            (static_cast<double>(detail::mix64(key_ + (++counter_) * detail::kGolden) >> 11) +
             1.0) *
            0x1.0p-53;
        double u2 =
            static_cast<double>(detail::mix64(key_ + (++counter_) * detail::kGolden) >> 11) *
            0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly symmetric complex Gaussian CN(0, variance).
    cplx next_cnormal(double variance) {
        double s = std::sqrt(variance * 0.5);
        double re = s * next_normal();
        double im = s * next_normal();
        return {re, im};
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace csiaug

#endif  // CSIAUG_RNG_HPP
