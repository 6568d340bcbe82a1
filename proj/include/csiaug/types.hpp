// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_TYPES_HPP
#define CSIAUG_TYPES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csiaug {

using cplx = std::complex<double>;

/// One frequency-domain channel vector (M subcarriers) or its delay-domain
/// counterpart after an inverse transform.
using ComplexVec = std::vector<cplx>;

// Error categories map onto CLI exit codes: config = 2, data = 3, numeric = 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

inline bool all_finite(const ComplexVec& v) {
    for (const cplx& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

/// 2-D position label in meters.
struct Label2D {
    double x = 0.0;
    double y = 0.0;
};

inline bool finite(const Label2D& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Provenance of a sample. Values double as the on-disk origin byte.
enum class Origin : std::uint8_t {
    Measured = 0,
    PhaseAp = 1,
    PhaseRx = 2,
    AmpAp = 3,
    AmpRx = 4,
    Corr = 5,
    Pdp1 = 6,
    Pdp2 = 7,
    Pdp3 = 8,
    Pdp4 = 9,
    Noise = 10,
};

inline const char* origin_name(Origin o) {
    switch (o) {
        case Origin::Measured: return "measured";
        case Origin::PhaseAp: return "phase-ap";
        case Origin::PhaseRx: return "phase-rx";
        case Origin::AmpAp: return "amp-ap";
        case Origin::AmpRx: return "amp-rx";
        case Origin::Corr: return "corr";
        case Origin::Pdp1: return "pdp1";
        case Origin::Pdp2: return "pdp2";
        case Origin::Pdp3: return "pdp3";
        case Origin::Pdp4: return "pdp4";
        case Origin::Noise: return "noise";
    }
    return "unknown";
}

/// Complex channel tensor for one measurement location: n_ap x n_rx antennas,
/// M subcarriers each. Stored flat, AP-major, antenna-next, subcarrier-last.
class CsiTensor {
  public:
    CsiTensor() = default;

    CsiTensor(std::size_t n_ap, std::size_t n_rx, std::size_t m)
        : n_ap_(n_ap), n_rx_(n_rx), m_(m), data_(n_ap * n_rx * m) {
        if (n_ap < 1 || n_rx < 1) throw DataError("CsiTensor: n_ap and n_rx must be >= 1");
        if (m < 2) throw DataError("CsiTensor: subcarrier count M must be >= 2");
    }

    std::size_t n_ap() const { return n_ap_; }
    std::size_t n_rx() const { return n_rx_; }
    std::size_t m() const { return m_; }
    std::size_t size() const { return data_.size(); }

    cplx& at(std::size_t ap, std::size_t rx, std::size_t sc) {
        return data_[(ap * n_rx_ + rx) * m_ + sc];
    }
    const cplx& at(std::size_t ap, std::size_t rx, std::size_t sc) const {
        return data_[(ap * n_rx_ + rx) * m_ + sc];
    }

    /// All M subcarriers of one (AP, antenna) pair.
    std::span<cplx> antenna(std::size_t ap, std::size_t rx) {
        return {data_.data() + (ap * n_rx_ + rx) * m_, m_};
    }
    std::span<const cplx> antenna(std::size_t ap, std::size_t rx) const {
        return {data_.data() + (ap * n_rx_ + rx) * m_, m_};
    }

    std::span<cplx> flat() { return data_; }
    std::span<const cplx> flat() const { return data_; }

  private:
    std::size_t n_ap_ = 0;
    std::size_t n_rx_ = 0;
    std::size_t m_ = 0;
    std::vector<cplx> data_;
};

/// The atom of all augmentation: a channel tensor with its position label and
/// provenance tag. The origin is fixed at construction.
struct CsiSample {
    CsiTensor tensor;
    Label2D label;
    Origin origin = Origin::Measured;
};

}  // namespace csiaug

#endif  // CSIAUG_TYPES_HPP
