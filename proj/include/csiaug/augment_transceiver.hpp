// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_AUGMENT_TRANSCEIVER_HPP
#define CSIAUG_AUGMENT_TRANSCEIVER_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "csiaug/dataset.hpp"
#include "csiaug/rng.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

/// Hardware-drift augmentation family: random phase or gain applied uniformly
/// across one AP block or one antenna, never per subcarrier.
enum class TransceiverMethod { PhaseAp, PhaseRx, AmpAp, AmpRx };

inline const char* transceiver_method_name(TransceiverMethod m) {
    switch (m) {
        case TransceiverMethod::PhaseAp: return "phase_ap";
        case TransceiverMethod::PhaseRx: return "phase_rx";
        case TransceiverMethod::AmpAp: return "amp_ap";
        case TransceiverMethod::AmpRx: return "amp_rx";
    }
    return "?";
}

struct TransceiverAugConfig {
    TransceiverMethod method = TransceiverMethod::PhaseAp;
    double p_star_db = 0.0;     // amplitude half-range, Amp methods only
    std::size_t factor = 1;     // augmented copies per measured sample

    void validate() const {
        if (p_star_db < 0.0) throw ConfigError("p_star must be >= 0 dB");
        if (factor < 1) throw ConfigError("augmentation factor must be >= 1");
    }
};

// Deterministic cores: the caller supplies one factor per randomized unit.
// The random front-ends below draw those factors; tests drive the cores
// directly with pinned values.

/// One phase per AP, multiplying every element of that AP block by exp(j*phi).
inline CsiSample apply_phase_ap(const CsiSample& in, std::span<const double> phases) {
    const CsiTensor& t = in.tensor;
    if (phases.size() != t.n_ap()) throw DataError("need one phase per AP");
    CsiSample out = in;
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap) {
        const cplx rot = std::polar(1.0, phases[ap]);
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx)
            for (std::size_t m = 0; m < t.m(); ++m) out.tensor.at(ap, rx, m) *= rot;
    }
    out.origin = Origin::PhaseAp;
    return out;
}

/// One phase per (AP, antenna) pair, AP-major order.
inline CsiSample apply_phase_rx(const CsiSample& in, std::span<const double> phases) {
    const CsiTensor& t = in.tensor;
    if (phases.size() != t.n_ap() * t.n_rx())
        throw DataError("need one phase per antenna");
    CsiSample out = in;
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
            const cplx rot = std::polar(1.0, phases[ap * t.n_rx() + rx]);
            for (std::size_t m = 0; m < t.m(); ++m) out.tensor.at(ap, rx, m) *= rot;
        }
    out.origin = Origin::PhaseRx;
    return out;
}

/// One gain per AP, given in dB and applied as the linear factor 10^(a/10).
inline CsiSample apply_amp_ap(const CsiSample& in, std::span<const double> gains_db) {
    const CsiTensor& t = in.tensor;
    if (gains_db.size() != t.n_ap()) throw DataError("need one gain per AP");
    CsiSample out = in;
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap) {
        const double g = std::pow(10.0, gains_db[ap] / 10.0);
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx)
            for (std::size_t m = 0; m < t.m(); ++m) out.tensor.at(ap, rx, m) *= g;
    }
    out.origin = Origin::AmpAp;
    return out;
}

/// One gain per (AP, antenna) pair, AP-major order, dB scale.
inline CsiSample apply_amp_rx(const CsiSample& in, std::span<const double> gains_db) {
    const CsiTensor& t = in.tensor;
    if (gains_db.size() != t.n_ap() * t.n_rx())
        throw DataError("need one gain per antenna");
    CsiSample out = in;
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
            const double g = std::pow(10.0, gains_db[ap * t.n_rx() + rx] / 10.0);
            for (std::size_t m = 0; m < t.m(); ++m) out.tensor.at(ap, rx, m) *= g;
        }
    out.origin = Origin::AmpRx;
    return out;
}

inline CsiSample phase_ap(const CsiSample& in, RngStream& rng) {
    std::vector<double> phases(in.tensor.n_ap());
    for (double& p : phases) p = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
    return apply_phase_ap(in, phases);
}

inline CsiSample phase_rx(const CsiSample& in, RngStream& rng) {
    std::vector<double> phases(in.tensor.n_ap() * in.tensor.n_rx());
    for (double& p : phases) p = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
    return apply_phase_rx(in, phases);
}

inline CsiSample amp_ap(const CsiSample& in, double p_star_db, RngStream& rng) {
    if (p_star_db < 0.0) throw ConfigError("p_star must be >= 0 dB");
    std::vector<double> gains(in.tensor.n_ap());
    for (double& g : gains) g = rng.next_uniform(-p_star_db, p_star_db);
    return apply_amp_ap(in, gains);
}

inline CsiSample amp_rx(const CsiSample& in, double p_star_db, RngStream& rng) {
    if (p_star_db < 0.0) throw ConfigError("p_star must be >= 0 dB");
    std::vector<double> gains(in.tensor.n_ap() * in.tensor.n_rx());
    for (double& g : gains) g = rng.next_uniform(-p_star_db, p_star_db);
    return apply_amp_rx(in, gains);
}

inline CsiSample augment_transceiver_one(const CsiSample& in,
                                         const TransceiverAugConfig& cfg,
                                         RngStream& rng) {
    switch (cfg.method) {
        case TransceiverMethod::PhaseAp: return phase_ap(in, rng);
        case TransceiverMethod::PhaseRx: return phase_rx(in, rng);
        case TransceiverMethod::AmpAp: return amp_ap(in, cfg.p_star_db, rng);
        case TransceiverMethod::AmpRx: return amp_rx(in, cfg.p_star_db, rng);
    }
    throw ConfigError("unknown transceiver method");
}

/// Grow a dataset to n_target samples: all measured samples first, then
/// augmented copies cycling over the measured samples (sample index varies
/// fastest). Copy c of sample i draws from rng.child(i).child(c), so the
/// output does not depend on generation order.
inline Dataset augment_to_size(const Dataset& ds, const TransceiverAugConfig& cfg,
                               std::size_t n_target, RngStream& rng) {
    cfg.validate();
    const std::size_t n = ds.samples.size();
    if (n == 0) throw DataError("cannot augment an empty dataset");
    if (n_target < n)
        throw DataError("target size " + std::to_string(n_target) +
                        " is smaller than the dataset (" + std::to_string(n) + ")");
    Dataset out;
    out.meta = ds.meta;
    out.meta.n_samples = n_target;
    out.samples.reserve(n_target);
    out.samples = ds.samples;
    for (std::size_t e = 0; e < n_target - n; ++e) {
        const std::size_t src = e % n;
        const std::size_t copy = e / n;
        RngStream s = rng.child(src).child(copy);
        out.samples.push_back(augment_transceiver_one(ds.samples[src], cfg, s));
    }
    return out;
}

}  // namespace csiaug

#endif  // CSIAUG_AUGMENT_TRANSCEIVER_HPP
