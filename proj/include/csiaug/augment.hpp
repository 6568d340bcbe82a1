// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_AUGMENT_HPP
#define CSIAUG_AUGMENT_HPP

/// Unified augmentation dispatch: one method enum covering the transceiver
/// and channel operators, dataset-level fan-out with a common stream
/// discipline, and selective augmentation of a chosen index subset.
///
/// Every dataset-level grow keeps the measured block first and appends
/// copies with the source index cycling fastest; copy c of source i always
/// draws from rng.child(i).child(c), so results are independent of the
/// order in which copies are produced.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "csiaug/augment_channel.hpp"
#include "csiaug/augment_transceiver.hpp"
#include "csiaug/dataset.hpp"
#include "csiaug/dft.hpp"
#include "csiaug/rng.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

enum class AugMethod : std::uint8_t {
    PhaseAp = 0,
    PhaseRx = 1,
    AmpAp = 2,
    AmpRx = 3,
    Corr = 4,
    Pdp1 = 5,
    Pdp2 = 6,
    Pdp3 = 7,
    Pdp4 = 8,
    Noise = 9,
};

inline constexpr AugMethod kAllAugMethods[] = {
    AugMethod::PhaseAp, AugMethod::PhaseRx, AugMethod::AmpAp,
    AugMethod::AmpRx,   AugMethod::Corr,    AugMethod::Pdp1,
    AugMethod::Pdp2,    AugMethod::Pdp3,    AugMethod::Pdp4,
    AugMethod::Noise,
};

inline const char* aug_method_name(AugMethod m) {
    switch (m) {
        case AugMethod::PhaseAp: return "phase-ap";
        case AugMethod::PhaseRx: return "phase-rx";
        case AugMethod::AmpAp: return "amp-ap";
        case AugMethod::AmpRx: return "amp-rx";
        case AugMethod::Corr: return "corr";
        case AugMethod::Pdp1: return "pdp1";
        case AugMethod::Pdp2: return "pdp2";
        case AugMethod::Pdp3: return "pdp3";
        case AugMethod::Pdp4: return "pdp4";
        case AugMethod::Noise: return "noise";
    }
    throw ConfigError("unknown augmentation method enum value");
}

inline AugMethod parse_aug_method(const std::string& name) {
    for (AugMethod m : kAllAugMethods)
        if (name == aug_method_name(m)) return m;
    throw ConfigError("unknown augmentation method '" + name +
                      "' (expected one of phase-ap, phase-rx, amp-ap, amp-rx, "
                      "corr, pdp1, pdp2, pdp3, pdp4, noise)");
}

inline Origin method_origin(AugMethod m) {
    switch (m) {
        case AugMethod::PhaseAp: return Origin::PhaseAp;
        case AugMethod::PhaseRx: return Origin::PhaseRx;
        case AugMethod::AmpAp: return Origin::AmpAp;
        case AugMethod::AmpRx: return Origin::AmpRx;
        case AugMethod::Corr: return Origin::Corr;
        case AugMethod::Pdp1: return Origin::Pdp1;
        case AugMethod::Pdp2: return Origin::Pdp2;
        case AugMethod::Pdp3: return Origin::Pdp3;
        case AugMethod::Pdp4: return Origin::Pdp4;
        case AugMethod::Noise: return Origin::Noise;
    }
    throw ConfigError("unknown augmentation method enum value");
}

/// Parameters for one augmentation pass. Fields irrelevant to the chosen
/// method are ignored; delta_star = 0 selects the per-dataset default lag
/// cap (M / 8).
struct AugSpec {
    AugMethod method = AugMethod::Pdp2;
    std::size_t factor = 1;
    double p_star_db = 1.0;
    std::size_t delta_star = 0;
    double cell_spacing = kDefaultCellSpacing;
    double snr_db = kDefaultSnrLosDb;

    void validate() const {
        std::string bad;
        auto flag = [&bad](const char* name) {
            if (!bad.empty()) bad += ", ";
            bad += name;
        };
        if (!(p_star_db >= 0.0) || !std::isfinite(p_star_db)) flag("p_star_db");
        if (!(cell_spacing > 0.0)) flag("cell_spacing");
        if (std::isnan(snr_db)) flag("snr_db");
        if (factor > kMaxAugmentFactor) flag("factor");
        if (!bad.empty()) throw ConfigError("invalid AugSpec field(s): " + bad);
    }

    static constexpr std::size_t kMaxAugmentFactor = 1u << 20;
};

namespace detail {

/// One augmented copy of a single sample. Pdp3 is dataset-level (its
/// profiles average over grid cells) and is dispatched separately.
inline CsiSample augment_one(const CsiSample& in, const AugSpec& spec,
                             std::size_t effective_delta, RngStream& rng) {
    switch (spec.method) {
        case AugMethod::PhaseAp: return phase_ap(in, rng);
        case AugMethod::PhaseRx: return phase_rx(in, rng);
        case AugMethod::AmpAp: return amp_ap(in, spec.p_star_db, rng);
        case AugMethod::AmpRx: return amp_rx(in, spec.p_star_db, rng);
        case AugMethod::Corr: return corr_augment(in, effective_delta, rng);
        case AugMethod::Pdp1: return pdp1(in, rng);
        case AugMethod::Pdp2: return pdp2(in, rng);
        case AugMethod::Pdp4: return pdp4(in, rng);
        case AugMethod::Noise: return noise_inject(in, spec.snr_db, rng);
        case AugMethod::Pdp3: break;
    }
    throw ConfigError("pdp3 requires dataset-level dispatch");
}

/// Draw one Rayleigh sample from a delay-bin power profile (antenna-major,
/// n_ap*n_rx*M entries), labeled with the given point.
inline CsiSample draw_profile_sample(const DatasetMeta& meta,
                                     const std::vector<double>& power,
                                     const Label2D& label, RngStream& rng) {
    const std::size_t units = meta.n_ap * meta.n_rx;
    const std::size_t m = meta.n_subcarriers;
    CsiSample fresh;
    fresh.tensor = CsiTensor(meta.n_ap, meta.n_rx, m);
    fresh.label = label;
    fresh.origin = Origin::Pdp3;
    ComplexVec h(m);
    for (std::size_t u = 0; u < units; ++u) {
        for (std::size_t b = 0; b < m; ++b)
            h[b] = rng.next_cnormal(power[u * m + b]);
        const ComplexVec freq = dft_forward(h);
        std::copy(freq.begin(), freq.end(),
                  fresh.tensor.antenna(u / meta.n_rx, u % meta.n_rx).begin());
    }
    return fresh;
}

inline std::size_t checked_grow(std::size_t n, std::size_t factor) {
    if (factor > AugSpec::kMaxAugmentFactor ||
        n > std::numeric_limits<std::size_t>::max() / (factor + 1))
        throw ConfigError("augmentation factor overflows the dataset size");
    return n + n * factor;
}

}  // namespace detail

/// Grow a dataset by `spec.factor` augmented copies per sample. The measured
/// block comes first; copy c of sample i sits at n + c*n + i and draws from
/// rng.child(i).child(c). factor = 0 returns the dataset unchanged.
inline Dataset augment_dataset(const Dataset& ds, const AugSpec& spec,
                               RngStream& rng) {
    spec.validate();
    if (ds.samples.empty()) throw DataError("cannot augment an empty dataset");
    const std::size_t n = ds.samples.size();
    const std::size_t total = detail::checked_grow(n, spec.factor);

    Dataset out;
    out.meta = ds.meta;
    out.meta.n_samples = total;
    if (spec.factor == 0) {
        out.samples = ds.samples;
        return out;
    }

    if (spec.method == AugMethod::Pdp3) {
        const CellGrid grid = build_cell_grid(ds, spec.cell_spacing);
        Dataset grown = pdp3(ds, grid, spec.factor, rng);
        grown.meta.created_from = ds.meta.created_from;
        return grown;
    }

    const std::size_t delta = spec.delta_star != 0
                                  ? spec.delta_star
                                  : default_delta_star(ds.meta.n_subcarriers);

    out.samples.reserve(total);
    out.samples = ds.samples;
    if (spec.method == AugMethod::Corr) {
        // Factorize each sample's covariance once, then interleave copies in
        // the common order. Streams match the generic path exactly.
        std::vector<std::vector<CsiSample>> copies(n);
        for (std::size_t i = 0; i < n; ++i) {
            RngStream s = rng.child(i);
            copies[i] = corr_augment_many(ds.samples[i], delta, spec.factor, s);
        }
        for (std::size_t e = 0; e < n * spec.factor; ++e)
            out.samples.push_back(std::move(copies[e % n][e / n]));
        return out;
    }

    for (std::size_t e = 0; e < n * spec.factor; ++e) {
        const std::size_t src = e % n;
        const std::size_t copy = e / n;
        RngStream s = rng.child(src).child(copy);
        out.samples.push_back(
            detail::augment_one(ds.samples[src], spec, delta, s));
    }
    return out;
}

/// Augment only the selected samples, each with factor round(1 / rho_hs),
/// so the number of generated samples is independent of the selection ratio.
/// Unselected samples pass through exactly once, unmodified. Copy c of the
/// sample at original index i draws from rng.child(i).child(c), keyed by the
/// original index so results do not depend on the selection's internal order.
inline Dataset augment_selected(const Dataset& ds,
                                const std::vector<std::size_t>& selected,
                                const AugSpec& spec, double rho_hs,
                                RngStream& rng) {
    spec.validate();
    if (ds.samples.empty()) throw DataError("cannot augment an empty dataset");
    if (!(rho_hs > 0.0 && rho_hs <= 1.0))
        throw ConfigError("rho_hs must be in (0, 1]");
    const std::size_t n = ds.samples.size();
    std::vector<bool> seen(n, false);
    for (std::size_t i : selected) {
        if (i >= n) throw DataError("selected index out of range");
        if (seen[i]) throw DataError("selected index repeated");
        seen[i] = true;
    }

    const auto factor = static_cast<std::size_t>(std::llround(1.0 / rho_hs));
    if (factor > AugSpec::kMaxAugmentFactor ||
        (!selected.empty() &&
         factor > (std::numeric_limits<std::size_t>::max() - n) / selected.size()))
        throw ConfigError("augmentation factor overflows the dataset size");
    const std::size_t added = selected.size() * factor;

    Dataset out;
    out.meta = ds.meta;
    out.meta.n_samples = n + added;
    out.samples.reserve(out.meta.n_samples);
    out.samples = ds.samples;
    if (selected.empty()) return out;

    if (spec.method == AugMethod::Pdp3) {
        const CellGrid grid = build_cell_grid(ds, spec.cell_spacing);
        const auto profiles = cell_mean_bin_power(ds, grid);
        // Owner cell per selected sample.
        std::vector<const CellGrid::Cell*> owner(n, nullptr);
        std::vector<const std::vector<double>*> power_of(n, nullptr);
        for (const auto& [coord, cell] : grid.cells)
            for (std::size_t idx : cell.members) {
                owner[idx] = &cell;
                power_of[idx] = &profiles.at(coord);
            }
        for (std::size_t e = 0; e < added; ++e) {
            const std::size_t slot = e % selected.size();
            const std::size_t copy = e / selected.size();
            const std::size_t src = selected[slot];
            RngStream s = rng.child(src).child(copy);
            out.samples.push_back(detail::draw_profile_sample(
                ds.meta, *power_of[src], owner[src]->center, s));
        }
        return out;
    }

    const std::size_t delta = spec.delta_star != 0
                                  ? spec.delta_star
                                  : default_delta_star(ds.meta.n_subcarriers);
    for (std::size_t e = 0; e < added; ++e) {
        const std::size_t slot = e % selected.size();
        const std::size_t copy = e / selected.size();
        const std::size_t src = selected[slot];
        RngStream s = rng.child(src).child(copy);
        out.samples.push_back(
            detail::augment_one(ds.samples[src], spec, delta, s));
    }
    return out;
}

}  // namespace csiaug

#endif  // CSIAUG_AUGMENT_HPP
