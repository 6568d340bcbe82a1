// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_SYNTH_ENV_HPP
#define CSIAUG_SYNTH_ENV_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "csiaug/dataset.hpp"
#include "csiaug/rng.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Amplitudes use a near-field floor so a terminal sitting on top of a node
/// cannot produce an unbounded gain.
inline constexpr double kMinPathDistance = 0.1;  // meters

struct Point2D {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point2D& a, const Point2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Access point placement: position plus the boresight angle of its
/// half-wavelength uniform linear array, radians from the +x axis.
struct ApPlacement {
    Point2D position;
    double orientation = 0.0;
};

/// Full description of one synthetic room. An Environment is a pure function
/// of this struct: equal configs regenerate bit-identical environments.
struct EnvConfig {
    double room_width = 0.0;   // meters, x extent
    double room_depth = 0.0;   // meters, y extent
    std::size_t n_ap = 0;
    std::size_t n_rx = 0;      // antennas per AP
    std::vector<ApPlacement> ap_placements;
    std::size_t n_scatterers = 0;
    bool los_enabled = true;
    double carrier_hz = 0.0;
    double bandwidth_hz = 0.0;
    std::size_t n_subcarriers = 0;
    double noise_variance = 0.0;  // linear power per complex sample
    std::uint64_t seed = 0;
};

inline bool inside_room(const EnvConfig& cfg, const Point2D& p) {
    return p.x >= 0.0 && p.x <= cfg.room_width && p.y >= 0.0 && p.y <= cfg.room_depth;
}

/// Throws ConfigError naming every violated field at once, so a bad config
/// file round-trips into a single actionable message.
inline void validate(const EnvConfig& cfg) {
    std::vector<std::string> bad;
    if (!(cfg.room_width > 0.0)) bad.push_back("room_width");
    if (!(cfg.room_depth > 0.0)) bad.push_back("room_depth");
    if (cfg.n_ap < 1) bad.push_back("n_ap");
    if (cfg.ap_placements.size() != cfg.n_ap) bad.push_back("ap_placements");
    if (cfg.room_width > 0.0 && cfg.room_depth > 0.0) {
        for (std::size_t j = 0; j < cfg.ap_placements.size(); ++j) {
            if (!inside_room(cfg, cfg.ap_placements[j].position)) {
                bad.push_back("ap_placements[" + std::to_string(j) + "]");
            }
        }
    }
    if (cfg.n_rx < 1) bad.push_back("n_rx");
    if (cfg.n_subcarriers < 2) bad.push_back("n_subcarriers");
    if (!(cfg.bandwidth_hz > 0.0)) bad.push_back("bandwidth_hz");
    if (!(cfg.carrier_hz > 0.0)) bad.push_back("carrier_hz");
    if (cfg.noise_variance < 0.0) bad.push_back("noise_variance");
    if (!bad.empty()) {
        std::string msg = "invalid environment config, offending fields:";
        for (const std::string& f : bad) msg += " " + f;
        throw ConfigError(msg);
    }
}

/// Center frequency of 0-indexed subcarrier m on the centered grid
/// f_m = f_c - B/2 + (m + 1/2) * B / M.
inline double subcarrier_freq(const EnvConfig& cfg, std::size_t m) {
    return cfg.carrier_hz - cfg.bandwidth_hz / 2.0 +
           (static_cast<double>(m) + 0.5) * cfg.bandwidth_hz /
               static_cast<double>(cfg.n_subcarriers);
}

/// Point reflector with a complex gain drawn once per environment.
struct Scatterer {
    Point2D position;
    cplx reflectivity;  // |reflectivity| in [0.05, 0.5]
};

struct Environment {
    EnvConfig config;
    std::vector<Scatterer> scatterers;

    double wavelength() const { return kSpeedOfLight / config.carrier_hz; }
};

namespace detail {
// Child-stream indices under the environment seed. Fixed constants: changing
// them silently changes every generated dataset.
inline constexpr std::uint64_t kScattererStream = 1;
inline constexpr std::uint64_t kLayoutStream = 2;
inline constexpr std::uint64_t kChannelStream = 3;
}  // namespace detail

inline Environment build_environment(const EnvConfig& cfg) {
    validate(cfg);
    Environment env;
    env.config = cfg;
    env.scatterers.reserve(cfg.n_scatterers);
    RngStream root(cfg.seed);
    RngStream scat = root.child(detail::kScattererStream);
    for (std::size_t i = 0; i < cfg.n_scatterers; ++i) {
        RngStream s = scat.child(i);
        Scatterer sc;
        sc.position.x = s.next_uniform(0.0, cfg.room_width);
        sc.position.y = s.next_uniform(0.0, cfg.room_depth);
        const double mag = s.next_uniform(0.05, 0.5);
        const double phase = s.next_uniform(0.0, 2.0 * std::numbers::pi);
        sc.reflectivity = std::polar(mag, phase);
        env.scatterers.push_back(sc);
    }
    return env;
}

/// One propagation path as seen from a particular AP.
struct PropagationPath {
    double delay_s = 0.0;    // total time of flight
    double amplitude = 0.0;  // real magnitude, distance decay already applied
    double phase = 0.0;      // residual phase (reflection), radians
    double aoa = 0.0;        // azimuth of arrival at the AP, radians
};

/// Accumulate the path-sum frequency response of one AP block:
/// H[k][m] += amplitude * exp(j*(phase - 2*pi*f_m*delay - pi*k*sin(aoa - orientation))).
/// The carrier phase rides inside the absolute-frequency delay term.
inline void accumulate_paths(const std::vector<PropagationPath>& paths,
                             double orientation, const EnvConfig& cfg,
                             CsiTensor& out, std::size_t ap) {
    const std::size_t m_count = cfg.n_subcarriers;
    ComplexVec freq_term(m_count);
    for (const PropagationPath& p : paths) {
        for (std::size_t m = 0; m < m_count; ++m) {
            const double ang = p.phase -
                               2.0 * std::numbers::pi * subcarrier_freq(cfg, m) * p.delay_s;
            freq_term[m] = std::polar(p.amplitude, ang);
        }
        const double sin_off = std::sin(p.aoa - orientation);
        for (std::size_t k = 0; k < cfg.n_rx; ++k) {
            const cplx steer =
                std::polar(1.0, -std::numbers::pi * static_cast<double>(k) * sin_off);
            for (std::size_t m = 0; m < m_count; ++m)
                out.at(ap, k, m) += steer * freq_term[m];
        }
    }
}

/// All single-bounce paths (plus the direct path when enabled) from the UE to
/// AP j. Free-space amplitude lambda/(4*pi*d); one reflection multiplies in
/// the scatterer gain.
inline std::vector<PropagationPath> paths_to_ap(const Environment& env, std::size_t ap,
                                                const Point2D& ue) {
    const EnvConfig& cfg = env.config;
    const Point2D& app = cfg.ap_placements[ap].position;
    const double lambda = env.wavelength();
    std::vector<PropagationPath> paths;
    paths.reserve(env.scatterers.size() + 1);
    if (cfg.los_enabled) {
        const double d = distance(app, ue);
        PropagationPath p;
        p.delay_s = d / kSpeedOfLight;
        p.amplitude = lambda / (4.0 * std::numbers::pi * std::max(d, kMinPathDistance));
        p.phase = 0.0;
        p.aoa = std::atan2(ue.y - app.y, ue.x - app.x);
        paths.push_back(p);
    }
    for (const Scatterer& sc : env.scatterers) {
        const double d_total = distance(app, sc.position) + distance(sc.position, ue);
        PropagationPath p;
        p.delay_s = d_total / kSpeedOfLight;
        p.amplitude = std::abs(sc.reflectivity) * lambda /
                      (4.0 * std::numbers::pi * std::max(d_total, kMinPathDistance));
        p.phase = std::arg(sc.reflectivity);
        p.aoa = std::atan2(sc.position.y - app.y, sc.position.x - app.x);
        paths.push_back(p);
    }
    return paths;
}

/// Channel frequency response at one user position; the pilot is 1, so the
/// received signal equals the channel plus (optional) noise.
inline CsiSample sample_channel(const Environment& env, const Label2D& ue_pos,
                                bool noise_on, RngStream& rng) {
    const EnvConfig& cfg = env.config;
    const Point2D ue{ue_pos.x, ue_pos.y};
    if (!inside_room(cfg, ue))
        throw DataError("ue position (" + std::to_string(ue_pos.x) + ", " +
                        std::to_string(ue_pos.y) + ") outside room");
    CsiSample sample;
    sample.tensor = CsiTensor(cfg.n_ap, cfg.n_rx, cfg.n_subcarriers);
    sample.label = ue_pos;
    sample.origin = Origin::Measured;
    for (std::size_t ap = 0; ap < cfg.n_ap; ++ap) {
        accumulate_paths(paths_to_ap(env, ap, ue), cfg.ap_placements[ap].orientation,
                         cfg, sample.tensor, ap);
    }
    if (noise_on && cfg.noise_variance > 0.0) {
        for (cplx& h : sample.tensor.flat()) h += rng.next_cnormal(cfg.noise_variance);
    }
    return sample;
}

/// Square grid of cell centers with the given pitch: floor(extent/spacing)
/// cells per axis, points at (i + 1/2) * spacing. A 10 m side at 1 m pitch
/// yields 10 points per axis.
struct UniformGrid {
    double spacing = 1.0;
};

/// n positions drawn uniformly over the room.
struct UniformRandom {
    std::size_t n = 0;
};

using Layout = std::variant<UniformGrid, UniformRandom>;

inline std::vector<Label2D> layout_points(const EnvConfig& cfg, const Layout& layout,
                                          RngStream& rng) {
    std::vector<Label2D> pts;
    if (const UniformGrid* g = std::get_if<UniformGrid>(&layout)) {
        if (!(g->spacing > 0.0)) throw ConfigError("grid spacing must be positive");
        // Tiny slack absorbs decimal spacings whose quotient lands just
        // below an integer.
        const auto nx = static_cast<std::size_t>(
            std::floor(cfg.room_width / g->spacing + 1e-9));
        const auto ny = static_cast<std::size_t>(
            std::floor(cfg.room_depth / g->spacing + 1e-9));
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix)
                pts.push_back({(static_cast<double>(ix) + 0.5) * g->spacing,
                               (static_cast<double>(iy) + 0.5) * g->spacing});
    } else {
        const auto& r = std::get<UniformRandom>(layout);
        for (std::size_t i = 0; i < r.n; ++i) {
            RngStream s = rng.child(i);
            pts.push_back({s.next_uniform(0.0, cfg.room_width),
                           s.next_uniform(0.0, cfg.room_depth)});
        }
    }
    if (pts.empty()) throw ConfigError("layout yields no points inside the room");
    return pts;
}

/// Sample the channel at every layout point. Per-sample child streams keep
/// the result independent of evaluation order.
inline Dataset make_dataset(const Environment& env, const Layout& layout, bool noise_on,
                            RngStream& rng) {
    const EnvConfig& cfg = env.config;
    RngStream layout_rng = rng.child(detail::kLayoutStream);
    const std::vector<Label2D> pts = layout_points(cfg, layout, layout_rng);
    RngStream chan = rng.child(detail::kChannelStream);
    Dataset ds;
    ds.meta.n_subcarriers = cfg.n_subcarriers;
    ds.meta.n_ap = cfg.n_ap;
    ds.meta.n_rx = cfg.n_rx;
    ds.meta.n_samples = pts.size();
    ds.meta.bandwidth_hz = cfg.bandwidth_hz;
    ds.meta.carrier_hz = cfg.carrier_hz;
    ds.meta.created_from = "synthetic room sampler";
    ds.samples.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        RngStream s = chan.child(i);
        ds.samples.push_back(sample_channel(env, pts[i], noise_on, s));
    }
    return ds;
}

}  // namespace csiaug

#endif  // CSIAUG_SYNTH_ENV_HPP
