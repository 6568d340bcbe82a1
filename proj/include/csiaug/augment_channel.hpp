// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_AUGMENT_CHANNEL_HPP
#define CSIAUG_AUGMENT_CHANNEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csiaug/dataset.hpp"
#include "csiaug/dft.hpp"
#include "csiaug/rng.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

/// Truncation lag used when the caller does not pick one: M/8 keeps the
/// pair-count per lag large while comfortably covering indoor coherence
/// bandwidths at 80 MHz.
inline std::size_t default_delta_star(std::size_t m) {
    return std::max<std::size_t>(1, m / 8);
}

inline constexpr double kDefaultCellSpacing = 1.0;  // meters
inline constexpr double kDefaultSnrLosDb = 20.0;
inline constexpr double kDefaultSnrNlosDb = 15.0;

// ---------------------------------------------------------------------------
// Frequency autocorrelation and covariance factorization
// ---------------------------------------------------------------------------

/// Truncated frequency-domain autocorrelation; r[delta] = 0 past delta_star.
struct AcfEstimate {
    ComplexVec r;
    std::size_t delta_star = 0;

    double r0() const { return r.empty() ? 0.0 : r[0].real(); }
};

/// Single-snapshot lag average: r[d] = mean over i of H[i] * conj(H[i + d]).
inline AcfEstimate estimate_acf(std::span<const cplx> h, std::size_t delta_star) {
    const std::size_t m = h.size();
    if (m < 2) throw DataError("autocorrelation needs at least 2 subcarriers");
    if (delta_star < 1 || delta_star > m - 1)
        throw ConfigError("delta_star must lie in [1, M-1], got " +
                          std::to_string(delta_star));
    AcfEstimate acf;
    acf.delta_star = delta_star;
    acf.r.assign(m, cplx(0.0, 0.0));
    for (std::size_t d = 0; d <= delta_star; ++d) {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i + d < m; ++i) acc += h[i] * std::conj(h[i + d]);
        acf.r[d] = acc / static_cast<double>(m - d);
    }
    return acf;
}

/// Multi-snapshot variant: lag sums pooled over all vectors before averaging.
/// Improves the estimate when several measurements share fading statistics.
inline AcfEstimate estimate_acf_pooled(const std::vector<ComplexVec>& snapshots,
                                       std::size_t delta_star) {
    if (snapshots.empty()) throw DataError("pooled autocorrelation needs snapshots");
    const std::size_t m = snapshots.front().size();
    for (const ComplexVec& s : snapshots)
        if (s.size() != m) throw DataError("pooled snapshots must share a length");
    if (m < 2) throw DataError("autocorrelation needs at least 2 subcarriers");
    if (delta_star < 1 || delta_star > m - 1)
        throw ConfigError("delta_star must lie in [1, M-1], got " +
                          std::to_string(delta_star));
    AcfEstimate acf;
    acf.delta_star = delta_star;
    acf.r.assign(m, cplx(0.0, 0.0));
    for (std::size_t d = 0; d <= delta_star; ++d) {
        cplx acc(0.0, 0.0);
        std::size_t pairs = 0;
        for (const ComplexVec& s : snapshots) {
            for (std::size_t i = 0; i + d < m; ++i) acc += s[i] * std::conj(s[i + d]);
            pairs += m - d;
        }
        acf.r[d] = acc / static_cast<double>(pairs);
    }
    return acf;
}

/// Normalized Hermitian Toeplitz correlation matrix with its PSD square-root
/// factor. recon_error tracks how much the negative-eigenvalue clamp moved
/// the matrix.
struct CovarianceEstimate {
    Eigen::MatrixXcd sigma;
    Eigen::MatrixXcd c_factor;
    double recon_error = 0.0;
    double r0 = 0.0;
};

inline CovarianceEstimate build_covariance(const AcfEstimate& acf) {
    const std::size_t m = acf.r.size();
    if (!(acf.r0() > 0.0))
        throw DataError("autocorrelation has non-positive power r[0]");
    CovarianceEstimate cov;
    cov.r0 = acf.r0();
    cov.sigma.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t row = 0; row < m; ++row) {
        for (std::size_t col = 0; col <= row; ++col) {
            const cplx v = acf.r[row - col] / cov.r0;
            cov.sigma(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v;
            cov.sigma(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(row)) =
                std::conj(v);
        }
    }
    // The single-snapshot estimate need not be positive semidefinite; clamp
    // the spectrum at zero and keep the Frobenius error of that projection.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov.sigma);
    if (eig.info() != Eigen::Success)
        throw NumericError("eigendecomposition of the correlation matrix failed");
    Eigen::VectorXd lam = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::sqrt(std::max(lam[i], 0.0));
    cov.c_factor = eig.eigenvectors() * lam.asDiagonal() *
                   eig.eigenvectors().adjoint();
    const Eigen::MatrixXcd cc = cov.c_factor * cov.c_factor.adjoint();
    const double denom = cc.norm();
    cov.recon_error = denom > 0.0 ? (cov.sigma - cc).norm() / denom : 0.0;
    return cov;
}

// ---------------------------------------------------------------------------
// Correlation-based fading synthesis
// ---------------------------------------------------------------------------

namespace detail {

inline ComplexVec draw_correlated(const CovarianceEstimate& cov, RngStream& rng) {
    const auto m = static_cast<std::size_t>(cov.sigma.rows());
    Eigen::VectorXcd x(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        x[static_cast<Eigen::Index>(i)] = rng.next_cnormal(cov.r0);
    const Eigen::VectorXcd y = cov.c_factor * x;
    ComplexVec out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = y[static_cast<Eigen::Index>(i)];
    return out;
}

}  // namespace detail

/// Replace each antenna's response with a fresh draw matching its estimated
/// second-order frequency statistics.
inline CsiSample corr_augment(const CsiSample& in, std::size_t delta_star,
                              RngStream& rng) {
    CsiSample out = in;
    const CsiTensor& t = in.tensor;
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
            const CovarianceEstimate cov =
                build_covariance(estimate_acf(t.antenna(ap, rx), delta_star));
            const ComplexVec fresh = detail::draw_correlated(cov, rng);
            std::copy(fresh.begin(), fresh.end(), out.tensor.antenna(ap, rx).begin());
        }
    out.origin = Origin::Corr;
    return out;
}

/// Factor-once variant: estimates the covariance once per antenna and then
/// draws n_copies samples, copy c from rng.child(c). Output matches calling
/// corr_augment(in, delta_star, rng.child(c)) for each c, at a fraction of
/// the eigendecomposition cost.
inline std::vector<CsiSample> corr_augment_many(const CsiSample& in,
                                                std::size_t delta_star,
                                                std::size_t n_copies, RngStream rng) {
    const CsiTensor& t = in.tensor;
    std::vector<CovarianceEstimate> covs;
    covs.reserve(t.n_ap() * t.n_rx());
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx)
            covs.push_back(build_covariance(estimate_acf(t.antenna(ap, rx), delta_star)));
    std::vector<CsiSample> out;
    out.reserve(n_copies);
    for (std::size_t c = 0; c < n_copies; ++c) {
        RngStream s = rng.child(c);
        CsiSample copy = in;
        std::size_t unit = 0;
        for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
            for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
                const ComplexVec fresh = detail::draw_correlated(covs[unit++], s);
                std::copy(fresh.begin(), fresh.end(), copy.tensor.antenna(ap, rx).begin());
            }
        copy.origin = Origin::Corr;
        out.push_back(std::move(copy));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Power-delay-profile methods
// ---------------------------------------------------------------------------

namespace detail {

template <typename BinFn>
inline CsiSample remap_delay_bins(const CsiSample& in, Origin origin, BinFn&& fn) {
    CsiSample out = in;
    const CsiTensor& t = in.tensor;
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
            const std::span<const cplx> freq = t.antenna(ap, rx);
            ComplexVec h = dft_inverse(ComplexVec(freq.begin(), freq.end()));
            fn(h);
            const ComplexVec back = dft_forward(h);
            std::copy(back.begin(), back.end(), out.tensor.antenna(ap, rx).begin());
        }
    out.origin = origin;
    return out;
}

}  // namespace detail

/// Keep every delay-bin magnitude, randomize every delay-bin phase.
inline CsiSample pdp1(const CsiSample& in, RngStream& rng) {
    return detail::remap_delay_bins(in, Origin::Pdp1, [&rng](ComplexVec& h) {
        for (cplx& tap : h)
            tap = std::polar(std::abs(tap), rng.next_uniform(0.0, 2.0 * std::numbers::pi));
    });
}

/// Redraw every delay bin as a zero-mean complex Gaussian with the measured
/// bin power; the Rayleigh-fading reading of the profile.
inline CsiSample pdp2(const CsiSample& in, RngStream& rng) {
    return detail::remap_delay_bins(in, Origin::Pdp2, [&rng](ComplexVec& h) {
        for (cplx& tap : h) tap = rng.next_cnormal(std::norm(tap));
    });
}

/// Strongest bin keeps its magnitude under a fresh phase; all other bins are
/// redrawn as in pdp2. Ties on the strongest bin go to the lowest index.
inline CsiSample pdp4(const CsiSample& in, RngStream& rng) {
    return detail::remap_delay_bins(in, Origin::Pdp4, [&rng](ComplexVec& h) {
        std::size_t peak = 0;
        for (std::size_t i = 1; i < h.size(); ++i)
            if (std::abs(h[i]) > std::abs(h[peak])) peak = i;
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (i == peak)
                h[i] = std::polar(std::abs(h[i]),
                                  rng.next_uniform(0.0, 2.0 * std::numbers::pi));
            else
                h[i] = rng.next_cnormal(std::norm(h[i]));
        }
    });
}

// ---------------------------------------------------------------------------
// Cell-averaged profiles (pdp3)
// ---------------------------------------------------------------------------

/// Square cells over the label bounding box; every sample index appears in
/// exactly one cell, and centers sit at (i + 1/2) * spacing from the box
/// origin.
struct CellGrid {
    double spacing = kDefaultCellSpacing;
    double origin_x = 0.0;
    double origin_y = 0.0;

    struct Cell {
        Label2D center;
        std::vector<std::size_t> members;
    };
    std::map<std::pair<long, long>, Cell> cells;
};

inline CellGrid build_cell_grid(const Dataset& ds, double spacing) {
    if (ds.samples.empty()) throw DataError("cannot grid an empty dataset");
    if (!(spacing > 0.0)) throw ConfigError("cell spacing must be positive");
    CellGrid grid;
    grid.spacing = spacing;
    grid.origin_x = std::numeric_limits<double>::infinity();
    grid.origin_y = std::numeric_limits<double>::infinity();
    for (const CsiSample& s : ds.samples) {
        grid.origin_x = std::min(grid.origin_x, s.label.x);
        grid.origin_y = std::min(grid.origin_y, s.label.y);
    }
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const Label2D& l = ds.samples[i].label;
        const long cx = static_cast<long>(std::floor((l.x - grid.origin_x) / spacing));
        const long cy = static_cast<long>(std::floor((l.y - grid.origin_y) / spacing));
        CellGrid::Cell& cell = grid.cells[{cx, cy}];
        if (cell.members.empty()) {
            cell.center = {grid.origin_x + (static_cast<double>(cx) + 0.5) * spacing,
                           grid.origin_y + (static_cast<double>(cy) + 0.5) * spacing};
        }
        cell.members.push_back(i);
    }
    return grid;
}

/// Mean delay-bin power per cell: for each cell, a vector of n_ap*n_rx*M
/// powers (antenna-major) averaged over the cell's members.
inline std::map<std::pair<long, long>, std::vector<double>> cell_mean_bin_power(
    const Dataset& ds, const CellGrid& grid) {
    const std::size_t units = ds.meta.n_ap * ds.meta.n_rx;
    const std::size_t m = ds.meta.n_subcarriers;
    std::map<std::pair<long, long>, std::vector<double>> cell_power;
    for (const auto& [coord, cell] : grid.cells) {
        std::vector<double> power(units * m, 0.0);
        for (std::size_t idx : cell.members) {
            if (idx >= ds.samples.size())
                throw DataError("cell grid references sample out of range");
            const CsiTensor& t = ds.samples[idx].tensor;
            for (std::size_t u = 0; u < units; ++u) {
                const std::span<const cplx> freq =
                    t.antenna(u / ds.meta.n_rx, u % ds.meta.n_rx);
                const ComplexVec h = dft_inverse(ComplexVec(freq.begin(), freq.end()));
                for (std::size_t b = 0; b < m; ++b) power[u * m + b] += std::norm(h[b]);
            }
        }
        for (double& p : power) p /= static_cast<double>(cell.members.size());
        cell_power.emplace(coord, std::move(power));
    }
    return cell_power;
}

/// Grow a dataset with cell-averaged Rayleigh draws: per cell the bin powers
/// of all members are averaged, each member spawns `factor` copies drawn
/// CN(0, P_cell) per bin, and every copy is labeled with its cell center.
/// Output keeps the measured block first, then copies with the sample index
/// cycling fastest; copy c of member i draws from rng.child(i).child(c).
inline Dataset pdp3(const Dataset& ds, const CellGrid& grid, std::size_t factor,
                    RngStream& rng) {
    if (ds.samples.empty()) throw DataError("cannot augment an empty dataset");
    const std::size_t n = ds.samples.size();
    const std::size_t units = ds.meta.n_ap * ds.meta.n_rx;
    const std::size_t m = ds.meta.n_subcarriers;

    std::vector<const CellGrid::Cell*> owner(n, nullptr);
    for (const auto& [coord, cell] : grid.cells) {
        for (std::size_t idx : cell.members) {
            if (idx >= n) throw DataError("cell grid references sample out of range");
            if (owner[idx]) throw DataError("sample assigned to two cells");
            owner[idx] = &cell;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!owner[i]) throw DataError("sample " + std::to_string(i) + " missing from grid");

    const std::map<std::pair<long, long>, std::vector<double>> cell_power =
        cell_mean_bin_power(ds, grid);
    std::map<const CellGrid::Cell*, const std::vector<double>*> power_of;
    for (const auto& [coord, cell] : grid.cells) power_of[&cell] = &cell_power.at(coord);

    Dataset out;
    out.meta = ds.meta;
    out.meta.n_samples = n + n * factor;
    out.samples.reserve(out.meta.n_samples);
    out.samples = ds.samples;
    for (std::size_t e = 0; e < n * factor; ++e) {
        const std::size_t src = e % n;
        const std::size_t copy = e / n;
        RngStream s = rng.child(src).child(copy);
        const std::vector<double>& power = *power_of.at(owner[src]);
        CsiSample fresh;
        fresh.tensor = CsiTensor(ds.meta.n_ap, ds.meta.n_rx, m);
        fresh.label = owner[src]->center;
        fresh.origin = Origin::Pdp3;
        ComplexVec h(m);
        for (std::size_t u = 0; u < units; ++u) {
            for (std::size_t b = 0; b < m; ++b) h[b] = s.next_cnormal(power[u * m + b]);
            const ComplexVec freq = dft_forward(h);
            std::copy(freq.begin(), freq.end(),
                      fresh.tensor.antenna(u / ds.meta.n_rx, u % ds.meta.n_rx).begin());
        }
        out.samples.push_back(std::move(fresh));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Noise injection baseline
// ---------------------------------------------------------------------------

/// Add white noise sized to hit the target SNR per antenna. An infinite SNR
/// is the identity.
inline CsiSample noise_inject(const CsiSample& in, double target_snr_db,
                              RngStream& rng) {
    CsiSample out = in;
    out.origin = Origin::Noise;
    if (std::isinf(target_snr_db) && target_snr_db > 0.0) return out;
    const CsiTensor& t = in.tensor;
    double total_energy = 0.0;
    for (const cplx& h : t.flat()) total_energy += std::norm(h);
    if (!(total_energy > 0.0))
        throw DataError("cannot scale noise for a zero-energy sample");
    const double scale = std::pow(10.0, -target_snr_db / 10.0);
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
            const std::span<const cplx> freq = t.antenna(ap, rx);
            double mean_power = 0.0;
            for (const cplx& h : freq) mean_power += std::norm(h);
            mean_power /= static_cast<double>(freq.size());
            const double p = mean_power * scale;
            for (std::size_t m = 0; m < t.m(); ++m)
                out.tensor.at(ap, rx, m) += rng.next_cnormal(p);
        }
    return out;
}

}  // namespace csiaug

#endif  // CSIAUG_AUGMENT_CHANNEL_HPP
