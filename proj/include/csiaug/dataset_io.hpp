// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_DATASET_IO_HPP
#define CSIAUG_DATASET_IO_HPP

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "csiaug/dataset.hpp"
#include "csiaug/rng.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

// ---------------------------------------------------------------------------
// Binary dataset file
//
// Little-endian layout:
//   magic "CSIA" (4 bytes), version u16 = 1,
//   header { M: u32, n_ap: u16, n_rx: u16, n_samples: u64,
//            bandwidth_hz: f64, carrier_hz: f64 },
//   then per sample { label x: f64, y: f64, origin: u8,
//                     tensor: n_ap*n_rx*M*2 f32, AP-major, antenna-next,
//                     subcarrier-last, re before im }.
// ---------------------------------------------------------------------------

inline constexpr char kDatasetMagic[4] = {'C', 'S', 'I', 'A'};
inline constexpr std::uint16_t kDatasetVersion = 1;

struct MagicMismatch : DataError {
    using DataError::DataError;
};
struct VersionMismatch : DataError {
    using DataError::DataError;
};
struct ShapeMismatch : DataError {
    using DataError::DataError;
};
/// record_index is the 0-based record being read when the file ran out;
/// kHeaderRecord means the fixed-size header itself was incomplete.
struct TruncatedFile : DataError {
    static constexpr std::size_t kHeaderRecord = std::numeric_limits<std::size_t>::max();

    TruncatedFile(const std::string& msg, std::size_t record)
        : DataError(msg), record_index(record) {}

    std::size_t record_index;
};

namespace detail {

inline void append_bytes(std::vector<unsigned char>& buf, std::uint64_t v, int n_bytes) {
    for (int i = 0; i < n_bytes; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void append_f32(std::vector<unsigned char>& buf, float v) {
    append_bytes(buf, std::bit_cast<std::uint32_t>(v), 4);
}
inline void append_f64(std::vector<unsigned char>& buf, double v) {
    append_bytes(buf, std::bit_cast<std::uint64_t>(v), 8);
}

/// Read cursor over an in-memory file image; every read names the record it
/// serves so truncation errors can point at it.
struct Cursor {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos = 0;

    void require(std::size_t n, std::size_t record) const {
        if (pos + n > size) {
            std::string where = record == TruncatedFile::kHeaderRecord
                                    ? std::string("header")
                                    : "record " + std::to_string(record);
            throw TruncatedFile("file truncated while reading " + where, record);
        }
    }
    std::uint64_t take(int n_bytes, std::size_t record) {
        require(static_cast<std::size_t>(n_bytes), record);
        std::uint64_t v = 0;
        for (int i = 0; i < n_bytes; ++i)
            v |= static_cast<std::uint64_t>(data[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += static_cast<std::size_t>(n_bytes);
        return v;
    }
    float take_f32(std::size_t record) {
        return std::bit_cast<float>(static_cast<std::uint32_t>(take(4, record)));
    }
    double take_f64(std::size_t record) { return std::bit_cast<double>(take(8, record)); }
};

}  // namespace detail

inline void save(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    if (ds.meta.n_ap > 0xffff || ds.meta.n_rx > 0xffff ||
        ds.meta.n_subcarriers > 0xffffffffULL)
        throw ShapeMismatch("dataset dimensions exceed file format field widths");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    std::vector<unsigned char> buf;
    buf.reserve(64 + ds.samples.size() *
                         (17 + ds.meta.n_ap * ds.meta.n_rx * ds.meta.n_subcarriers * 8));
    for (char c : kDatasetMagic) buf.push_back(static_cast<unsigned char>(c));
    detail::append_bytes(buf, kDatasetVersion, 2);
    detail::append_bytes(buf, ds.meta.n_subcarriers, 4);
    detail::append_bytes(buf, ds.meta.n_ap, 2);
    detail::append_bytes(buf, ds.meta.n_rx, 2);
    detail::append_bytes(buf, ds.samples.size(), 8);
    detail::append_f64(buf, ds.meta.bandwidth_hz);
    detail::append_f64(buf, ds.meta.carrier_hz);
    for (const CsiSample& s : ds.samples) {
        detail::append_f64(buf, s.label.x);
        detail::append_f64(buf, s.label.y);
        buf.push_back(static_cast<unsigned char>(s.origin));
        for (const cplx& h : s.tensor.flat()) {
            detail::append_f32(buf, static_cast<float>(h.real()));
            detail::append_f32(buf, static_cast<float>(h.imag()));
        }
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
    if (!os) throw DataError("short write to " + path.string());
}

inline Dataset load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string() + " for reading");
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
    detail::Cursor cur{raw.data(), raw.size()};
    constexpr std::size_t kHeader = TruncatedFile::kHeaderRecord;
    cur.require(4, kHeader);
    for (char c : kDatasetMagic) {
        if (raw[cur.pos++] != static_cast<unsigned char>(c))
            throw MagicMismatch("not a CSI dataset file (bad magic): " + path.string());
    }
    const auto version = static_cast<std::uint16_t>(cur.take(2, kHeader));
    if (version != kDatasetVersion)
        throw VersionMismatch("unsupported dataset file version " + std::to_string(version));
    Dataset ds;
    ds.meta.n_subcarriers = cur.take(4, kHeader);
    ds.meta.n_ap = cur.take(2, kHeader);
    ds.meta.n_rx = cur.take(2, kHeader);
    const std::uint64_t n_samples = cur.take(8, kHeader);
    ds.meta.bandwidth_hz = cur.take_f64(kHeader);
    ds.meta.carrier_hz = cur.take_f64(kHeader);
    ds.meta.created_from = path.string();
    if (ds.meta.n_ap < 1 || ds.meta.n_rx < 1 || ds.meta.n_subcarriers < 2)
        throw ShapeMismatch("dataset header has degenerate tensor dimensions");
    ds.meta.n_samples = n_samples;
    ds.samples.reserve(n_samples);
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        CsiSample s;
        s.label.x = cur.take_f64(i);
        s.label.y = cur.take_f64(i);
        const auto origin = static_cast<std::uint8_t>(cur.take(1, i));
        if (origin > static_cast<std::uint8_t>(Origin::Noise))
            throw DataError("record " + std::to_string(i) + " has unknown origin tag " +
                            std::to_string(origin));
        s.origin = static_cast<Origin>(origin);
        s.tensor = CsiTensor(ds.meta.n_ap, ds.meta.n_rx, ds.meta.n_subcarriers);
        for (cplx& h : s.tensor.flat()) {
            const double re = cur.take_f32(i);
            const double im = cur.take_f32(i);
            h = cplx(re, im);
        }
        ds.samples.push_back(std::move(s));
    }
    if (cur.pos != cur.size)
        throw DataError("trailing bytes after last record in " + path.string());
    return ds;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

enum class SplitScheme { Random, SpatialCenter, SpatialSide };

inline const char* split_scheme_name(SplitScheme s) {
    switch (s) {
        case SplitScheme::Random: return "random";
        case SplitScheme::SpatialCenter: return "spatial_center";
        case SplitScheme::SpatialSide: return "spatial_side";
    }
    return "?";
}

/// Index sets are pairwise disjoint; train and test never overlap by
/// construction, and validate() re-checks it on every manifest.
struct SplitManifest {
    SplitScheme scheme = SplitScheme::Random;
    double train_frac = 0.0, val_frac = 0.0, test_frac = 0.0;  // Random
    char axis = 'x';                                           // Spatial*
    double band_lo = 0.0, band_hi = 0.0;                       // Spatial*
    double band_fraction = 0.0, val_fraction = 0.0;            // Spatial*
    std::uint64_t seed = 0;
    std::vector<std::size_t> train, val, test;

    void validate(std::size_t n_samples) const {
        std::vector<std::size_t> all;
        all.reserve(train.size() + val.size() + test.size());
        for (const auto* part : {&train, &val, &test})
            all.insert(all.end(), part->begin(), part->end());
        for (std::size_t idx : all)
            if (idx >= n_samples)
                throw DataError("split index " + std::to_string(idx) +
                                " out of range for dataset of " +
                                std::to_string(n_samples));
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end())
            throw DataError("split index sets are not pairwise disjoint");
    }
};

namespace detail {

/// Fisher-Yates with our own stream; std::shuffle consumes the generator in
/// an implementation-defined way and would not reproduce across toolchains.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace detail

inline SplitManifest split_random(const Dataset& ds, double train_frac, double val_frac,
                                  double test_frac, std::uint64_t seed) {
    if (ds.samples.empty()) throw DataError("cannot split an empty dataset");
    if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(test_frac > 0.0))
        throw ConfigError("split fractions must be positive");
    if (train_frac + val_frac + test_frac > 1.0 + 1e-12)
        throw ConfigError("split fractions must sum to at most 1");
    const std::size_t n = ds.samples.size();
    const std::vector<std::size_t> order =
        detail::shuffled_indices(n, RngStream(seed));
    const auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(test_frac * static_cast<double>(n)));
    SplitManifest m;
    m.scheme = SplitScheme::Random;
    m.train_frac = train_frac;
    m.val_frac = val_frac;
    m.test_frac = test_frac;
    m.seed = seed;
    m.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    m.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    m.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val + n_test));
    m.validate(n);
    return m;
}

struct SpatialSplitConfig {
    SplitScheme kind = SplitScheme::SpatialCenter;
    double band_fraction = 1.0 / 3.0;
    double val_fraction = 0.1;  // nested random split carved out of the train band
    std::uint64_t seed = 0;
};

inline SplitManifest split_spatial(const Dataset& ds, const SpatialSplitConfig& cfg) {
    if (ds.samples.empty()) throw DataError("cannot split an empty dataset");
    if (cfg.kind == SplitScheme::Random)
        throw ConfigError("split_spatial requires a spatial scheme");
    if (!(cfg.band_fraction > 0.0) || cfg.band_fraction >= 1.0)
        throw ConfigError("band fraction must lie in (0, 1)");
    if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
        throw ConfigError("validation fraction must lie in [0, 1)");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const CsiSample& s : ds.samples) {
        xmin = std::min(xmin, s.label.x);
        xmax = std::max(xmax, s.label.x);
        ymin = std::min(ymin, s.label.y);
        ymax = std::max(ymax, s.label.y);
    }
    if (xmax - xmin <= 0.0 && ymax - ymin <= 0.0)
        throw DataError("labels span a degenerate bounding box");
    // Band runs along the longer side of the label bounding box (x on ties).
    const bool along_x = (xmax - xmin) >= (ymax - ymin);
    const double lo = along_x ? xmin : ymin;
    const double len = along_x ? xmax - xmin : ymax - ymin;
    SplitManifest m;
    m.scheme = cfg.kind;
    m.axis = along_x ? 'x' : 'y';
    m.band_fraction = cfg.band_fraction;
    m.val_fraction = cfg.val_fraction;
    m.seed = cfg.seed;
    if (cfg.kind == SplitScheme::SpatialCenter) {
        m.band_lo = lo + (1.0 - cfg.band_fraction) / 2.0 * len;
        m.band_hi = lo + (1.0 + cfg.band_fraction) / 2.0 * len;
    } else {
        m.band_lo = lo;
        m.band_hi = lo + cfg.band_fraction * len;
    }
    std::vector<std::size_t> band;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const double c = along_x ? ds.samples[i].label.x : ds.samples[i].label.y;
        if (c >= m.band_lo && c <= m.band_hi)
            band.push_back(i);
        else
            m.test.push_back(i);
    }
    if (band.empty()) throw DataError("spatial train band contains no samples");
    if (m.test.empty()) throw DataError("spatial test region contains no samples");
    const auto n_val =
        static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(band.size())));
    const std::vector<std::size_t> order =
        detail::shuffled_indices(band.size(), RngStream(cfg.seed));
    for (std::size_t r = 0; r < band.size(); ++r) {
        (r < n_val ? m.val : m.train).push_back(band[order[r]]);
    }
    std::sort(m.train.begin(), m.train.end());
    std::sort(m.val.begin(), m.val.end());
    m.validate(ds.samples.size());
    return m;
}

/// Materialize the subset of a dataset selected by an index list.
inline Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.meta = ds.meta;
    out.meta.n_samples = indices.size();
    out.samples.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= ds.samples.size())
            throw DataError("subset index " + std::to_string(idx) + " out of range");
        out.samples.push_back(ds.samples[idx]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manifest text format
//
//   csiaug-split 1
//   scheme random|spatial_center|spatial_side
//   fractions <train> <val> <test>     (random only)
//   axis x|y                           (spatial only)
//   band <lo> <hi>                     (spatial only)
//   band_fraction <f>                  (spatial only)
//   val_fraction <f>                   (spatial only)
//   seed <u64>
//   train <count> <idx> ...
//   val <count> <idx> ...
//   test <count> <idx> ...
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_full(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_index_line(std::ostream& os, const char* name,
                             const std::vector<std::size_t>& idx) {
    os << name << ' ' << idx.size();
    for (std::size_t i : idx) os << ' ' << i;
    os << '\n';
}

}  // namespace detail

inline void save_manifest(const SplitManifest& m, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    os << "csiaug-split 1\n";
    os << "scheme " << split_scheme_name(m.scheme) << '\n';
    if (m.scheme == SplitScheme::Random) {
        os << "fractions " << detail::fmt_full(m.train_frac) << ' '
           << detail::fmt_full(m.val_frac) << ' ' << detail::fmt_full(m.test_frac) << '\n';
    } else {
        os << "axis " << m.axis << '\n';
        os << "band " << detail::fmt_full(m.band_lo) << ' ' << detail::fmt_full(m.band_hi)
           << '\n';
        os << "band_fraction " << detail::fmt_full(m.band_fraction) << '\n';
        os << "val_fraction " << detail::fmt_full(m.val_fraction) << '\n';
    }
    os << "seed " << m.seed << '\n';
    detail::write_index_line(os, "train", m.train);
    detail::write_index_line(os, "val", m.val);
    detail::write_index_line(os, "test", m.test);
    if (!os) throw DataError("short write to " + path.string());
}

inline SplitManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path.string() + " for reading");
    std::string line;
    if (!std::getline(is, line) || line != "csiaug-split 1")
        throw DataError("not a split manifest (bad signature line): " + path.string());
    SplitManifest m;
    bool seen_train = false, seen_val = false, seen_test = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        auto need = [&](bool ok) {
            if (!ok) throw DataError("malformed manifest line: " + line);
        };
        if (key == "scheme") {
            std::string v;
            need(static_cast<bool>(ls >> v));
            if (v == "random")
                m.scheme = SplitScheme::Random;
            else if (v == "spatial_center")
                m.scheme = SplitScheme::SpatialCenter;
            else if (v == "spatial_side")
                m.scheme = SplitScheme::SpatialSide;
            else
                throw DataError("unknown split scheme: " + v);
        } else if (key == "fractions") {
            need(static_cast<bool>(ls >> m.train_frac >> m.val_frac >> m.test_frac));
        } else if (key == "axis") {
            need(static_cast<bool>(ls >> m.axis));
        } else if (key == "band") {
            need(static_cast<bool>(ls >> m.band_lo >> m.band_hi));
        } else if (key == "band_fraction") {
            need(static_cast<bool>(ls >> m.band_fraction));
        } else if (key == "val_fraction") {
            need(static_cast<bool>(ls >> m.val_fraction));
        } else if (key == "seed") {
            need(static_cast<bool>(ls >> m.seed));
        } else if (key == "train" || key == "val" || key == "test") {
            std::size_t count = 0;
            need(static_cast<bool>(ls >> count));
            std::vector<std::size_t>& dst =
                key == "train" ? m.train : (key == "val" ? m.val : m.test);
            dst.resize(count);
            for (std::size_t i = 0; i < count; ++i) need(static_cast<bool>(ls >> dst[i]));
            (key == "train" ? seen_train : (key == "val" ? seen_val : seen_test)) = true;
        } else {
            throw DataError("unknown manifest key: " + key);
        }
    }
    if (!seen_train || !seen_val || !seen_test)
        throw DataError("manifest missing one of train/val/test lines: " + path.string());
    return m;
}

}  // namespace csiaug

#endif  // CSIAUG_DATASET_IO_HPP
