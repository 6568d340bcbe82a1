// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "csiaug/dataset_io.hpp"
#include "csiaug/synth_env.hpp"
#include "test_util.hpp"

using namespace csiaug;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* stem) {
    return fs::temp_directory_path() / (std::string("csiaug_test_") + stem);
}

Dataset tiny_dataset(std::size_t n, std::size_t n_ap = 2, std::size_t n_rx = 2,
                     std::size_t m = 5) {
    Dataset ds;
    ds.meta.n_subcarriers = m;
    ds.meta.n_ap = n_ap;
    ds.meta.n_rx = n_rx;
    ds.meta.n_samples = n;
    ds.meta.bandwidth_hz = 80e6;
    ds.meta.carrier_hz = 5e9;
    ds.meta.created_from = "unit test";
    RngStream rng(1234);
    for (std::size_t i = 0; i < n; ++i) {
        CsiSample s;
        s.tensor = CsiTensor(n_ap, n_rx, m);
        RngStream sr = rng.child(i);
        for (cplx& h : s.tensor.flat()) h = sr.next_cnormal(1.0);
        s.label = {sr.next_uniform(0.0, 10.0), sr.next_uniform(0.0, 10.0)};
        s.origin = static_cast<Origin>(i % 11);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

std::vector<unsigned char> read_all(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(static_cast<bool>(is));
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_all(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    REQUIRE(static_cast<bool>(os));
}

}  // namespace

TEST_CASE("save then load reproduces every field at single precision",
          "[dataset_io][roundtrip]") {
    const Dataset ds = tiny_dataset(100);
    const fs::path p = temp_file("roundtrip.csia");
    save(ds, p);
    const Dataset back = load(p);
    REQUIRE(back.samples.size() == 100);
    CHECK(back.meta.n_subcarriers == ds.meta.n_subcarriers);
    CHECK(back.meta.n_ap == ds.meta.n_ap);
    CHECK(back.meta.n_rx == ds.meta.n_rx);
    CHECK(back.meta.n_samples == 100);
    CHECK(back.meta.bandwidth_hz == ds.meta.bandwidth_hz);
    CHECK(back.meta.carrier_hz == ds.meta.carrier_hz);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(back.samples[i].label.x == ds.samples[i].label.x);
        CHECK(back.samples[i].label.y == ds.samples[i].label.y);
        CHECK(back.samples[i].origin == ds.samples[i].origin);
        const auto orig = ds.samples[i].tensor.flat();
        const auto got = back.samples[i].tensor.flat();
        for (std::size_t e = 0; e < orig.size(); ++e) {
            CHECK(got[e].real() == static_cast<double>(static_cast<float>(orig[e].real())));
            CHECK(got[e].imag() == static_cast<double>(static_cast<float>(orig[e].imag())));
        }
    }
    fs::remove(p);
}

TEST_CASE("save/load roundtrip is byte-stable", "[dataset_io][roundtrip]") {
    const Dataset ds = tiny_dataset(7);
    const fs::path p1 = temp_file("stable1.csia");
    const fs::path p2 = temp_file("stable2.csia");
    save(ds, p1);
    save(load(p1), p2);
    CHECK(read_all(p1) == read_all(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("wrong magic and wrong version are distinct errors", "[dataset_io][errors]") {
    const Dataset ds = tiny_dataset(3);
    const fs::path p = temp_file("corrupt.csia");
    save(ds, p);

    std::vector<unsigned char> bytes = read_all(p);
    bytes[0] = 'X';
    write_all(p, bytes);
    CHECK_THROWS_AS(load(p), MagicMismatch);

    bytes = read_all(p);
    bytes[0] = 'C';
    bytes[4] = 9;  // version field lives right after the 4-byte magic
    write_all(p, bytes);
    CHECK_THROWS_AS(load(p), VersionMismatch);

    fs::remove(p);
}

TEST_CASE("degenerate header dimensions are rejected", "[dataset_io][errors]") {
    const Dataset ds = tiny_dataset(2);
    const fs::path p = temp_file("degenerate.csia");
    save(ds, p);
    std::vector<unsigned char> bytes = read_all(p);
    // M is the u32 at offset 6; zero it out.
    for (int i = 0; i < 4; ++i) bytes[6 + i] = 0;
    write_all(p, bytes);
    CHECK_THROWS_AS(load(p), ShapeMismatch);
    fs::remove(p);
}

TEST_CASE("metadata/sample shape disagreement is rejected on save",
          "[dataset_io][errors]") {
    Dataset ds = tiny_dataset(3);
    ds.meta.n_samples = 5;
    CHECK_THROWS_AS(save(ds, temp_file("bad.csia")), DataError);
    ds.meta.n_samples = 3;
    ds.meta.n_rx = 7;
    CHECK_THROWS_AS(save(ds, temp_file("bad.csia")), DataError);
}

TEST_CASE("truncation at random offsets names the failing record",
          "[dataset_io][errors][fault-injection]") {
    const std::size_t n = 10;
    const Dataset ds = tiny_dataset(n);
    const fs::path p = temp_file("full.csia");
    const fs::path pt = temp_file("truncated.csia");
    save(ds, p);
    const std::vector<unsigned char> bytes = read_all(p);
    const std::size_t header_size = 4 + 2 + 4 + 2 + 2 + 8 + 8 + 8;
    const std::size_t record_size =
        8 + 8 + 1 + ds.meta.n_ap * ds.meta.n_rx * ds.meta.n_subcarriers * 2 * 4;
    REQUIRE(bytes.size() == header_size + n * record_size);

    RngStream rng(777);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t cut =
            header_size +
            static_cast<std::size_t>(rng.next_u64() % (bytes.size() - header_size));
        write_all(pt, {bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut)});
        const std::size_t expected_record = (cut - header_size) / record_size;
        try {
            load(pt);
            FAIL("expected TruncatedFile at cut " << cut);
        } catch (const TruncatedFile& e) {
            CHECK(e.record_index == expected_record);
            CHECK(std::string(e.what()).find(std::to_string(expected_record)) !=
                  std::string::npos);
        }
    }

    // Cut inside the fixed-size header.
    write_all(pt, {bytes.begin(), bytes.begin() + 20});
    try {
        load(pt);
        FAIL("expected TruncatedFile in header");
    } catch (const TruncatedFile& e) {
        CHECK(e.record_index == TruncatedFile::kHeaderRecord);
        CHECK(std::string(e.what()).find("header") != std::string::npos);
    }

    // Trailing garbage is also rejected.
    std::vector<unsigned char> extended = bytes;
    extended.push_back(0xAB);
    write_all(pt, extended);
    CHECK_THROWS_AS(load(pt), DataError);

    fs::remove(p);
    fs::remove(pt);
}

TEST_CASE("random split honors fraction sizes and determinism", "[dataset_io][split]") {
    const Dataset ds = tiny_dataset(100, 1, 1, 2);
    const SplitManifest a = split_random(ds, 0.8, 0.1, 0.1, 42);
    CHECK(a.train.size() == 80);
    CHECK(a.val.size() == 10);
    CHECK(a.test.size() == 10);
    a.validate(100);
    const SplitManifest b = split_random(ds, 0.8, 0.1, 0.1, 42);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
    const SplitManifest c = split_random(ds, 0.8, 0.1, 0.1, 43);
    CHECK(a.train != c.train);
}

TEST_CASE("random split rejects bad fractions and empty input", "[dataset_io][split]") {
    const Dataset ds = tiny_dataset(10, 1, 1, 2);
    CHECK_THROWS_AS(split_random(ds, 0.8, 0.2, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(split_random(ds, 0.8, 0.0, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(split_random(ds, -0.1, 0.5, 0.5, 1), ConfigError);
    Dataset empty;
    CHECK_THROWS_AS(split_random(empty, 0.8, 0.1, 0.1, 1), DataError);
}

TEST_CASE("train membership frequency is uniform across seeds", "[dataset_io][split][mc]") {
    const std::size_t n = 100;
    const Dataset ds = tiny_dataset(n, 1, 1, 2);
    std::vector<int> hits(n, 0);
    const int n_seeds = 1000;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const SplitManifest m =
            split_random(ds, 0.8, 0.1, 0.1, static_cast<std::uint64_t>(seed));
        for (std::size_t idx : m.train) ++hits[idx];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double freq = static_cast<double>(hits[i]) / n_seeds;
        CHECK(freq >= 0.76);
        CHECK(freq <= 0.84);
    }
}

TEST_CASE("spatial center split matches hand geometry", "[dataset_io][split]") {
    // Labels at x in {0, 5, 10}; center band [10/3, 20/3] keeps only x = 5.
    Dataset ds = tiny_dataset(3, 1, 1, 2);
    ds.samples[0].label = {0.0, 0.0};
    ds.samples[1].label = {5.0, 0.0};
    ds.samples[2].label = {10.0, 0.0};
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialCenter;
    cfg.val_fraction = 0.0;
    const SplitManifest m = split_spatial(ds, cfg);
    CHECK(m.axis == 'x');
    CHECK(m.train == std::vector<std::size_t>{1});
    CHECK(m.val.empty());
    CHECK(m.test == std::vector<std::size_t>({0, 2}));
    m.validate(3);
}

TEST_CASE("spatial side split matches hand geometry", "[dataset_io][split]") {
    Dataset ds = tiny_dataset(3, 1, 1, 2);
    ds.samples[0].label = {0.0, 0.0};
    ds.samples[1].label = {5.0, 0.0};
    ds.samples[2].label = {10.0, 0.0};
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialSide;
    cfg.val_fraction = 0.0;
    const SplitManifest m = split_spatial(ds, cfg);
    CHECK(m.train == std::vector<std::size_t>{0});
    CHECK(m.test == std::vector<std::size_t>({1, 2}));
}

TEST_CASE("spatial split runs along the longer axis", "[dataset_io][split]") {
    Dataset ds = tiny_dataset(3, 1, 1, 2);
    ds.samples[0].label = {1.0, 0.0};
    ds.samples[1].label = {1.0, 5.0};
    ds.samples[2].label = {1.0, 10.0};
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialCenter;
    cfg.val_fraction = 0.0;
    const SplitManifest m = split_spatial(ds, cfg);
    CHECK(m.axis == 'y');
    CHECK(m.train == std::vector<std::size_t>{1});
}

TEST_CASE("center band on a uniform grid captures about a third of samples",
          "[dataset_io][split]") {
    const Environment env = build_environment([] {
        EnvConfig cfg;
        cfg.room_width = 10.0;
        cfg.room_depth = 10.0;
        cfg.n_ap = 1;
        cfg.n_rx = 1;
        cfg.ap_placements = {{{1.0, 5.0}, 0.0}};
        cfg.carrier_hz = 5e9;
        cfg.bandwidth_hz = 80e6;
        cfg.n_subcarriers = 4;
        cfg.seed = 3;
        return cfg;
    }());
    RngStream rng(5);
    const Dataset ds = make_dataset(env, UniformGrid{1.0}, false, rng);
    REQUIRE(ds.samples.size() == 100);
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialCenter;
    cfg.val_fraction = 0.0;
    const SplitManifest m = split_spatial(ds, cfg);
    // One third of 100 plus or minus one 10-sample grid row.
    const double band_count = static_cast<double>(m.train.size() + m.val.size());
    CHECK(band_count >= 100.0 / 3.0 - 10.0);
    CHECK(band_count <= 100.0 / 3.0 + 10.0);
    CHECK(m.train.size() + m.val.size() + m.test.size() == 100);
}

TEST_CASE("nested validation indices stay inside the train band", "[dataset_io][split]") {
    Dataset ds = tiny_dataset(60, 1, 1, 2);
    for (std::size_t i = 0; i < 60; ++i)
        ds.samples[i].label = {static_cast<double>(i) / 6.0, 1.0};
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialCenter;
    cfg.val_fraction = 0.25;
    cfg.seed = 9;
    const SplitManifest m = split_spatial(ds, cfg);
    REQUIRE(!m.val.empty());
    for (std::size_t idx : m.val) {
        const double x = ds.samples[idx].label.x;
        CHECK(x >= m.band_lo);
        CHECK(x <= m.band_hi);
    }
    CHECK(m.train.size() + m.val.size() + m.test.size() == 60);
    m.validate(60);
}

TEST_CASE("degenerate label boxes and empty regions are rejected",
          "[dataset_io][split]") {
    Dataset ds = tiny_dataset(5, 1, 1, 2);
    for (auto& s : ds.samples) s.label = {2.0, 2.0};
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialCenter;
    CHECK_THROWS_AS(split_spatial(ds, cfg), DataError);

    // Both extremes inside the band leave the test region empty.
    Dataset ds2 = tiny_dataset(2, 1, 1, 2);
    ds2.samples[0].label = {4.9, 0.0};
    ds2.samples[1].label = {5.1, 0.0};
    SpatialSplitConfig side;
    side.kind = SplitScheme::SpatialSide;
    side.band_fraction = 0.5;
    // Side band [4.9, 5.0] holds only sample 0, so this one is fine.
    const SplitManifest ok = split_spatial(ds2, side);
    CHECK(ok.train.size() == 1);
    CHECK(ok.test.size() == 1);
}

TEST_CASE("origin tags survive a save/load roundtrip", "[dataset_io][roundtrip]") {
    Dataset ds = tiny_dataset(11, 1, 1, 2);
    for (std::size_t i = 0; i < 11; ++i) ds.samples[i].origin = static_cast<Origin>(i);
    const fs::path p = temp_file("origins.csia");
    save(ds, p);
    const Dataset back = load(p);
    for (std::size_t i = 0; i < 11; ++i)
        CHECK(back.samples[i].origin == static_cast<Origin>(i));
    fs::remove(p);
}

TEST_CASE("subset picks exactly the requested records", "[dataset_io]") {
    const Dataset ds = tiny_dataset(10, 1, 1, 3);
    const Dataset sub = subset(ds, {7, 2, 2});
    REQUIRE(sub.samples.size() == 3);
    CHECK(sub.meta.n_samples == 3);
    CHECK(sub.samples[0].label.x == ds.samples[7].label.x);
    CHECK(sub.samples[1].label.x == ds.samples[2].label.x);
    CHECK(sub.samples[2].label.x == ds.samples[2].label.x);
    CHECK_THROWS_AS(subset(ds, {10}), DataError);
}

TEST_CASE("manifest text files roundtrip for both scheme families",
          "[dataset_io][manifest]") {
    const Dataset ds = tiny_dataset(40, 1, 1, 2);
    const fs::path p = temp_file("manifest.txt");

    const SplitManifest r = split_random(ds, 0.7, 0.15, 0.15, 99);
    save_manifest(r, p);
    const SplitManifest r2 = load_manifest(p);
    CHECK(r2.scheme == SplitScheme::Random);
    CHECK(r2.train_frac == r.train_frac);
    CHECK(r2.val_frac == r.val_frac);
    CHECK(r2.test_frac == r.test_frac);
    CHECK(r2.seed == 99);
    CHECK(r2.train == r.train);
    CHECK(r2.val == r.val);
    CHECK(r2.test == r.test);

    Dataset spatial_ds = tiny_dataset(30, 1, 1, 2);
    for (std::size_t i = 0; i < 30; ++i)
        spatial_ds.samples[i].label = {static_cast<double>(i), 0.5};
    SpatialSplitConfig cfg;
    cfg.kind = SplitScheme::SpatialSide;
    cfg.val_fraction = 0.2;
    cfg.seed = 4;
    const SplitManifest s = split_spatial(spatial_ds, cfg);
    save_manifest(s, p);
    const SplitManifest s2 = load_manifest(p);
    CHECK(s2.scheme == SplitScheme::SpatialSide);
    CHECK(s2.axis == s.axis);
    CHECK(s2.band_lo == s.band_lo);
    CHECK(s2.band_hi == s.band_hi);
    CHECK(s2.band_fraction == s.band_fraction);
    CHECK(s2.val_fraction == s.val_fraction);
    CHECK(s2.train == s.train);
    CHECK(s2.val == s.val);
    CHECK(s2.test == s.test);

    fs::remove(p);
}

TEST_CASE("malformed manifests are rejected", "[dataset_io][manifest]") {
    const fs::path p = temp_file("badmanifest.txt");
    {
        std::ofstream os(p, std::ios::trunc);
        os << "not a manifest\n";
    }
    CHECK_THROWS_AS(load_manifest(p), DataError);
    {
        std::ofstream os(p, std::ios::trunc);
        os << "csiaug-split 1\nscheme random\nseed 1\ntrain 2 0 1\nval 1 2\n";
        // test line missing
    }
    CHECK_THROWS_AS(load_manifest(p), DataError);
    {
        std::ofstream os(p, std::ios::trunc);
        os << "csiaug-split 1\nscheme random\nseed 1\ntrain 5 0 1\nval 1 2\ntest 1 3\n";
        // count says 5 but only 2 indices follow
    }
    CHECK_THROWS_AS(load_manifest(p), DataError);
    fs::remove(p);
}

TEST_CASE("manifest validation catches overlap and range errors",
          "[dataset_io][manifest]") {
    SplitManifest m;
    m.train = {0, 1, 2};
    m.val = {2};
    m.test = {3};
    CHECK_THROWS_AS(m.validate(10), DataError);
    m.val = {4};
    m.validate(10);
    CHECK_THROWS_AS(m.validate(4), DataError);
}
