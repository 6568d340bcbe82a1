// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_CONFIG_HPP
#define CSIAUG_CONFIG_HPP

/// Structured-text configuration: room/environment files and experiment
/// specs, both in a line-oriented key = value format with '#' comments.
/// Parsers reject unknown keys and name the offending line, so a typo never
/// silently falls back to a default.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "csiaug/augment.hpp"
#include "csiaug/dataset_io.hpp"
#include "csiaug/learner.hpp"
#include "csiaug/synth_env.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

inline double parse_double(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
    return x;
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    std::uint64_t x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse integer '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

/// key = value lines in file order (keys may repeat). Blank lines and '#'
/// comments are skipped; a line without '=' is an error naming its number.
/// skip_lines ignores that many leading lines (format headers).
inline std::vector<std::pair<std::string, std::string>> parse_kv_file(
    const std::filesystem::path& path, std::size_t skip_lines = 0) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno <= skip_lines) continue;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        if (kv.back().first.empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": empty key");
    }
    return kv;
}

/// Resolve a possibly relative path against the directory of a referencing
/// file, so specs can name their companions portably.
inline std::filesystem::path resolve_relative(
    const std::filesystem::path& base_file, const std::string& ref) {
    const std::filesystem::path p(ref);
    if (p.is_absolute()) return p;
    return base_file.parent_path() / p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Environment configs
// ---------------------------------------------------------------------------

/// Evenly space APs along the room perimeter, boresight toward the room
/// center. AP j sits at arc position (j + 1/2) / n of the perimeter, walked
/// counterclockwise from the origin corner.
inline std::vector<ApPlacement> auto_place_aps(std::size_t n_ap, double width,
                                               double depth) {
    if (n_ap < 1 || !(width > 0.0) || !(depth > 0.0))
        throw ConfigError("auto AP placement needs n_ap >= 1 and a positive room");
    const double total = 2.0 * (width + depth);
    std::vector<ApPlacement> placements;
    placements.reserve(n_ap);
    for (std::size_t j = 0; j < n_ap; ++j) {
        double s = (static_cast<double>(j) + 0.5) * total /
                   static_cast<double>(n_ap);
        Point2D p;
        if (s < width) {
            p = {s, 0.0};
        } else if (s < width + depth) {
            p = {width, s - width};
        } else if (s < 2.0 * width + depth) {
            p = {width - (s - width - depth), depth};
        } else {
            p = {0.0, depth - (s - 2.0 * width - depth)};
        }
        ApPlacement ap;
        ap.position = p;
        ap.orientation = std::atan2(depth / 2.0 - p.y, width / 2.0 - p.x);
        placements.push_back(ap);
    }
    return placements;
}

/// Parse a room description. Recognized keys: room_width, room_depth, n_ap,
/// n_rx, n_scatterers, los_enabled, carrier_hz, bandwidth_hz, n_subcarriers,
/// noise_variance, seed, and repeated `ap = x y orientation` lines. Omitting
/// every `ap` line auto-places n_ap arrays around the perimeter.
inline EnvConfig load_env_config(const std::filesystem::path& path) {
    EnvConfig cfg;
    bool explicit_aps = false;
    for (const auto& [key, value] : detail::parse_kv_file(path)) {
        if (key == "room_width") cfg.room_width = detail::parse_double(value, key);
        else if (key == "room_depth") cfg.room_depth = detail::parse_double(value, key);
        else if (key == "n_ap") cfg.n_ap = detail::parse_u64(value, key);
        else if (key == "n_rx") cfg.n_rx = detail::parse_u64(value, key);
        else if (key == "n_scatterers") cfg.n_scatterers = detail::parse_u64(value, key);
        else if (key == "los_enabled") cfg.los_enabled = detail::parse_bool(value, key);
        else if (key == "carrier_hz") cfg.carrier_hz = detail::parse_double(value, key);
        else if (key == "bandwidth_hz") cfg.bandwidth_hz = detail::parse_double(value, key);
        else if (key == "n_subcarriers") cfg.n_subcarriers = detail::parse_u64(value, key);
        else if (key == "noise_variance") cfg.noise_variance = detail::parse_double(value, key);
        else if (key == "seed") cfg.seed = detail::parse_u64(value, key);
        else if (key == "ap") {
            std::istringstream is(value);
            ApPlacement ap;
            if (!(is >> ap.position.x >> ap.position.y >> ap.orientation))
                throw ConfigError("key 'ap': expected 'x y orientation', got '" +
                                  value + "'");
            std::string rest;
            if (is >> rest)
                throw ConfigError("key 'ap': trailing characters in '" + value + "'");
            cfg.ap_placements.push_back(ap);
            explicit_aps = true;
        } else {
            throw ConfigError(path.string() + ": unknown key '" + key + "'");
        }
    }
    if (!explicit_aps && cfg.n_ap >= 1 && cfg.room_width > 0.0 &&
        cfg.room_depth > 0.0)
        cfg.ap_placements = auto_place_aps(cfg.n_ap, cfg.room_width, cfg.room_depth);
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// Experiment specs
// ---------------------------------------------------------------------------

/// Multi-trial experiment description: dataset source, split, subsample
/// size, method/factor grid, learner settings, and output directory.
struct ExperimentSpec {
    // Dataset source: exactly one of env_config_path (synthesize n_points)
    // or dataset_path (load a CSIA file).
    std::filesystem::path env_config_path;
    std::filesystem::path dataset_path;
    std::size_t n_points = 0;

    SplitScheme split_scheme = SplitScheme::Random;
    double train_frac = 0.6;
    double val_frac = 0.2;
    double test_frac = 0.2;
    double band_fraction = 1.0 / 3.0;
    double val_fraction = 0.1;
    std::uint64_t split_seed = 1;

    std::size_t original_size = 0;
    std::vector<AugMethod> methods;
    std::vector<std::size_t> factors;
    std::size_t trials = 5;

    MlpConfig mlp;        // input_dim 0: derived from the dataset shape
    TrainConfig train_cfg;
    AugSpec aug;          // method field ignored; shared knobs for all methods

    std::uint64_t seed = 0;
    std::filesystem::path out_dir;

    void validate() const {
        std::vector<std::string> bad;
        const bool has_env = !env_config_path.empty();
        const bool has_file = !dataset_path.empty();
        if (has_env == has_file) bad.push_back("env/dataset (exactly one source)");
        if (has_env && n_points == 0) bad.push_back("n_points");
        if (original_size == 0) bad.push_back("original_size");
        if (methods.empty()) bad.push_back("methods");
        if (factors.empty() ||
            std::find(factors.begin(), factors.end(), 0u) == factors.end())
            bad.push_back("factors (must include 0)");
        for (std::size_t i = 0; i < factors.size(); ++i)
            for (std::size_t j = i + 1; j < factors.size(); ++j)
                if (factors[i] == factors[j]) {
                    bad.push_back("factors (duplicate entries)");
                    i = factors.size();
                    break;
                }
        if (trials < 1) bad.push_back("trials");
        if (out_dir.empty()) bad.push_back("out_dir");
        if (!bad.empty()) {
            std::string msg = "invalid experiment spec, offending fields:";
            for (const std::string& f : bad) msg += " " + f;
            throw ConfigError(msg);
        }
        train_cfg.validate();
        aug.validate();
    }
};

namespace detail {

inline void parse_split_value(const std::string& value, ExperimentSpec& spec) {
    const std::vector<std::string> parts = split_list(value, ' ');
    if (parts.empty()) throw ConfigError("key 'split': empty value");
    if (parts[0] == "random") {
        spec.split_scheme = SplitScheme::Random;
        if (parts.size() != 1 && parts.size() != 4)
            throw ConfigError("key 'split': random takes 0 or 3 fractions");
        if (parts.size() == 4) {
            spec.train_frac = parse_double(parts[1], "split");
            spec.val_frac = parse_double(parts[2], "split");
            spec.test_frac = parse_double(parts[3], "split");
        }
    } else if (parts[0] == "spatial-center" || parts[0] == "spatial-side") {
        spec.split_scheme = parts[0] == "spatial-center"
                                ? SplitScheme::SpatialCenter
                                : SplitScheme::SpatialSide;
        if (parts.size() != 1 && parts.size() != 3)
            throw ConfigError("key 'split': spatial schemes take 0 or 2 numbers "
                              "(band_fraction val_fraction)");
        if (parts.size() == 3) {
            spec.band_fraction = parse_double(parts[1], "split");
            spec.val_fraction = parse_double(parts[2], "split");
        }
    } else {
        throw ConfigError("key 'split': unknown scheme '" + parts[0] + "'");
    }
}

inline bool parse_learner_kv(const std::string& key, const std::string& value,
                             MlpConfig& mlp, TrainConfig& train_cfg,
                             AugSpec& aug) {
    if (key == "epochs") train_cfg.epochs = parse_u64(value, key);
    else if (key == "learning_rate") train_cfg.learning_rate = parse_double(value, key);
    else if (key == "weight_decay") train_cfg.weight_decay = parse_double(value, key);
    else if (key == "batch_size") train_cfg.batch_size = parse_u64(value, key);
    else if (key == "hidden_layers") mlp.hidden_layers = parse_u64(value, key);
    else if (key == "hidden_width") mlp.hidden_width = parse_u64(value, key);
    else if (key == "dropout") mlp.dropout_p = parse_double(value, key);
    else if (key == "feature_extractor_depth")
        mlp.feature_extractor_depth = parse_u64(value, key);
    else if (key == "p_star_db") aug.p_star_db = parse_double(value, key);
    else if (key == "delta_star") aug.delta_star = parse_u64(value, key);
    else if (key == "cell_spacing") aug.cell_spacing = parse_double(value, key);
    else if (key == "snr_db") {
        if (value == "inf") aug.snr_db = std::numeric_limits<double>::infinity();
        else aug.snr_db = parse_double(value, key);
    } else return false;
    return true;
}

inline void require_header(const std::filesystem::path& path,
                           const std::string& expected) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open spec file " + path.string());
    std::string first;
    std::getline(is, first);
    if (detail::trim(first) != expected)
        throw ConfigError(path.string() + ": expected header '" + expected + "'");
}

}  // namespace detail

inline constexpr const char* kExperimentHeader = "csiaug-experiment 1";

/// Parse an experiment spec. The first line must be `csiaug-experiment 1`;
/// paths inside the file resolve relative to the file's directory.
inline ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    detail::require_header(path, kExperimentHeader);
    ExperimentSpec spec;
    for (const auto& [key, value] : detail::parse_kv_file(path, 1)) {
        if (key == "env")
            spec.env_config_path = detail::resolve_relative(path, value);
        else if (key == "dataset")
            spec.dataset_path = detail::resolve_relative(path, value);
        else if (key == "n_points") spec.n_points = detail::parse_u64(value, key);
        else if (key == "split") detail::parse_split_value(value, spec);
        else if (key == "split_seed") spec.split_seed = detail::parse_u64(value, key);
        else if (key == "original_size")
            spec.original_size = detail::parse_u64(value, key);
        else if (key == "methods") {
            for (const std::string& name : detail::split_list(value, ',')) {
                if (name == "all") {
                    spec.methods.assign(std::begin(kAllAugMethods),
                                        std::end(kAllAugMethods));
                } else {
                    spec.methods.push_back(parse_aug_method(name));
                }
            }
        } else if (key == "factors") {
            for (const std::string& f : detail::split_list(value, ','))
                spec.factors.push_back(detail::parse_u64(f, key));
        } else if (key == "trials") spec.trials = detail::parse_u64(value, key);
        else if (key == "seed") spec.seed = detail::parse_u64(value, key);
        else if (key == "out_dir")
            spec.out_dir = detail::resolve_relative(path, value);
        else if (detail::parse_learner_kv(key, value, spec.mlp, spec.train_cfg,
                                          spec.aug)) {
            // handled
        } else {
            throw ConfigError(path.string() + ": unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Transfer specs
// ---------------------------------------------------------------------------

/// Transfer scenario: a source-domain model adapted to a target domain that
/// differs in scatterer layout, with a target-side augmentation sweep.
struct TransferSpec {
    std::filesystem::path source_env_path;
    std::filesystem::path target_env_path;
    std::size_t source_size = 1000;
    std::size_t target_size = 100;
    std::size_t n_points = 0;  // points synthesized per domain
    AugMethod method = AugMethod::Pdp2;
    std::vector<std::size_t> factors = {0, 7, 31};
    std::size_t trials = 5;

    MlpConfig mlp;
    TrainConfig train_cfg;
    AugSpec aug;

    std::uint64_t split_seed = 1;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;

    void validate() const {
        std::vector<std::string> bad;
        if (source_env_path.empty()) bad.push_back("source_env");
        if (target_env_path.empty()) bad.push_back("target_env");
        if (source_size == 0) bad.push_back("source_size");
        if (target_size == 0) bad.push_back("target_size");
        if (n_points == 0) bad.push_back("n_points");
        if (factors.empty()) bad.push_back("factors");
        if (trials < 1) bad.push_back("trials");
        if (out_dir.empty()) bad.push_back("out_dir");
        if (!bad.empty()) {
            std::string msg = "invalid transfer spec, offending fields:";
            for (const std::string& f : bad) msg += " " + f;
            throw ConfigError(msg);
        }
        train_cfg.validate();
        aug.validate();
    }
};

inline constexpr const char* kTransferHeader = "csiaug-transfer 1";

inline TransferSpec load_transfer_spec(const std::filesystem::path& path) {
    detail::require_header(path, kTransferHeader);
    TransferSpec spec;
    spec.factors.clear();
    for (const auto& [key, value] : detail::parse_kv_file(path, 1)) {
        if (key == "source_env")
            spec.source_env_path = detail::resolve_relative(path, value);
        else if (key == "target_env")
            spec.target_env_path = detail::resolve_relative(path, value);
        else if (key == "source_size")
            spec.source_size = detail::parse_u64(value, key);
        else if (key == "target_size")
            spec.target_size = detail::parse_u64(value, key);
        else if (key == "n_points") spec.n_points = detail::parse_u64(value, key);
        else if (key == "method") spec.method = parse_aug_method(value);
        else if (key == "factors") {
            for (const std::string& f : detail::split_list(value, ','))
                spec.factors.push_back(detail::parse_u64(f, key));
        } else if (key == "trials") spec.trials = detail::parse_u64(value, key);
        else if (key == "split_seed")
            spec.split_seed = detail::parse_u64(value, key);
        else if (key == "seed") spec.seed = detail::parse_u64(value, key);
        else if (key == "out_dir")
            spec.out_dir = detail::resolve_relative(path, value);
        else if (detail::parse_learner_kv(key, value, spec.mlp, spec.train_cfg,
                                          spec.aug)) {
            // handled
        } else {
            throw ConfigError(path.string() + ": unknown key '" + key + "'");
        }
    }
    if (spec.factors.empty()) spec.factors = {0, 7, 31};
    spec.validate();
    return spec;
}

}  // namespace csiaug

#endif  // CSIAUG_CONFIG_HPP
