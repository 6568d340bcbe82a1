// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "csiaug/experiment.hpp"

namespace {

using namespace csiaug;
namespace fs = std::filesystem;

fs::path scratch_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "csiaug_harness_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path path = scratch_dir() / name;
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    os << content;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

/// Summary text with the volatile lines (timestamps, wall time) removed.
std::string stable_summary(const fs::path& path) {
    std::istringstream is(slurp(path));
    std::ostringstream out;
    std::string line;
    while (std::getline(is, line))
        if (line.rfind("generated_at = ", 0) != 0 &&
            line.rfind("wall_seconds = ", 0) != 0)
            out << line << '\n';
    return out.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CSIAUG_CLI_PATH) + " " + args +
                            " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

Dataset tiny_dataset(std::size_t n, std::uint64_t seed) {
    Dataset ds;
    ds.meta.n_subcarriers = 8;
    ds.meta.n_ap = 2;
    ds.meta.n_rx = 1;
    ds.meta.n_samples = n;
    ds.meta.bandwidth_hz = 80e6;
    ds.meta.carrier_hz = 5.18e9;
    RngStream rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        CsiSample s;
        s.tensor = CsiTensor(2, 1, 8);
        for (cplx& z : s.tensor.flat()) z = rng.next_cnormal(1.0);
        s.label = {rng.next_uniform(0.0, 10.0), rng.next_uniform(0.0, 10.0)};
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

/// A small but complete experiment over a file-backed dataset.
ExperimentSpec tiny_spec(const fs::path& dataset, const fs::path& out_dir) {
    ExperimentSpec spec;
    spec.dataset_path = dataset;
    spec.original_size = 12;
    spec.methods = {AugMethod::Pdp2, AugMethod::Noise};
    spec.factors = {0, 2};
    spec.trials = 2;
    spec.mlp.hidden_layers = 2;
    spec.mlp.hidden_width = 4;
    spec.train_cfg.epochs = 6;
    spec.seed = 99;
    spec.out_dir = out_dir;
    return spec;
}

const char* kEnvText =
    "room_width = 10.0\n"
    "room_depth = 8.0\n"
    "n_ap = 2\n"
    "n_rx = 1\n"
    "n_scatterers = 6\n"
    "los_enabled = false\n"
    "carrier_hz = 5.18e9\n"
    "bandwidth_hz = 80e6\n"
    "n_subcarriers = 8\n"
    "noise_variance = 0.0\n"
    "seed = 4\n";

}  // namespace

// ---------------------------------------------------------------------------
// Environment config parsing
// ---------------------------------------------------------------------------

TEST_CASE("environment configs parse with auto AP placement") {
    const fs::path path = write_file("env_ok.cfg", kEnvText);
    const EnvConfig cfg = load_env_config(path);
    CHECK(cfg.room_width == 10.0);
    CHECK(cfg.room_depth == 8.0);
    CHECK(cfg.n_ap == 2);
    CHECK(cfg.n_rx == 1);
    CHECK(cfg.los_enabled == false);
    CHECK(cfg.n_subcarriers == 8);
    CHECK(cfg.seed == 4);
    REQUIRE(cfg.ap_placements.size() == 2);
}

TEST_CASE("auto AP placement walks the perimeter toward the center") {
    const auto aps = auto_place_aps(4, 10.0, 10.0);
    REQUIRE(aps.size() == 4);
    // Arc positions (j + 1/2) * 40 / 4 = 5, 15, 25, 35 on a 10 x 10 room.
    CHECK(aps[0].position.x == Catch::Approx(5.0));
    CHECK(aps[0].position.y == Catch::Approx(0.0));
    CHECK(aps[1].position.x == Catch::Approx(10.0));
    CHECK(aps[1].position.y == Catch::Approx(5.0));
    CHECK(aps[2].position.x == Catch::Approx(5.0));
    CHECK(aps[2].position.y == Catch::Approx(10.0));
    CHECK(aps[3].position.x == Catch::Approx(0.0));
    CHECK(aps[3].position.y == Catch::Approx(5.0));
    // Boresights aim at the room center.
    CHECK(aps[0].orientation == Catch::Approx(std::numbers::pi / 2.0));
    CHECK(aps[1].orientation == Catch::Approx(std::numbers::pi));
    CHECK(aps[2].orientation == Catch::Approx(-std::numbers::pi / 2.0));
    CHECK(aps[3].orientation == Catch::Approx(0.0).margin(1e-15));

    for (const auto& ap : auto_place_aps(5, 12.0, 3.0)) {
        const bool on_wall = ap.position.x == 0.0 || ap.position.x == 12.0 ||
                             ap.position.y == 0.0 || ap.position.y == 3.0;
        CHECK(on_wall);
        CHECK((ap.position.x >= 0.0 && ap.position.x <= 12.0));
        CHECK((ap.position.y >= 0.0 && ap.position.y <= 3.0));
    }
}

TEST_CASE("explicit AP lines override auto placement") {
    std::string text = kEnvText;
    text += "ap = 1.0 0.0 1.57\n";
    text += "ap = 9.0 8.0 -1.57\n";
    const fs::path path = write_file("env_aps.cfg", text);
    const EnvConfig cfg = load_env_config(path);
    REQUIRE(cfg.ap_placements.size() == 2);
    CHECK(cfg.ap_placements[0].position.x == 1.0);
    CHECK(cfg.ap_placements[1].position.y == 8.0);
    CHECK(cfg.ap_placements[1].orientation == -1.57);
}

TEST_CASE("environment config errors name the problem") {
    const fs::path unknown = write_file("env_unknown.cfg",
                                        std::string(kEnvText) + "wallpaper = 3\n");
    CHECK_THROWS_WITH(load_env_config(unknown),
                      Catch::Matchers::ContainsSubstring("wallpaper"));

    const fs::path torn = write_file("env_torn.cfg",
                                     std::string(kEnvText) + "just some words\n");
    CHECK_THROWS_WITH(load_env_config(torn),
                      Catch::Matchers::ContainsSubstring(":12:"));

    std::string zero_area(kEnvText);
    zero_area.replace(zero_area.find("room_width = 10.0"), 17, "room_width = 0.0");
    const fs::path zero = write_file("env_zero.cfg", zero_area);
    CHECK_THROWS_WITH(load_env_config(zero),
                      Catch::Matchers::ContainsSubstring("room_width"));

    const fs::path bad_ap = write_file(
        "env_badap.cfg", std::string(kEnvText) + "ap = 1.0 2.0\n");
    CHECK_THROWS_AS(load_env_config(bad_ap), ConfigError);
}

// ---------------------------------------------------------------------------
// Experiment spec parsing
// ---------------------------------------------------------------------------

namespace {

const char* kSpecBody =
    "env = env_ok.cfg\n"
    "n_points = 50\n"
    "split = random 0.5 0.2 0.3\n"
    "split_seed = 3\n"
    "original_size = 10\n"
    "methods = pdp2,corr\n"
    "factors = 0,3\n"
    "trials = 2\n"
    "epochs = 6\n"
    "hidden_layers = 2\n"
    "hidden_width = 4\n"
    "seed = 5\n"
    "out_dir = out\n";

}  // namespace

TEST_CASE("experiment specs parse and resolve relative paths") {
    write_file("env_ok.cfg", kEnvText);
    const fs::path path =
        write_file("spec_ok.cfg", std::string("csiaug-experiment 1\n") + kSpecBody);
    const ExperimentSpec spec = load_experiment_spec(path);
    CHECK(spec.env_config_path == scratch_dir() / "env_ok.cfg");
    CHECK(spec.n_points == 50);
    CHECK(spec.split_scheme == SplitScheme::Random);
    CHECK(spec.train_frac == 0.5);
    CHECK(spec.test_frac == 0.3);
    CHECK(spec.original_size == 10);
    REQUIRE(spec.methods.size() == 2);
    CHECK(spec.methods[0] == AugMethod::Pdp2);
    CHECK(spec.methods[1] == AugMethod::Corr);
    CHECK(spec.factors == std::vector<std::size_t>{0, 3});
    CHECK(spec.trials == 2);
    CHECK(spec.train_cfg.epochs == 6);
    CHECK(spec.mlp.hidden_layers == 2);
    CHECK(spec.mlp.hidden_width == 4);
    CHECK(spec.out_dir == scratch_dir() / "out");
}

TEST_CASE("experiment spec validation rejects bad files") {
    write_file("env_ok.cfg", kEnvText);
    const std::string body(kSpecBody);

    const fs::path no_header = write_file("spec_nohdr.cfg", body);
    CHECK_THROWS_WITH(load_experiment_spec(no_header),
                      Catch::Matchers::ContainsSubstring("csiaug-experiment 1"));

    const fs::path unknown = write_file(
        "spec_unknown.cfg",
        "csiaug-experiment 1\n" + body + "turbo = yes\n");
    CHECK_THROWS_WITH(load_experiment_spec(unknown),
                      Catch::Matchers::ContainsSubstring("turbo"));

    std::string no_zero = body;
    no_zero.replace(no_zero.find("factors = 0,3"), 13, "factors = 3,7");
    const fs::path missing_zero =
        write_file("spec_nozero.cfg", "csiaug-experiment 1\n" + no_zero);
    CHECK_THROWS_WITH(load_experiment_spec(missing_zero),
                      Catch::Matchers::ContainsSubstring("factors"));

    std::string dup = body;
    dup.replace(dup.find("factors = 0,3"), 13, "factors = 0,3,3");
    const fs::path dup_factors =
        write_file("spec_dup.cfg", "csiaug-experiment 1\n" + dup);
    CHECK_THROWS_WITH(load_experiment_spec(dup_factors),
                      Catch::Matchers::ContainsSubstring("duplicate"));

    const fs::path both = write_file(
        "spec_both.cfg",
        "csiaug-experiment 1\n" + body + "dataset = some.csia\n");
    CHECK_THROWS_AS(load_experiment_spec(both), ConfigError);

    std::string bad_method = body;
    bad_method.replace(bad_method.find("methods = pdp2,corr"), 19,
                       "methods = pdp2,warp");
    const fs::path warp =
        write_file("spec_warp.cfg", "csiaug-experiment 1\n" + bad_method);
    CHECK_THROWS_WITH(load_experiment_spec(warp),
                      Catch::Matchers::ContainsSubstring("warp"));
}

TEST_CASE("method list keyword covers every operator") {
    write_file("env_ok.cfg", kEnvText);
    std::string all = kSpecBody;
    all.replace(all.find("methods = pdp2,corr"), 19, "methods = all");
    const fs::path path =
        write_file("spec_all.cfg", "csiaug-experiment 1\n" + all);
    const ExperimentSpec spec = load_experiment_spec(path);
    CHECK(spec.methods.size() == std::size(kAllAugMethods));
}

TEST_CASE("split values cover the spatial schemes") {
    write_file("env_ok.cfg", kEnvText);
    std::string spatial = kSpecBody;
    spatial.replace(spatial.find("split = random 0.5 0.2 0.3"), 26,
                    "split = spatial-center 0.4 0.15");
    const fs::path path =
        write_file("spec_spatial.cfg", "csiaug-experiment 1\n" + spatial);
    const ExperimentSpec spec = load_experiment_spec(path);
    CHECK(spec.split_scheme == SplitScheme::SpatialCenter);
    CHECK(spec.band_fraction == 0.4);
    CHECK(spec.val_fraction == 0.15);

    std::string bogus = kSpecBody;
    bogus.replace(bogus.find("split = random 0.5 0.2 0.3"), 26,
                  "split = diagonal");
    const fs::path bad =
        write_file("spec_badsplit.cfg", "csiaug-experiment 1\n" + bogus);
    CHECK_THROWS_WITH(load_experiment_spec(bad),
                      Catch::Matchers::ContainsSubstring("diagonal"));
}

TEST_CASE("transfer specs parse with defaulted factor sweep") {
    write_file("env_ok.cfg", kEnvText);
    const fs::path path = write_file("transfer_ok.cfg",
                                     "csiaug-transfer 1\n"
                                     "source_env = env_ok.cfg\n"
                                     "target_env = env_ok.cfg\n"
                                     "n_points = 50\n"
                                     "source_size = 20\n"
                                     "target_size = 8\n"
                                     "method = pdp2\n"
                                     "trials = 2\n"
                                     "epochs = 6\n"
                                     "hidden_layers = 2\n"
                                     "hidden_width = 4\n"
                                     "out_dir = tout\n");
    const TransferSpec spec = load_transfer_spec(path);
    CHECK(spec.factors == std::vector<std::size_t>{0, 7, 31});
    CHECK(spec.source_size == 20);
    CHECK(spec.target_size == 8);
    CHECK(spec.method == AugMethod::Pdp2);

    const fs::path wrong = write_file("transfer_wrong.cfg",
                                      "csiaug-experiment 1\nn_points = 5\n");
    CHECK_THROWS_WITH(load_transfer_spec(wrong),
                      Catch::Matchers::ContainsSubstring("csiaug-transfer 1"));

    const fs::path missing = write_file("transfer_missing.cfg",
                                        "csiaug-transfer 1\nn_points = 5\n"
                                        "out_dir = tout\n");
    CHECK_THROWS_WITH(load_transfer_spec(missing),
                      Catch::Matchers::ContainsSubstring("source_env"));
}

// ---------------------------------------------------------------------------
// Experiment engine
// ---------------------------------------------------------------------------

TEST_CASE("experiment grid produces one row per cell with a shared baseline") {
    const Dataset ds = tiny_dataset(30, 17);
    const fs::path ds_path = scratch_dir() / "grid.csia";
    save(ds, ds_path);
    const ExperimentSpec spec = tiny_spec(ds_path, scratch_dir() / "grid_out");
    fs::remove_all(spec.out_dir);

    const ExperimentResult result = run_experiment(spec, 2);
    CHECK(result.errors.empty());
    // 2 trials x (1 shared baseline + 2 methods x 1 nonzero factor).
    REQUIRE(result.rows.size() == 6);
    std::size_t baselines = 0;
    for (const auto& [key, rmse] : result.rows) {
        if (key.method == kBaselineMethodName) {
            ++baselines;
            CHECK(key.factor == 0);
        } else {
            CHECK(key.factor == 2);
        }
        CHECK(std::isfinite(std::strtod(rmse.c_str(), nullptr)));
    }
    CHECK(baselines == 2);

    // The CSV round-trips to the same rows.
    CHECK(detail::read_results_csv(result.csv_path) == result.rows);

    // Summary means are the exact arithmetic means of the per-trial values.
    const auto stats = detail::summarize(result.rows);
    for (const auto& [gk, s] : stats) {
        double sum = 0.0;
        std::size_t n = 0;
        double lo = 1e300, hi = -1e300;
        for (const auto& [key, rmse] : result.rows)
            if (key.method == gk.first && key.factor == gk.second) {
                const double v = std::strtod(rmse.c_str(), nullptr);
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                ++n;
            }
        REQUIRE(n == s.n);
        CHECK(s.mean == sum / static_cast<double>(n));
        CHECK(s.min == lo);
        CHECK(s.max == hi);
        CHECK(s.mean >= s.min);
        CHECK(s.mean <= s.max);
    }
}

TEST_CASE("factor list of just zero reproduces plain training") {
    const Dataset ds = tiny_dataset(30, 18);
    const fs::path ds_path = scratch_dir() / "plain.csia";
    save(ds, ds_path);
    ExperimentSpec spec = tiny_spec(ds_path, scratch_dir() / "plain_out");
    spec.factors = {0};
    fs::remove_all(spec.out_dir);

    const ExperimentResult result = run_experiment(spec, 1);
    REQUIRE(result.rows.size() == spec.trials);
    for (const auto& [key, rmse] : result.rows)
        CHECK(key.method == kBaselineMethodName);

    // The baseline cells match a direct training run with the same streams.
    // Compare against the file-backed dataset: the binary format stores
    // tensors in single precision, so the loaded copy is the ground truth.
    const Dataset loaded = load(ds_path);
    const SplitManifest man = split_random(loaded, 0.6, 0.2, 0.2, 1);
    const Dataset pool = subset(loaded, man.train);
    const Dataset val_ds = subset(loaded, man.val);
    const Dataset test_ds = subset(loaded, man.test);
    MlpConfig mlp = spec.mlp;
    mlp.input_dim = feature_dim(loaded.meta);
    const RngStream trial0 = RngStream(spec.seed).child(0);
    RngStream shuffle = trial0.child(detail::kSubsampleStream);
    auto order = detail::shuffled_indices(pool.samples.size(), shuffle);
    order.resize(spec.original_size);
    const Dataset measured = subset(pool, order);
    TrainConfig tcfg = spec.train_cfg;
    RngStream seed_stream = trial0.child(detail::kBaselineSeedStream);
    tcfg.seed = seed_stream.next_u64();
    const auto [model, trace] = train(measured, val_ds, mlp, tcfg);
    const double want = evaluate_rmse(model, test_ds);
    CHECK(result.rows.at({kBaselineMethodName, 0, 0}) == detail::fmt_g17(want));
}

TEST_CASE("interrupted experiments resume to identical reports") {
    const Dataset ds = tiny_dataset(30, 19);
    const fs::path ds_path = scratch_dir() / "resume.csia";
    save(ds, ds_path);
    ExperimentSpec spec = tiny_spec(ds_path, scratch_dir() / "resume_out");

    fs::remove_all(spec.out_dir);
    const ExperimentResult full = run_experiment(spec, 1);
    const std::string want_csv = slurp(full.csv_path);
    const std::string want_summary = stable_summary(full.summary_path);

    // Simulate a crash: keep the header, two finished rows, and a torn line.
    std::istringstream is(want_csv);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    REQUIRE(lines.size() == 7);
    fs::remove_all(spec.out_dir);
    fs::create_directories(spec.out_dir);
    {
        std::ofstream os(spec.out_dir / "results.csv", std::ios::trunc);
        os << lines[0] << '\n' << lines[1] << '\n' << lines[4] << '\n';
        os << lines[5].substr(0, lines[5].size() / 2);  // torn mid-write
    }

    const ExperimentResult resumed = run_experiment(spec, 2);
    CHECK(slurp(resumed.csv_path) == want_csv);
    CHECK(stable_summary(resumed.summary_path) == want_summary);

    // A rerun over the complete report is a no-op with identical bytes.
    const ExperimentResult again = run_experiment(spec, 1);
    CHECK(slurp(again.csv_path) == want_csv);
}

TEST_CASE("reports are identical at any thread count") {
    const Dataset ds = tiny_dataset(30, 20);
    const fs::path ds_path = scratch_dir() / "threads.csia";
    save(ds, ds_path);

    std::string csv[2], summary[2];
    for (int i = 0; i < 2; ++i) {
        ExperimentSpec spec = tiny_spec(
            ds_path, scratch_dir() / ("threads_out" + std::to_string(i)));
        fs::remove_all(spec.out_dir);
        const ExperimentResult r = run_experiment(spec, i == 0 ? 1 : 4);
        csv[i] = slurp(r.csv_path);
        summary[i] = stable_summary(r.summary_path);
    }
    CHECK(csv[0] == csv[1]);
    CHECK(summary[0] == summary[1]);
}

TEST_CASE("failing cells are recorded and the experiment continues") {
    const Dataset ds = tiny_dataset(30, 21);
    const fs::path ds_path = scratch_dir() / "failing.csia";
    save(ds, ds_path);
    ExperimentSpec spec = tiny_spec(ds_path, scratch_dir() / "failing_out");
    spec.train_cfg.learning_rate = 1e155;  // guaranteed divergence
    fs::remove_all(spec.out_dir);

    const ExperimentResult result = run_experiment(spec, 2);
    CHECK(result.rows.empty());
    CHECK(result.errors.size() == 6);
    CHECK(fs::exists(spec.out_dir / "errors.txt"));
    CHECK(fs::exists(spec.out_dir / "summary.txt"));
    const std::string log = slurp(spec.out_dir / "errors.txt");
    CHECK(log.find("non-finite") != std::string::npos);
}

TEST_CASE("experiments validate sizes against the split") {
    const Dataset ds = tiny_dataset(20, 22);
    const fs::path ds_path = scratch_dir() / "toosmall.csia";
    save(ds, ds_path);
    ExperimentSpec spec = tiny_spec(ds_path, scratch_dir() / "toosmall_out");
    spec.original_size = 500;  // train split only holds 12
    CHECK_THROWS_AS(run_experiment(spec, 1), ConfigError);
}

// ---------------------------------------------------------------------------
// CLI subprocess checks
// ---------------------------------------------------------------------------

TEST_CASE("cli synthesizes byte-identical datasets for one config") {
    const fs::path env = write_file("cli_env.cfg", kEnvText);
    const fs::path out1 = scratch_dir() / "cli_a.csia";
    const fs::path out2 = scratch_dir() / "cli_b.csia";
    REQUIRE(run_cli("synth --config " + env.string() + " --n-points 25 --out " +
                    out1.string()) == 0);
    REQUIRE(run_cli("synth --config " + env.string() + " --n-points 25 --out " +
                    out2.string()) == 0);
    CHECK(slurp(out1) == slurp(out2));

    const Dataset ds = load(out1);
    CHECK(ds.samples.size() == 25);
    CHECK(ds.meta.n_ap == 2);
    CHECK(ds.meta.n_subcarriers == 8);

    // A different seed changes the bytes.
    const fs::path out3 = scratch_dir() / "cli_c.csia";
    REQUIRE(run_cli("--seed 77 synth --config " + env.string() +
                    " --n-points 25 --out " + out3.string()) == 0);
    CHECK(slurp(out1) != slurp(out3));
}

TEST_CASE("cli maps error categories to exit codes") {
    std::string zero_area(kEnvText);
    zero_area.replace(zero_area.find("room_width = 10.0"), 17, "room_width = 0.0");
    const fs::path bad_env = write_file("cli_zero.cfg", zero_area);
    CHECK(run_cli("synth --config " + bad_env.string() +
                  " --n-points 5 --out " + (scratch_dir() / "nope.csia").string()) == 2);

    const fs::path junk = write_file("junk.csia", "this is not a dataset");
    CHECK(run_cli("eval --model " + junk.string() + " --in " + junk.string()) == 3);

    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("cli train, eval, augment, and hard-select round-trip") {
    const fs::path env = write_file("cli_env.cfg", kEnvText);
    const fs::path data = scratch_dir() / "cli_train.csia";
    REQUIRE(run_cli("synth --config " + env.string() + " --n-points 30 --out " +
                    data.string()) == 0);

    const fs::path model = scratch_dir() / "cli_model.csim";
    const fs::path trace = scratch_dir() / "cli_trace.csv";
    REQUIRE(run_cli("--seed 5 train --in " + data.string() + " --out " +
                    model.string() + " --trace " + trace.string() +
                    " --epochs 6 --hidden-layers 2 --hidden-width 4") == 0);
    const Model m = load_model(model);
    CHECK(m.config.hidden_layers == 2);
    CHECK(m.config.hidden_width == 4);

    REQUIRE(run_cli("eval --model " + model.string() + " --in " + data.string()) == 0);

    const fs::path grown = scratch_dir() / "cli_grown.csia";
    REQUIRE(run_cli("--seed 6 augment --in " + data.string() +
                    " --method phase-ap --factor 3 --out " + grown.string()) == 0);
    const Dataset g = load(grown);
    CHECK(g.samples.size() == 120);

    const fs::path hard = scratch_dir() / "cli_hard.csia";
    REQUIRE(run_cli("--seed 7 hard-select --in " + data.string() + " --trace " +
                    trace.string() + " --rho 0.25 --method pdp2 --out " +
                    hard.string()) == 0);
    const Dataset h = load(hard);
    // ceil(30 * 0.25) = 8 hard samples, factor 4: 30 + 32.
    CHECK(h.samples.size() == 62);

    // Trace with the wrong cardinality is a data error.
    CHECK(run_cli("hard-select --in " + grown.string() + " --trace " +
                  trace.string() + " --rho 0.25 --method pdp2 --out " +
                  (scratch_dir() / "nope2.csia").string()) == 3);
}

TEST_CASE("cli honors the out-dir environment override") {
    const fs::path env = write_file("cli_env.cfg", kEnvText);
    const fs::path env_dir = scratch_dir() / "env_override";
    fs::create_directories(env_dir);
    const std::string cmd = "CSIAUG_OUT_DIR=" + env_dir.string() + " " +
                            CSIAUG_CLI_PATH + " synth --config " + env.string() +
                            " --n-points 5 --out via_env.csia > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    REQUIRE(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(env_dir / "via_env.csia"));

    // An explicit flag beats the environment variable.
    const fs::path flag_dir = scratch_dir() / "flag_override";
    fs::create_directories(flag_dir);
    const std::string cmd2 = "CSIAUG_OUT_DIR=" + env_dir.string() + " " +
                             CSIAUG_CLI_PATH + " --out-dir " + flag_dir.string() +
                             " synth --config " + env.string() +
                             " --n-points 5 --out via_flag.csia > /dev/null 2>&1";
    const int status2 = std::system(cmd2.c_str());
    REQUIRE(WIFEXITED(status2));
    REQUIRE(WEXITSTATUS(status2) == 0);
    CHECK(fs::exists(flag_dir / "via_flag.csia"));
    CHECK(!fs::exists(env_dir / "via_flag.csia"));
}

TEST_CASE("cli experiment command runs a spec end to end") {
    write_file("env_ok.cfg", kEnvText);
    const fs::path spec = write_file(
        "cli_spec.cfg",
        "csiaug-experiment 1\n"
        "env = env_ok.cfg\n"
        "n_points = 50\n"
        "original_size = 10\n"
        "methods = noise\n"
        "factors = 0,2\n"
        "trials = 1\n"
        "epochs = 5\n"
        "hidden_layers = 2\n"
        "hidden_width = 4\n"
        "seed = 5\n"
        "out_dir = cli_exp_out\n");
    fs::remove_all(scratch_dir() / "cli_exp_out");
    REQUIRE(run_cli("experiment --spec " + spec.string()) == 0);
    const fs::path csv = scratch_dir() / "cli_exp_out" / "results.csv";
    REQUIRE(fs::exists(csv));
    const std::string text = slurp(csv);
    CHECK(text.find("method,factor,trial,rmse_m") == 0);
    CHECK(text.find("baseline,0,0,") != std::string::npos);
    CHECK(text.find("noise,2,0,") != std::string::npos);
}
