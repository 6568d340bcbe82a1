// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_EXPERIMENT_HPP
#define CSIAUG_EXPERIMENT_HPP

/// Multi-trial experiment engine: seeded trials over a (method, factor)
/// grid, with a bounded worker pool, incremental crash-resumable report
/// rows, and deterministic outputs at any thread count.
///
/// Every cell's randomness derives from (root seed, trial, method identity,
/// factor), so adding methods or factors to a spec never perturbs existing
/// cells, and reruns reproduce the same report byte for byte (timestamps in
/// the human summary aside).

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "csiaug/augment.hpp"
#include "csiaug/config.hpp"
#include "csiaug/dataset_io.hpp"
#include "csiaug/learner.hpp"
#include "csiaug/synth_env.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

namespace detail {

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Child-stream indices under a trial stream. Fixed constants: changing them
// silently changes every experiment's results.
inline constexpr std::uint64_t kBaselineSeedStream = 0;
inline constexpr std::uint64_t kSubsampleStream = 1;
inline constexpr std::uint64_t kMethodStreamBase = 10;
inline constexpr std::uint64_t kHardEasyStreamBase = 300;
inline constexpr std::uint64_t kTransferStreamBase = 600;

}  // namespace detail

inline constexpr const char* kBaselineMethodName = "baseline";

/// One completed report cell.
struct ResultRow {
    std::string method;
    std::size_t factor = 0;
    std::size_t trial = 0;
    std::string rmse_str;  // canonical %.17g text, preserved across resumes

    double rmse() const { return std::strtod(rmse_str.c_str(), nullptr); }
};

struct CellKey {
    std::string method;
    std::size_t factor;
    std::size_t trial;

    bool operator<(const CellKey& o) const {
        if (method != o.method) return method < o.method;
        if (factor != o.factor) return factor < o.factor;
        return trial < o.trial;
    }
    bool operator==(const CellKey& o) const = default;
};

struct ExperimentResult {
    std::map<CellKey, std::string> rows;  // key -> rmse text
    std::vector<std::string> errors;      // "method,factor,trial: message"
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
};

namespace detail {

/// Parse an existing results CSV into completed cells; malformed lines (for
/// example a torn final line after a crash) are skipped silently.
inline std::map<CellKey, std::string> read_results_csv(
    const std::filesystem::path& path) {
    std::map<CellKey, std::string> rows;
    std::ifstream is(path);
    if (!is) return rows;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (first) {
            first = false;
            continue;  // header
        }
        std::istringstream ls(line);
        std::string method, factor_s, trial_s, rmse_s;
        if (!std::getline(ls, method, ',') || !std::getline(ls, factor_s, ',') ||
            !std::getline(ls, trial_s, ',') || !std::getline(ls, rmse_s))
            continue;
        try {
            CellKey key{method, std::stoull(factor_s), std::stoull(trial_s)};
            const double v = std::stod(rmse_s);
            // A torn final line can still parse as a number; only accept
            // values whose text round-trips exactly as written.
            if (std::isfinite(v) && fmt_g17(v) == rmse_s) rows[key] = rmse_s;
        } catch (const std::exception&) {
            continue;
        }
    }
    return rows;
}

inline void write_results_csv(const std::filesystem::path& path,
                              const std::map<CellKey, std::string>& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write " + path.string());
    os << "method,factor,trial,rmse_m\n";
    for (const auto& [key, rmse] : rows)
        os << key.method << ',' << key.factor << ',' << key.trial << ','
           << rmse << '\n';
    if (!os) throw DataError("short write to " + path.string());
}

inline void append_result_row(const std::filesystem::path& path,
                              const CellKey& key, const std::string& rmse,
                              bool& header_written) {
    const bool exists = std::filesystem::exists(path);
    std::ofstream os(path, std::ios::app);
    if (!os) throw DataError("cannot append to " + path.string());
    if (!exists && !header_written) os << "method,factor,trial,rmse_m\n";
    header_written = true;
    os << key.method << ',' << key.factor << ',' << key.trial << ',' << rmse
       << '\n';
    os.flush();
}

/// Aggregate statistics per (method, factor) over its trials, in sorted row
/// order so the arithmetic is reproducible.
struct CellStats {
    std::size_t n = 0;
    double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
};

inline std::map<std::pair<std::string, std::size_t>, CellStats> summarize(
    const std::map<CellKey, std::string>& rows) {
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const auto& [key, rmse] : rows)
        groups[{key.method, key.factor}].push_back(
            std::strtod(rmse.c_str(), nullptr));
    std::map<std::pair<std::string, std::size_t>, CellStats> stats;
    for (const auto& [gk, vals] : groups) {
        CellStats s;
        s.n = vals.size();
        double sum = 0.0;
        s.min = vals.front();
        s.max = vals.front();
        for (double v : vals) {
            sum += v;
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
        }
        s.mean = sum / static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(var / static_cast<double>(vals.size()));
        stats[gk] = s;
    }
    return stats;
}

inline std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset materialization shared by the drivers
// ---------------------------------------------------------------------------

/// Synthesize a dataset from an environment config: n_points uniform random
/// terminal positions, channel noise on whenever the config carries a
/// positive noise variance.
inline Dataset synth_dataset(const EnvConfig& cfg, std::size_t n_points) {
    const Environment env = build_environment(cfg);
    RngStream rng(cfg.seed);
    return make_dataset(env, UniformRandom{n_points}, cfg.noise_variance > 0.0,
                        rng);
}

namespace detail {

inline Dataset materialize_dataset(const ExperimentSpec& spec) {
    if (!spec.dataset_path.empty()) return load(spec.dataset_path);
    const EnvConfig cfg = load_env_config(spec.env_config_path);
    return synth_dataset(cfg, spec.n_points);
}

inline SplitManifest make_split(const Dataset& ds, const ExperimentSpec& spec) {
    if (spec.split_scheme == SplitScheme::Random)
        return split_random(ds, spec.train_frac, spec.val_frac, spec.test_frac,
                            spec.split_seed);
    SpatialSplitConfig cfg;
    cfg.kind = spec.split_scheme;
    cfg.band_fraction = spec.band_fraction;
    cfg.val_fraction = spec.val_fraction;
    cfg.seed = spec.split_seed;
    return split_spatial(ds, cfg);
}

/// The measured subset for one trial: a seed-derived shuffle prefix of the
/// train pool, so size sweeps within a trial use nested subsets.
inline Dataset trial_measured(const Dataset& train_pool, std::size_t size,
                              const RngStream& trial_stream) {
    if (size > train_pool.samples.size())
        throw ConfigError("original_size " + std::to_string(size) +
                          " exceeds the train split (" +
                          std::to_string(train_pool.samples.size()) + ")");
    RngStream shuffle = trial_stream.child(kSubsampleStream);
    std::vector<std::size_t> order =
        shuffled_indices(train_pool.samples.size(), shuffle);
    order.resize(size);
    return subset(train_pool, order);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run_experiment
// ---------------------------------------------------------------------------

/// Execute the (method, factor, trial) grid. The factor-0 baseline is
/// computed once per trial and reported as method "baseline". Completed
/// cells found in an existing results.csv are skipped, so an interrupted
/// run resumes where it stopped; the final CSV is rewritten sorted, making
/// outputs independent of thread count and interruption history.
inline ExperimentResult run_experiment(const ExperimentSpec& spec,
                                       std::size_t n_threads = 1) {
    spec.validate();
    std::filesystem::create_directories(spec.out_dir);
    const auto t_start = std::chrono::steady_clock::now();

    const Dataset base = detail::materialize_dataset(spec);
    const SplitManifest manifest = detail::make_split(base, spec);
    manifest.validate(base.samples.size());
    const Dataset train_pool = subset(base, manifest.train);
    const Dataset val_ds = subset(base, manifest.val);
    const Dataset test_ds = subset(base, manifest.test);

    MlpConfig mlp = spec.mlp;
    if (mlp.input_dim == 0) mlp.input_dim = feature_dim(base.meta);
    mlp.validate();

    // Per-trial shared state, computed up front (trial counts are small).
    struct TrialData {
        Dataset measured;
        Normalizer norm;
        RngStream stream{0};
    };
    std::vector<TrialData> trials(spec.trials);
    for (std::size_t t = 0; t < spec.trials; ++t) {
        trials[t].stream = RngStream(spec.seed).child(t);
        trials[t].measured =
            detail::trial_measured(train_pool, spec.original_size, trials[t].stream);
        trials[t].norm = fit_normalizer(trials[t].measured, mlp);
    }

    ExperimentResult result;
    result.csv_path = spec.out_dir / "results.csv";
    result.summary_path = spec.out_dir / "summary.txt";
    result.rows = detail::read_results_csv(result.csv_path);

    // Cell list: one baseline per trial plus every (method, factor > 0).
    struct Cell {
        CellKey key;
        AugMethod method = AugMethod::Pdp2;
        bool baseline = false;
    };
    std::vector<Cell> cells;
    for (std::size_t t = 0; t < spec.trials; ++t) {
        cells.push_back({{kBaselineMethodName, 0, t}, AugMethod::Pdp2, true});
        for (AugMethod m : spec.methods)
            for (std::size_t f : spec.factors)
                if (f > 0) cells.push_back({{aug_method_name(m), f, t}, m, false});
    }
    std::vector<const Cell*> pending;
    for (const Cell& c : cells)
        if (result.rows.find(c.key) == result.rows.end()) pending.push_back(&c);

    std::mutex io_mutex;
    bool header_written = std::filesystem::exists(result.csv_path);
    std::atomic<std::size_t> next{0};

    auto run_cell = [&](const Cell& cell) -> double {
        const TrialData& td = trials[cell.key.trial];
        TrainConfig tcfg = spec.train_cfg;
        if (cell.baseline) {
            RngStream seed_stream = td.stream.child(detail::kBaselineSeedStream);
            tcfg.seed = seed_stream.next_u64();
            const auto [model, trace] = train(td.measured, val_ds, mlp, tcfg, td.norm);
            return evaluate_rmse(model, test_ds);
        }
        const RngStream cell_stream =
            td.stream
                .child(detail::kMethodStreamBase +
                       static_cast<std::uint64_t>(cell.method))
                .child(cell.key.factor);
        AugSpec aug = spec.aug;
        aug.method = cell.method;
        aug.factor = cell.key.factor;
        RngStream aug_rng = cell_stream.child(0);
        const Dataset augmented = augment_dataset(td.measured, aug, aug_rng);
        RngStream seed_stream = cell_stream.child(1);
        tcfg.seed = seed_stream.next_u64();
        const auto [model, trace] = train(augmented, val_ds, mlp, tcfg, td.norm);
        return evaluate_rmse(model, test_ds);
    };

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            const Cell& cell = *pending[i];
            try {
                const double rmse = run_cell(cell);
                const std::string text = detail::fmt_g17(rmse);
                std::lock_guard<std::mutex> lock(io_mutex);
                result.rows[cell.key] = text;
                detail::append_result_row(result.csv_path, cell.key, text,
                                          header_written);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io_mutex);
                result.errors.push_back(cell.key.method + "," +
                                        std::to_string(cell.key.factor) + "," +
                                        std::to_string(cell.key.trial) + ": " +
                                        e.what());
            }
        }
    };

    const std::size_t workers =
        std::max<std::size_t>(1, std::min(n_threads, std::max<std::size_t>(
                                                         pending.size(), 1)));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    // Canonical outputs: sorted CSV, grouped summary, sorted error log.
    detail::write_results_csv(result.csv_path, result.rows);
    std::sort(result.errors.begin(), result.errors.end());
    const auto err_path = spec.out_dir / "errors.txt";
    if (!result.errors.empty()) {
        std::ofstream es(err_path, std::ios::trunc);
        for (const std::string& e : result.errors) es << e << '\n';
    } else {
        std::filesystem::remove(err_path);
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    std::ofstream os(result.summary_path, std::ios::trunc);
    if (!os) throw DataError("cannot write " + result.summary_path.string());
    os << "csiaug experiment summary\n";
    os << "generated_at = " << detail::iso_timestamp() << "\n";
    os << "wall_seconds = " << detail::fmt_g17(wall) << "\n";
    os << "seed = " << spec.seed << "\n";
    os << "split_seed = " << spec.split_seed << "\n";
    os << "split = " << split_scheme_name(spec.split_scheme) << "\n";
    os << "original_size = " << spec.original_size << "\n";
    os << "trials = " << spec.trials << "\n";
    os << "epochs = " << spec.train_cfg.epochs << "\n";
    os << "completed_cells = " << result.rows.size() << "\n";
    os << "failed_cells = " << result.errors.size() << "\n";
    os << "\nmethod,factor,n,mean_rmse_m,std_rmse_m,min_rmse_m,max_rmse_m\n";
    for (const auto& [gk, s] : detail::summarize(result.rows))
        os << gk.first << ',' << gk.second << ',' << s.n << ','
           << detail::fmt_g17(s.mean) << ',' << detail::fmt_g17(s.stddev) << ','
           << detail::fmt_g17(s.min) << ',' << detail::fmt_g17(s.max) << '\n';
    if (!os) throw DataError("short write to " + result.summary_path.string());
    return result;
}

// ---------------------------------------------------------------------------
// Hard-sample scenario
// ---------------------------------------------------------------------------

/// Outcome of the hard-versus-easy comparison at one selection ratio.
struct HardEasyOutcome {
    double ratio = 0.0;
    double mean_hard_rmse = 0.0;
    double mean_easy_rmse = 0.0;
    std::vector<double> hard_rmse;  // per trial
    std::vector<double> easy_rmse;  // per trial
    bool hard_no_worse = false;
};

/// For each ratio: train a probe model per trial, rank sample difficulty by
/// average training loss, then compare augmenting the hardest ceil(N*rho)
/// samples against augmenting the easiest ceil(N*rho) samples (equal added
/// counts). The report is emitted either way; the direction flag records
/// whether hard-side augmentation was at least as good on average.
inline std::vector<HardEasyOutcome> run_hard_easy(
    const ExperimentSpec& spec, AugMethod method,
    const std::vector<double>& ratios) {
    spec.validate();
    for (double r : ratios)
        if (!(r > 0.0 && r <= 0.5))
            throw ConfigError("hard/easy comparison needs ratios in (0, 0.5]");
    std::filesystem::create_directories(spec.out_dir);

    const Dataset base = detail::materialize_dataset(spec);
    const SplitManifest manifest = detail::make_split(base, spec);
    manifest.validate(base.samples.size());
    const Dataset train_pool = subset(base, manifest.train);
    const Dataset val_ds = subset(base, manifest.val);
    const Dataset test_ds = subset(base, manifest.test);

    MlpConfig mlp = spec.mlp;
    if (mlp.input_dim == 0) mlp.input_dim = feature_dim(base.meta);
    mlp.validate();

    std::vector<HardEasyOutcome> outcomes;
    std::ofstream csv(spec.out_dir / "hard_easy.csv", std::ios::trunc);
    csv << "ratio,arm,trial,rmse_m\n";

    for (double rho : ratios) {
        HardEasyOutcome outcome;
        outcome.ratio = rho;
        for (std::size_t t = 0; t < spec.trials; ++t) {
            const RngStream trial_stream = RngStream(spec.seed).child(t);
            const Dataset measured =
                detail::trial_measured(train_pool, spec.original_size, trial_stream);
            const Normalizer norm = fit_normalizer(measured, mlp);

            TrainConfig probe_cfg = spec.train_cfg;
            RngStream probe_seed = trial_stream.child(detail::kBaselineSeedStream);
            probe_cfg.seed = probe_seed.next_u64();
            const auto [probe, trace] = train(measured, val_ds, mlp, probe_cfg, norm);

            const DifficultySplit split = rank_difficulty(trace, rho);
            const std::size_t k = split.hard.size();
            std::vector<std::size_t> easiest(split.easy.end() -
                                                 static_cast<std::ptrdiff_t>(k),
                                             split.easy.end());

            const auto per_mille = static_cast<std::uint64_t>(rho * 1000.0 + 0.5);
            for (int arm = 0; arm < 2; ++arm) {
                const RngStream arm_stream =
                    trial_stream
                        .child(detail::kHardEasyStreamBase +
                               static_cast<std::uint64_t>(method))
                        .child(per_mille)
                        .child(static_cast<std::uint64_t>(arm));
                AugSpec aug = spec.aug;
                aug.method = method;
                RngStream aug_rng = arm_stream.child(0);
                const Dataset grown = augment_selected(
                    measured, arm == 0 ? split.hard : easiest, aug, rho, aug_rng);
                TrainConfig tcfg = spec.train_cfg;
                RngStream seed_stream = arm_stream.child(1);
                tcfg.seed = seed_stream.next_u64();
                const auto [model, tr] = train(grown, val_ds, mlp, tcfg, norm);
                const double rmse = evaluate_rmse(model, test_ds);
                (arm == 0 ? outcome.hard_rmse : outcome.easy_rmse).push_back(rmse);
                csv << detail::fmt_g17(rho) << ',' << (arm == 0 ? "hard" : "easy")
                    << ',' << t << ',' << detail::fmt_g17(rmse) << '\n';
            }
        }
        double hsum = 0.0, esum = 0.0;
        for (double v : outcome.hard_rmse) hsum += v;
        for (double v : outcome.easy_rmse) esum += v;
        outcome.mean_hard_rmse = hsum / static_cast<double>(outcome.hard_rmse.size());
        outcome.mean_easy_rmse = esum / static_cast<double>(outcome.easy_rmse.size());
        outcome.hard_no_worse = outcome.mean_hard_rmse <= outcome.mean_easy_rmse;
        outcomes.push_back(std::move(outcome));
    }

    std::ofstream os(spec.out_dir / "hard_easy_summary.txt", std::ios::trunc);
    os << "csiaug hard-sample comparison (" << aug_method_name(method) << ")\n";
    os << "generated_at = " << detail::iso_timestamp() << "\n";
    for (const HardEasyOutcome& o : outcomes) {
        os << "ratio " << detail::fmt_g17(o.ratio) << ": mean_hard_rmse_m = "
           << detail::fmt_g17(o.mean_hard_rmse)
           << ", mean_easy_rmse_m = " << detail::fmt_g17(o.mean_easy_rmse)
           << ", hard_no_worse = " << (o.hard_no_worse ? "yes" : "NO (flagged)")
           << "\n";
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// Transfer scenario
// ---------------------------------------------------------------------------

struct TransferRow {
    std::string mode;  // source-only | scratch | full | freeze
    std::size_t factor = 0;
    std::size_t trial = 0;
    double rmse = 0.0;
};

/// Source-domain pretraining plus target-domain adaptation sweep. Reports
/// the unadapted source model, target-only training from scratch, and both
/// fine-tuning modes across target augmentation factors.
inline std::vector<TransferRow> run_transfer(const TransferSpec& spec) {
    spec.validate();
    std::filesystem::create_directories(spec.out_dir);

    const EnvConfig src_cfg = load_env_config(spec.source_env_path);
    const EnvConfig tgt_cfg = load_env_config(spec.target_env_path);
    const Dataset src_all = synth_dataset(src_cfg, spec.n_points);
    const Dataset tgt_all = synth_dataset(tgt_cfg, spec.n_points);
    if (feature_dim(src_all.meta) != feature_dim(tgt_all.meta))
        throw ConfigError("source and target domains disagree on tensor shape");

    const SplitManifest src_split =
        split_random(src_all, 0.7, 0.15, 0.15, spec.split_seed);
    const SplitManifest tgt_split =
        split_random(tgt_all, 0.7, 0.15, 0.15, spec.split_seed);
    const Dataset src_pool = subset(src_all, src_split.train);
    const Dataset src_val = subset(src_all, src_split.val);
    const Dataset tgt_pool = subset(tgt_all, tgt_split.train);
    const Dataset tgt_val = subset(tgt_all, tgt_split.val);
    const Dataset tgt_test = subset(tgt_all, tgt_split.test);

    MlpConfig mlp = spec.mlp;
    if (mlp.input_dim == 0) mlp.input_dim = feature_dim(src_all.meta);
    mlp.validate();

    std::vector<TransferRow> rows;
    std::ofstream csv(spec.out_dir / "transfer.csv", std::ios::trunc);
    csv << "mode,factor,trial,rmse_m\n";
    auto emit = [&](const std::string& mode, std::size_t factor, std::size_t t,
                    double rmse) {
        rows.push_back({mode, factor, t, rmse});
        csv << mode << ',' << factor << ',' << t << ',' << detail::fmt_g17(rmse)
            << '\n';
    };

    for (std::size_t t = 0; t < spec.trials; ++t) {
        const RngStream trial_stream = RngStream(spec.seed).child(t);
        const RngStream scenario =
            trial_stream.child(detail::kTransferStreamBase);

        // Source model.
        const Dataset src_measured =
            detail::trial_measured(src_pool, spec.source_size, trial_stream);
        const Normalizer src_norm = fit_normalizer(src_measured, mlp);
        TrainConfig src_tcfg = spec.train_cfg;
        RngStream src_seed = scenario.child(0);
        src_tcfg.seed = src_seed.next_u64();
        const auto [source_model, src_trace] =
            train(src_measured, src_val, mlp, src_tcfg, src_norm);

        // Target data for this trial.
        RngStream tgt_pick = trial_stream.child(detail::kSubsampleStream + 1);
        std::vector<std::size_t> order =
            detail::shuffled_indices(tgt_pool.samples.size(), tgt_pick);
        if (spec.target_size > order.size())
            throw ConfigError("target_size exceeds the target train split");
        order.resize(spec.target_size);
        const Dataset tgt_measured = subset(tgt_pool, order);

        emit("source-only", 0, t, evaluate_rmse(source_model, tgt_test));

        // Target-only scratch baseline.
        TrainConfig scratch_cfg = spec.train_cfg;
        RngStream scratch_seed = scenario.child(1);
        scratch_cfg.seed = scratch_seed.next_u64();
        const Normalizer tgt_norm = fit_normalizer(tgt_measured, mlp);
        const auto [scratch_model, scratch_trace] =
            train(tgt_measured, tgt_val, mlp, scratch_cfg, tgt_norm);
        emit("scratch", 0, t, evaluate_rmse(scratch_model, tgt_test));

        for (std::size_t factor : spec.factors) {
            AugSpec aug = spec.aug;
            aug.method = spec.method;
            aug.factor = factor;
            const RngStream sweep = scenario.child(100 + factor);
            RngStream aug_rng = sweep.child(0);
            const Dataset grown = factor == 0
                                      ? tgt_measured
                                      : augment_dataset(tgt_measured, aug, aug_rng);
            for (int mode = 0; mode < 2; ++mode) {
                TrainConfig tcfg = spec.train_cfg;
                RngStream seed_stream = sweep.child(1 + static_cast<std::uint64_t>(mode));
                tcfg.seed = seed_stream.next_u64();
                const auto [adapted, atrace] = transfer(
                    source_model, grown, tgt_val,
                    mode == 0 ? TransferMode::FullFineTune
                              : TransferMode::FreezeFeatures,
                    tcfg);
                emit(mode == 0 ? "full" : "freeze", factor, t,
                     evaluate_rmse(adapted, tgt_test));
            }
        }
    }

    std::ofstream os(spec.out_dir / "transfer_summary.txt", std::ios::trunc);
    os << "csiaug transfer scenario (" << aug_method_name(spec.method) << ")\n";
    os << "generated_at = " << detail::iso_timestamp() << "\n";
    std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
    for (const TransferRow& r : rows) groups[{r.mode, r.factor}].push_back(r.rmse);
    for (const auto& [gk, vals] : groups) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        os << gk.first << " factor " << gk.second << ": mean_rmse_m = "
           << detail::fmt_g17(sum / static_cast<double>(vals.size())) << " over "
           << vals.size() << " trials\n";
    }
    return rows;
}

}  // namespace csiaug

#endif  // CSIAUG_EXPERIMENT_HPP
