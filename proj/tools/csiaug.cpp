// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

/// csiaug: dataset synthesis, augmentation, training, evaluation, and
/// multi-trial experiments for CSI-based indoor localization.
///
/// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
/// failure. CSIAUG_OUT_DIR and CSIAUG_THREADS override the out-dir and
/// thread-count defaults; explicit flags beat both.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csiaug/augment.hpp"
#include "csiaug/config.hpp"
#include "csiaug/dataset_io.hpp"
#include "csiaug/experiment.hpp"
#include "csiaug/learner.hpp"
#include "csiaug/synth_env.hpp"

namespace {

using namespace csiaug;

/// Relative output paths land under the global out-dir.
std::filesystem::path place(const std::filesystem::path& out_dir,
                            const std::filesystem::path& out) {
    return out.is_absolute() ? out : out_dir / out;
}

std::string fmt(double x) { return detail::fmt_g17(x); }

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<double>& losses) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write " + path.string());
    os << "index,avg_loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        os << i << ',' << fmt(losses[i]) << '\n';
    if (!os) throw DataError("short write to " + path.string());
}

std::vector<double> read_trace_csv(const std::filesystem::path& path,
                                   std::size_t expected) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open trace file " + path.string());
    std::vector<double> losses(expected, -1.0);
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty trace file " + path.string());
    std::size_t seen = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string idx_s, loss_s;
        if (!std::getline(ls, idx_s, ',') || !std::getline(ls, loss_s))
            throw DataError(path.string() + ": expected 'index,avg_loss' rows");
        const std::size_t idx = detail::parse_u64(idx_s, "index");
        if (idx >= expected)
            throw DataError(path.string() + ": trace index " + idx_s +
                            " out of range for a dataset of " +
                            std::to_string(expected) + " samples");
        if (losses[idx] >= 0.0)
            throw DataError(path.string() + ": duplicate trace index " + idx_s);
        losses[idx] = detail::parse_double(loss_s, "avg_loss");
        ++seen;
    }
    if (seen != expected)
        throw DataError(path.string() + ": trace covers " + std::to_string(seen) +
                        " samples but the dataset has " + std::to_string(expected));
    return losses;
}

struct LearnerFlags {
    MlpConfig mlp;
    TrainConfig train_cfg;

    void attach(CLI::App* cmd) {
        cmd->add_option("--epochs", train_cfg.epochs, "Training epochs");
        cmd->add_option("--lr", train_cfg.learning_rate, "Learning rate");
        cmd->add_option("--weight-decay", train_cfg.weight_decay, "Weight decay");
        cmd->add_option("--batch-size", train_cfg.batch_size, "Minibatch size");
        cmd->add_option("--hidden-layers", mlp.hidden_layers, "Hidden layer count");
        cmd->add_option("--hidden-width", mlp.hidden_width, "Hidden layer width");
        cmd->add_option("--dropout", mlp.dropout_p, "Dropout probability");
        cmd->add_option("--fed", mlp.feature_extractor_depth,
                        "Feature extractor depth (layers treated as phi)");
    }
};

struct AugFlags {
    std::string method_name = "pdp2";
    AugSpec spec;

    void attach(CLI::App* cmd, bool with_factor) {
        cmd->add_option("--method", method_name,
                        "Augmentation method (phase-ap, phase-rx, amp-ap, amp-rx, "
                        "corr, pdp1, pdp2, pdp3, pdp4, noise)");
        if (with_factor)
            cmd->add_option("--factor", spec.factor, "Copies per sample");
        cmd->add_option("--p-star", spec.p_star_db, "Amplitude perturbation cap (dB)");
        cmd->add_option("--delta-star", spec.delta_star,
                        "Covariance lag cap (0 = M/8 default)");
        cmd->add_option("--cell-spacing", spec.cell_spacing,
                        "Profile-averaging cell edge (m)");
        cmd->add_option("--snr", spec.snr_db, "Noise injection target SNR (dB)");
    }

    AugSpec resolve() const {
        AugSpec s = spec;
        s.method = parse_aug_method(method_name);
        return s;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CSI localization dataset synthesis, augmentation, and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::filesystem::path out_dir = ".";
    auto* seed_opt = app.add_option("--seed", seed, "Root random seed");
    app.add_option("--threads", threads, "Worker thread count")
        ->envname("CSIAUG_THREADS");
    auto* out_dir_opt = app.add_option("--out-dir", out_dir, "Output directory")
                            ->envname("CSIAUG_OUT_DIR");

    // synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    std::filesystem::path synth_config, synth_out;
    std::size_t synth_points = 0;
    synth->add_option("--config", synth_config, "Environment config file")->required();
    synth->add_option("--n-points", synth_points, "Measurement point count")->required();
    synth->add_option("--out", synth_out, "Output dataset file")->required();

    // augment ----------------------------------------------------------
    auto* augment = app.add_subcommand("augment", "Grow a dataset with one method");
    std::filesystem::path aug_in, aug_out;
    AugFlags aug_flags;
    augment->add_option("--in", aug_in, "Input dataset")->required();
    augment->add_option("--out", aug_out, "Output dataset")->required();
    aug_flags.attach(augment, true);

    // train --------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train a localizer");
    std::filesystem::path train_in, train_val, train_out, train_trace;
    LearnerFlags learner_flags;
    train_cmd->add_option("--in", train_in, "Training dataset")->required();
    train_cmd->add_option("--val", train_val, "Validation dataset");
    train_cmd->add_option("--out", train_out, "Model checkpoint file")->required();
    train_cmd->add_option("--trace", train_trace, "Per-sample loss trace CSV");
    learner_flags.attach(train_cmd);

    // eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
    std::filesystem::path eval_model, eval_in;
    eval_cmd->add_option("--model", eval_model, "Model checkpoint")->required();
    eval_cmd->add_option("--in", eval_in, "Evaluation dataset")->required();

    // experiment -----------------------------------------------------------
    auto* experiment = app.add_subcommand(
        "experiment", "Run a multi-trial augmentation experiment");
    std::filesystem::path experiment_spec;
    experiment->add_option("--spec", experiment_spec, "Experiment spec file")
        ->required();

    // hard-select ------------------------------------------------------
    auto* hard = app.add_subcommand(
        "hard-select", "Augment only the hardest samples by training loss");
    std::filesystem::path hard_in, hard_trace, hard_out;
    double hard_rho = 0.25;
    AugFlags hard_flags;
    hard->add_option("--in", hard_in, "Input dataset")->required();
    hard->add_option("--trace", hard_trace, "Per-sample loss trace CSV")->required();
    hard->add_option("--rho", hard_rho, "Hard-sample ratio in (0, 1]")->required();
    hard->add_option("--out", hard_out, "Output dataset")->required();
    hard_flags.attach(hard, false);

    // transfer -----------------------------------------------------------
    auto* transfer_cmd = app.add_subcommand(
        "transfer", "Run the cross-environment transfer scenario");
    std::filesystem::path transfer_spec;
    transfer_cmd->add_option("--spec", transfer_spec, "Transfer spec file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) {
            EnvConfig cfg = load_env_config(synth_config);
            if (seed_opt->count() > 0) cfg.seed = seed;
            const Dataset ds = synth_dataset(cfg, synth_points);
            const auto path = place(out_dir, synth_out);
            save(ds, path);
            std::cout << "wrote " << ds.samples.size() << " samples ("
                      << ds.meta.n_ap << " APs x " << ds.meta.n_rx
                      << " antennas x " << ds.meta.n_subcarriers
                      << " subcarriers) to " << path.string() << "\n";
        } else if (*augment) {
            const Dataset ds = load(aug_in);
            const AugSpec spec = aug_flags.resolve();
            RngStream rng(seed);
            const Dataset grown = augment_dataset(ds, spec, rng);
            const auto path = place(out_dir, aug_out);
            save(grown, path);
            std::cout << "grew " << ds.samples.size() << " samples to "
                      << grown.samples.size() << " with "
                      << aug_method_name(spec.method) << " to " << path.string()
                      << "\n";
        } else if (*train_cmd) {
            const Dataset train_ds = load(train_in);
            Dataset val_ds;
            if (!train_val.empty()) val_ds = load(train_val);
            MlpConfig mlp = learner_flags.mlp;
            if (mlp.input_dim == 0) mlp.input_dim = feature_dim(train_ds.meta);
            TrainConfig tcfg = learner_flags.train_cfg;
            tcfg.seed = seed;
            const auto [model, trace] = train(train_ds, val_ds, mlp, tcfg);
            const auto path = place(out_dir, train_out);
            save_model(model, path);
            if (!train_trace.empty())
                write_trace_csv(place(out_dir, train_trace),
                                trace.per_sample_avg_loss);
            std::cout << "trained " << model.params.size() << " parameters, final "
                      << "train loss " << fmt(trace.per_epoch_train_loss.back());
            if (!trace.val_loss.empty())
                std::cout << ", best val loss " << fmt(trace.val_loss[trace.best_epoch])
                          << " at epoch " << trace.best_epoch;
            std::cout << ", saved to " << path.string() << "\n";
        } else if (*eval_cmd) {
            const Model model = load_model(eval_model);
            const Dataset ds = load(eval_in);
            std::cout << "rmse_m = " << fmt(evaluate_rmse(model, ds)) << "\n";
        } else if (*experiment) {
            ExperimentSpec spec = load_experiment_spec(experiment_spec);
            if (out_dir_opt->count() > 0) spec.out_dir = out_dir;
            if (seed_opt->count() > 0) spec.seed = seed;
            const ExperimentResult result = run_experiment(spec, threads);
            std::cout << "completed " << result.rows.size() << " cells";
            if (!result.errors.empty())
                std::cout << ", " << result.errors.size() << " failed (see errors.txt)";
            std::cout << "; results in " << spec.out_dir.string() << "\n";
            return result.errors.empty() ? 0 : 3;
        } else if (*hard) {
            const Dataset ds = load(hard_in);
            TrainTrace trace;
            trace.per_sample_avg_loss =
                read_trace_csv(hard_trace, ds.samples.size());
            const DifficultySplit split = rank_difficulty(trace, hard_rho);
            const AugSpec spec = hard_flags.resolve();
            RngStream rng(seed);
            const Dataset grown =
                augment_selected(ds, split.hard, spec, hard_rho, rng);
            const auto path = place(out_dir, hard_out);
            save(grown, path);
            std::cout << "augmented " << split.hard.size() << " hard samples of "
                      << ds.samples.size() << ", wrote " << grown.samples.size()
                      << " to " << path.string() << "\n";
        } else if (*transfer_cmd) {
            TransferSpec spec = load_transfer_spec(transfer_spec);
            if (out_dir_opt->count() > 0) spec.out_dir = out_dir;
            if (seed_opt->count() > 0) spec.seed = seed;
            const std::vector<TransferRow> rows = run_transfer(spec);
            std::cout << "completed " << rows.size() << " transfer rows; results in "
                      << spec.out_dir.string() << "\n";
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
