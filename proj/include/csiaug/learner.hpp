// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 the csiaug authors

#ifndef CSIAUG_LEARNER_HPP
#define CSIAUG_LEARNER_HPP

/// Feed-forward localization network: vectorized CSI features in, 2-D
/// position out. Minibatch adaptive-moment training with decoupled weight
/// decay, inverted dropout, per-sample loss traces for difficulty ranking,
/// best-validation checkpointing, and two transfer-learning modes.
///
/// Everything is deterministic given the training seed: shuffles, dropout
/// masks, and initialization all derive from counter-based child streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csiaug/dataset.hpp"
#include "csiaug/dataset_io.hpp"
#include "csiaug/rng.hpp"
#include "csiaug/types.hpp"

namespace csiaug {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Network shape. input_dim is M * n_ap * n_rx * 2 for the dataset at hand.
/// feature_extractor_depth counts the leading hidden layers that form the
/// reusable feature map; the remaining layers (and the linear output head)
/// are the regression head.
struct MlpConfig {
    std::size_t input_dim = 0;
    std::size_t hidden_layers = 3;
    std::size_t hidden_width = 128;
    double dropout_p = 0.2;
    std::size_t feature_extractor_depth = 2;

    void validate() const {
        std::string bad;
        auto flag = [&bad](const char* name) {
            if (!bad.empty()) bad += ", ";
            bad += name;
        };
        if (input_dim == 0) flag("input_dim");
        if (hidden_layers > 0 && hidden_width == 0) flag("hidden_width");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) flag("dropout_p");
        if (feature_extractor_depth >= hidden_layers + 1)
            flag("feature_extractor_depth");
        if (!bad.empty())
            throw ConfigError("invalid MlpConfig field(s): " + bad);
    }
};

/// Optimizer settings. Defaults follow the common small-regressor recipe:
/// 60 epochs, 1e-4 learning rate, 1e-5 decoupled weight decay, batches of 32.
struct TrainConfig {
    std::size_t epochs = 60;
    double learning_rate = 1e-4;
    double weight_decay = 1e-5;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const {
        std::string bad;
        auto flag = [&bad](const char* name) {
            if (!bad.empty()) bad += ", ";
            bad += name;
        };
        if (epochs == 0) flag("epochs");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            flag("learning_rate");
        if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
            flag("weight_decay");
        if (batch_size == 0) flag("batch_size");
        if (!bad.empty())
            throw ConfigError("invalid TrainConfig field(s): " + bad);
    }
};

/// Per-dimension standardization statistics. Fit once on the measured
/// training set and reused verbatim for augmented and evaluation data.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> std_dev;
};

/// Trained network: flat parameter block plus the normalization that its
/// inputs expect. Layer k stores its weight matrix column-major (in x out)
/// followed by its bias (out).
struct Model {
    MlpConfig config;
    Normalizer norm;
    std::vector<double> params;
};

/// Training history. per_sample_avg_loss[i] is the running training-mode
/// loss of sample i averaged over all epochs; the curves hold one mean
/// squared error (m^2) per epoch.
struct TrainTrace {
    std::vector<double> per_sample_avg_loss;
    std::vector<double> per_epoch_train_loss;
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;
};

enum class TransferMode : std::uint8_t { FullFineTune = 0, FreezeFeatures = 1 };

// ---------------------------------------------------------------------------
// Parameter layout
// ---------------------------------------------------------------------------

namespace detail {

struct LayerDims {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t w_off = 0;
    std::size_t b_off = 0;
};

inline std::vector<LayerDims> layer_dims(const MlpConfig& cfg) {
    std::vector<LayerDims> dims;
    dims.reserve(cfg.hidden_layers + 1);
    std::size_t off = 0;
    std::size_t in = cfg.input_dim;
    for (std::size_t k = 0; k < cfg.hidden_layers + 1; ++k) {
        const std::size_t out = k < cfg.hidden_layers ? cfg.hidden_width : 2;
        LayerDims d;
        d.in = in;
        d.out = out;
        d.w_off = off;
        d.b_off = off + in * out;
        dims.push_back(d);
        off = d.b_off + out;
        in = out;
    }
    return dims;
}

inline std::size_t param_count(const MlpConfig& cfg) {
    const auto dims = layer_dims(cfg);
    return dims.back().b_off + dims.back().out;
}

/// Number of leading parameters owned by the feature extractor: everything
/// belonging to the first feature_extractor_depth hidden layers.
inline std::size_t feature_param_count(const MlpConfig& cfg) {
    if (cfg.feature_extractor_depth == 0) return 0;
    const auto dims = layer_dims(cfg);
    return dims[cfg.feature_extractor_depth].w_off;
}

inline Eigen::Map<const Eigen::MatrixXd> weight_map(
    std::span<const double> params, const LayerDims& d) {
    return {params.data() + d.w_off, static_cast<Eigen::Index>(d.in),
            static_cast<Eigen::Index>(d.out)};
}

inline Eigen::Map<const Eigen::VectorXd> bias_map(std::span<const double> params,
                                                  const LayerDims& d) {
    return {params.data() + d.b_off, static_cast<Eigen::Index>(d.out)};
}

/// Fan-in-scaled uniform initialization over layers [first_layer, end),
/// drawing weights in storage order; biases start at zero.
inline void init_params(std::vector<double>& params, const MlpConfig& cfg,
                        std::size_t first_layer, RngStream& rng) {
    const auto dims = layer_dims(cfg);
    for (std::size_t k = first_layer; k < dims.size(); ++k) {
        const LayerDims& d = dims[k];
        const double bound = std::sqrt(6.0 / static_cast<double>(d.in));
        for (std::size_t i = 0; i < d.in * d.out; ++i)
            params[d.w_off + i] = rng.next_uniform(-bound, bound);
        for (std::size_t i = 0; i < d.out; ++i) params[d.b_off + i] = 0.0;
    }
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

/// Evaluation-mode forward pass: rectifier hidden layers, linear head, no
/// dropout. X is one sample per row.
inline Eigen::MatrixXd forward_eval(std::span<const double> params,
                                    const MlpConfig& cfg,
                                    const Eigen::MatrixXd& X) {
    const auto dims = layer_dims(cfg);
    Eigen::MatrixXd a = X;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        Eigen::MatrixXd z = a * weight_map(params, dims[k]);
        z.rowwise() += bias_map(params, dims[k]).transpose();
        if (k + 1 < dims.size())
            a = z.cwiseMax(0.0);
        else
            a = std::move(z);
    }
    return a;
}

/// One training-mode forward/backward pass over a minibatch.
/// Loss is the batch mean of the squared Euclidean position error; dropout
/// masks (when enabled) are drawn from `drop_rng` in (layer, element) storage
/// order. Returns the batch loss, fills `grad` (same layout as params), and
/// writes each sample's individual squared error into `sample_losses`.
inline double train_step_grad(std::span<const double> params,
                              const MlpConfig& cfg, const Eigen::MatrixXd& X,
                              const Eigen::MatrixXd& Y, RngStream* drop_rng,
                              std::vector<double>& grad,
                              std::vector<double>* sample_losses) {
    const auto dims = layer_dims(cfg);
    const Eigen::Index batch = X.rows();
    const bool dropout = drop_rng != nullptr && cfg.dropout_p > 0.0;
    const double keep = 1.0 - cfg.dropout_p;

    // Forward, keeping each layer's input and the hidden derivative factors
    // (rectifier gate times dropout scale).
    std::vector<Eigen::MatrixXd> inputs(dims.size());
    std::vector<Eigen::MatrixXd> factors(cfg.hidden_layers);
    Eigen::MatrixXd a = X;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        inputs[k] = a;
        Eigen::MatrixXd z = a * weight_map(params, dims[k]);
        z.rowwise() += bias_map(params, dims[k]).transpose();
        if (k + 1 < dims.size()) {
            Eigen::MatrixXd f =
                (z.array() > 0.0).cast<double>().matrix();
            if (dropout) {
                for (Eigen::Index r = 0; r < f.rows(); ++r)
                    for (Eigen::Index c = 0; c < f.cols(); ++c)
                        f(r, c) *= drop_rng->next_double() < cfg.dropout_p
                                       ? 0.0
                                       : 1.0 / keep;
            }
            factors[k] = std::move(f);
            // Forward scaling via the same factor matrix the backward pass
            // uses, so the two cannot diverge.
            a = z.cwiseMax(0.0).cwiseProduct(factors[k]);
        } else {
            a = std::move(z);
        }
    }

    const Eigen::MatrixXd diff = a - Y;
    if (sample_losses != nullptr) {
        sample_losses->resize(static_cast<std::size_t>(batch));
        for (Eigen::Index r = 0; r < batch; ++r)
            (*sample_losses)[static_cast<std::size_t>(r)] =
                diff.row(r).squaredNorm();
    }
    const double loss = diff.squaredNorm() / static_cast<double>(batch);

    // Backward.
    grad.assign(params.size(), 0.0);
    Eigen::MatrixXd g = 2.0 * diff / static_cast<double>(batch);
    for (std::size_t k = dims.size(); k-- > 0;) {
        const LayerDims& d = dims[k];
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + d.w_off,
                                       static_cast<Eigen::Index>(d.in),
                                       static_cast<Eigen::Index>(d.out));
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + d.b_off,
                                       static_cast<Eigen::Index>(d.out));
        gw = inputs[k].transpose() * g;
        gb = g.colwise().sum();
        if (k > 0)
            g = (g * weight_map(params, dims[k]).transpose())
                    .cwiseProduct(factors[k - 1]);
    }
    return loss;
}

/// Evaluation-mode batch loss and analytic gradient; the oracle surface for
/// finite-difference checks.
inline double loss_and_grad(std::span<const double> params,
                            const MlpConfig& cfg, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& Y,
                            std::vector<double>& grad) {
    return train_step_grad(params, cfg, X, Y, nullptr, grad, nullptr);
}

/// Evaluation-mode batch loss alone.
inline double loss_eval(std::span<const double> params, const MlpConfig& cfg,
                        const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    const Eigen::MatrixXd out = forward_eval(params, cfg, X);
    return (out - Y).squaredNorm() / static_cast<double>(X.rows());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Feature extraction
// ---------------------------------------------------------------------------

/// Deterministic feature layout: AP-major, antenna-next, subcarrier-next;
/// within each (AP, antenna) block all real parts precede all imaginary
/// parts. A 1x1x2 tensor [1+2j, 3+4j] maps to [1, 3, 2, 4].
inline std::vector<double> vectorize(const CsiSample& sample) {
    const CsiTensor& t = sample.tensor;
    std::vector<double> v;
    v.reserve(t.size() * 2);
    for (std::size_t ap = 0; ap < t.n_ap(); ++ap)
        for (std::size_t rx = 0; rx < t.n_rx(); ++rx) {
            const auto ant = t.antenna(ap, rx);
            for (const cplx& z : ant) v.push_back(z.real());
            for (const cplx& z : ant) v.push_back(z.imag());
        }
    return v;
}

/// Feature dimension implied by a dataset's shape.
inline std::size_t feature_dim(const DatasetMeta& meta) {
    return meta.n_subcarriers * meta.n_ap * meta.n_rx * 2;
}

namespace detail {

/// Vectorize and standardize a whole dataset into a row-per-sample matrix,
/// with labels alongside.
inline void featurize(const Dataset& ds, const MlpConfig& cfg,
                      const Normalizer& norm, Eigen::MatrixXd& X,
                      Eigen::MatrixXd& Y) {
    const std::size_t d = feature_dim(ds.meta);
    if (d != cfg.input_dim)
        throw ConfigError("dataset feature dimension " + std::to_string(d) +
                          " does not match model input_dim " +
                          std::to_string(cfg.input_dim));
    if (norm.mean.size() != d || norm.std_dev.size() != d)
        throw ConfigError("normalizer dimension does not match input_dim");
    const std::size_t n = ds.samples.size();
    X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Y.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> v = vectorize(ds.samples[i]);
        if (v.size() != d)
            throw ConfigError("sample feature dimension mismatch");
        for (std::size_t j = 0; j < d; ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (v[j] - norm.mean[j]) / norm.std_dev[j];
        Y(static_cast<Eigen::Index>(i), 0) = ds.samples[i].label.x;
        Y(static_cast<Eigen::Index>(i), 1) = ds.samples[i].label.y;
    }
}

}  // namespace detail

/// Per-dimension mean/standard deviation over a dataset's feature vectors.
/// Constant dimensions get unit scale so they standardize to exactly zero.
inline Normalizer fit_normalizer(const Dataset& ds, const MlpConfig& cfg) {
    const std::size_t d = feature_dim(ds.meta);
    if (d != cfg.input_dim)
        throw ConfigError("dataset feature dimension " + std::to_string(d) +
                          " does not match model input_dim " +
                          std::to_string(cfg.input_dim));
    if (ds.samples.empty())
        throw DataError("cannot fit normalizer on an empty dataset");
    Normalizer norm;
    norm.mean.assign(d, 0.0);
    norm.std_dev.assign(d, 0.0);
    const double n = static_cast<double>(ds.samples.size());
    std::vector<std::vector<double>> feats;
    feats.reserve(ds.samples.size());
    for (const CsiSample& s : ds.samples) feats.push_back(vectorize(s));
    for (const auto& v : feats)
        for (std::size_t j = 0; j < d; ++j) norm.mean[j] += v[j] / n;
    for (const auto& v : feats)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = v[j] - norm.mean[j];
            norm.std_dev[j] += c * c / n;
        }
    for (std::size_t j = 0; j < d; ++j) {
        norm.std_dev[j] = std::sqrt(norm.std_dev[j]);
        if (norm.std_dev[j] < 1e-12) norm.std_dev[j] = 1.0;
    }
    return norm;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace detail {

/// Core optimizer loop. Parameters below `frozen_below` are never touched.
/// Returns the best-validation parameters when a validation set is present,
/// otherwise the final parameters.
inline std::pair<Model, TrainTrace> train_core(
    std::vector<double> params, std::size_t frozen_below,
    const Dataset& train_set, const Dataset& val_set, const MlpConfig& mlp,
    const TrainConfig& cfg, const Normalizer& norm) {
    mlp.validate();
    cfg.validate();
    if (train_set.samples.empty())
        throw DataError("training set is empty");

    Eigen::MatrixXd X, Y, Xv, Yv;
    featurize(train_set, mlp, norm, X, Y);
    const bool has_val = !val_set.samples.empty();
    if (has_val) featurize(val_set, mlp, norm, Xv, Yv);

    const std::size_t n = train_set.samples.size();
    const std::size_t p = param_count(mlp);
    if (params.size() != p)
        throw ConfigError("parameter vector size does not match MlpConfig");

    RngStream root(cfg.seed);
    // Child streams: 1 shuffling, 2 dropout. (0 is the init stream.)
    RngStream shuffle_root = root.child(1);
    RngStream dropout_root = root.child(2);

    std::vector<double> m(p, 0.0), v(p, 0.0), grad;
    std::vector<double> per_sample_sum(n, 0.0), batch_losses;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    TrainTrace trace;
    trace.per_epoch_train_loss.reserve(cfg.epochs);
    trace.val_loss.reserve(has_val ? cfg.epochs : 0);
    std::vector<double> best_params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream esh = shuffle_root.child(epoch);
        const std::vector<std::size_t> order = shuffled_indices(n, esh);
        RngStream edrop = dropout_root.child(epoch);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, n - start);
            Eigen::MatrixXd Xb(static_cast<Eigen::Index>(b), X.cols());
            Eigen::MatrixXd Yb(static_cast<Eigen::Index>(b), 2);
            for (std::size_t r = 0; r < b; ++r) {
                Xb.row(static_cast<Eigen::Index>(r)) =
                    X.row(static_cast<Eigen::Index>(order[start + r]));
                Yb.row(static_cast<Eigen::Index>(r)) =
                    Y.row(static_cast<Eigen::Index>(order[start + r]));
            }
            const double loss = train_step_grad(params, mlp, Xb, Yb, &edrop,
                                                grad, &batch_losses);
            if (!std::isfinite(loss))
                throw NumericError(
                    "training loss became non-finite at epoch " +
                    std::to_string(epoch) +
                    "; lower the learning rate or check the input scale "
                    "(exploding gradients)");
            for (std::size_t r = 0; r < b; ++r)
                per_sample_sum[order[start + r]] += batch_losses[r];
            epoch_loss += loss * static_cast<double>(b);

            ++step;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t i = frozen_below; i < p; ++i) {
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                params[i] -= cfg.learning_rate *
                             (mhat / (std::sqrt(vhat) + kEps) +
                              cfg.weight_decay * params[i]);
            }
        }
        trace.per_epoch_train_loss.push_back(epoch_loss /
                                             static_cast<double>(n));

        if (has_val) {
            const double vl = loss_eval(params, mlp, Xv, Yv);
            trace.val_loss.push_back(vl);
            if (vl < best_val) {
                best_val = vl;
                best_params = params;
                trace.best_epoch = epoch;
            }
        }
    }

    trace.per_sample_avg_loss.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        trace.per_sample_avg_loss[i] =
            per_sample_sum[i] / static_cast<double>(cfg.epochs);

    Model model;
    model.config = mlp;
    model.norm = norm;
    model.params = has_val ? std::move(best_params) : std::move(params);
    return {std::move(model), std::move(trace)};
}

}  // namespace detail

/// Train from scratch with an explicit normalizer (fit it on the measured
/// set before augmenting so augmented copies reuse the same statistics).
inline std::pair<Model, TrainTrace> train(const Dataset& train_set,
                                          const Dataset& val_set,
                                          const MlpConfig& mlp,
                                          const TrainConfig& cfg,
                                          const Normalizer& norm) {
    mlp.validate();
    cfg.validate();
    std::vector<double> params(detail::param_count(mlp), 0.0);
    RngStream init = RngStream(cfg.seed).child(0);
    detail::init_params(params, mlp, 0, init);
    return detail::train_core(std::move(params), 0, train_set, val_set, mlp,
                              cfg, norm);
}

/// Train from scratch, fitting the normalizer on the training set itself.
inline std::pair<Model, TrainTrace> train(const Dataset& train_set,
                                          const Dataset& val_set,
                                          const MlpConfig& mlp,
                                          const TrainConfig& cfg) {
    mlp.validate();
    return train(train_set, val_set, mlp, cfg, fit_normalizer(train_set, mlp));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Root-mean-square Euclidean position error (meters), evaluation mode.
/// Per-sample errors are summed in sorted order, so the result is exactly
/// invariant to dataset ordering.
inline double evaluate_rmse(const Model& model, const Dataset& ds) {
    if (ds.samples.empty())
        throw DataError("cannot evaluate on an empty dataset");
    Eigen::MatrixXd X, Y;
    detail::featurize(ds, model.config, model.norm, X, Y);
    const Eigen::MatrixXd out =
        detail::forward_eval(model.params, model.config, X);
    std::vector<double> sq(ds.samples.size());
    for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = (out.row(static_cast<Eigen::Index>(i)) -
                 Y.row(static_cast<Eigen::Index>(i)))
                    .squaredNorm();
    std::sort(sq.begin(), sq.end());
    double total = 0.0;
    for (double s : sq) total += s;
    return std::sqrt(total / static_cast<double>(ds.samples.size()));
}

// ---------------------------------------------------------------------------
// Difficulty ranking
// ---------------------------------------------------------------------------

struct DifficultySplit {
    std::vector<std::size_t> hard;
    std::vector<std::size_t> easy;
};

/// Sort samples by average training loss descending (ties by ascending
/// index); the top ceil(N * rho_hs) are hard, the rest easy.
inline DifficultySplit rank_difficulty(const TrainTrace& trace,
                                       double rho_hs) {
    if (!(rho_hs > 0.0 && rho_hs <= 1.0))
        throw ConfigError("rho_hs must be in (0, 1]");
    const std::size_t n = trace.per_sample_avg_loss.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double la = trace.per_sample_avg_loss[a];
        const double lb = trace.per_sample_avg_loss[b];
        if (la != lb) return la > lb;
        return a < b;
    });
    const std::size_t n_hard = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * rho_hs - 1e-9));
    DifficultySplit split;
    split.hard.assign(idx.begin(),
                      idx.begin() + static_cast<std::ptrdiff_t>(n_hard));
    split.easy.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_hard),
                      idx.end());
    return split;
}

// ---------------------------------------------------------------------------
// Transfer learning
// ---------------------------------------------------------------------------

/// Adapt a source-domain model to target-domain data. FullFineTune resumes
/// training on every parameter; FreezeFeatures keeps the feature extractor
/// bit-identical and retrains a freshly re-initialized head. Both modes keep
/// the source model's input normalization so the frozen features keep their
/// meaning.
inline std::pair<Model, TrainTrace> transfer(const Model& source,
                                             const Dataset& target_train,
                                             const Dataset& target_val,
                                             TransferMode mode,
                                             const TrainConfig& cfg) {
    source.config.validate();
    cfg.validate();
    if (source.params.size() != detail::param_count(source.config))
        throw ConfigError("source model parameter block is malformed");
    std::vector<double> params = source.params;
    std::size_t frozen_below = 0;
    if (mode == TransferMode::FreezeFeatures) {
        frozen_below = detail::feature_param_count(source.config);
        RngStream reinit = RngStream(cfg.seed).child(0);
        detail::init_params(params, source.config,
                            source.config.feature_extractor_depth, reinit);
    }
    return detail::train_core(std::move(params), frozen_below, target_train,
                              target_val, source.config, cfg, source.norm);
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

inline constexpr char kModelMagic[4] = {'C', 'S', 'I', 'M'};
inline constexpr std::uint16_t kModelVersion = 1;

/// Serialize a model: magic, version, shape fields, normalization
/// statistics, then the flat little-endian f64 parameter block.
inline void save_model(const Model& model, const std::filesystem::path& path) {
    model.config.validate();
    const std::size_t d = model.config.input_dim;
    if (model.norm.mean.size() != d || model.norm.std_dev.size() != d)
        throw ConfigError("model normalizer does not match input_dim");
    if (model.params.size() != detail::param_count(model.config))
        throw ConfigError("model parameter block is malformed");

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    std::vector<unsigned char> buf;
    buf.reserve(64 + 16 * d + 8 * model.params.size());
    for (char c : kModelMagic) buf.push_back(static_cast<unsigned char>(c));
    detail::append_bytes(buf, kModelVersion, 2);
    detail::append_bytes(buf, model.config.input_dim, 8);
    detail::append_bytes(buf, model.config.hidden_layers, 8);
    detail::append_bytes(buf, model.config.hidden_width, 8);
    detail::append_bytes(buf, model.config.feature_extractor_depth, 8);
    detail::append_f64(buf, model.config.dropout_p);
    for (double x : model.norm.mean) detail::append_f64(buf, x);
    for (double x : model.norm.std_dev) detail::append_f64(buf, x);
    detail::append_bytes(buf, model.params.size(), 8);
    for (double x : model.params) detail::append_f64(buf, x);
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
    if (!os) throw DataError("short write to " + path.string());
}

/// Load a model checkpoint, validating magic, version, and block sizes.
inline Model load_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path.string() + " for reading");
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
    detail::Cursor cur{raw.data(), raw.size()};
    constexpr std::size_t kHeader = TruncatedFile::kHeaderRecord;

    cur.require(4, kHeader);
    for (char c : kModelMagic) {
        if (raw[cur.pos++] != static_cast<unsigned char>(c))
            throw MagicMismatch("not a model checkpoint (bad magic): " +
                                path.string());
    }
    const auto version = static_cast<std::uint16_t>(cur.take(2, kHeader));
    if (version != kModelVersion)
        throw VersionMismatch("unsupported checkpoint version " +
                              std::to_string(version));

    Model model;
    model.config.input_dim = cur.take(8, kHeader);
    model.config.hidden_layers = cur.take(8, kHeader);
    model.config.hidden_width = cur.take(8, kHeader);
    model.config.feature_extractor_depth = cur.take(8, kHeader);
    model.config.dropout_p = cur.take_f64(kHeader);
    model.config.validate();

    const std::size_t d = model.config.input_dim;
    model.norm.mean.resize(d);
    model.norm.std_dev.resize(d);
    for (std::size_t i = 0; i < d; ++i) model.norm.mean[i] = cur.take_f64(kHeader);
    for (std::size_t i = 0; i < d; ++i)
        model.norm.std_dev[i] = cur.take_f64(kHeader);

    const std::uint64_t n_params = cur.take(8, kHeader);
    if (n_params != detail::param_count(model.config))
        throw ShapeMismatch("checkpoint parameter count " +
                            std::to_string(n_params) +
                            " does not match its architecture");
    model.params.resize(n_params);
    for (std::uint64_t i = 0; i < n_params; ++i)
        model.params[i] = cur.take_f64(i);
    if (cur.pos != raw.size())
        throw DataError("trailing bytes after checkpoint payload in " +
                        path.string());
    return model;
}

}  // namespace csiaug

#endif  // CSIAUG_LEARNER_HPP
