#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "midgcn/csr.hpp"
#include "midgcn/data.hpp"
#include "midgcn/errors.hpp"
#include "midgcn/filter.hpp"
#include "midgcn/graph.hpp"
#include "midgcn/operators.hpp"
#include "midgcn/rng.hpp"

namespace midgcn {

struct ModelParams {
    Eigen::MatrixXd w1;   // f x h
    Eigen::MatrixXd w2;   // h x c
    FilterSpec filter;
    int hidden = 0;
};

struct TrainConfig {
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    double dropout_rate = 0.6;
    int hidden = 64;
    int epochs_max = 1000;
    int patience = 100;
    std::uint64_t seed = 0;
    FilterSpec filter = FilterSpec{FilterKind::mid_alpha, 0.5};
    bool row_normalize_features = false;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
        if (hidden < 1) throw ConfigError("hidden size must be at least 1");
        if (epochs_max < 1) throw ConfigError("epochs_max must be at least 1");
        if (patience < 1) throw ConfigError("patience must be at least 1");
        if (!(filter.alpha >= 0.0 && filter.alpha <= 2.0)) throw ConfigError("alpha must lie in [0, 2]");
    }
};

struct TrainReport {
    std::vector<double> train_loss;      // per epoch
    std::vector<double> val_accuracy;    // per epoch
    double test_accuracy = 0.0;
    double wall_seconds = 0.0;
    int best_epoch = 0;                  // 1-based
    int epochs_run = 0;
};

namespace detail {

struct ForwardCache {
    std::vector<double> x_keep;     // per stored nonzero of X
    Eigen::ArrayXXd h_keep;         // per entry of the hidden layer
    Eigen::MatrixXd h_pre, h_drop, logits;
    bool training = false;
};

/// Two filter layers with ReLU between; inverted dropout on the input of
/// each layer when training. Mask draws are keyed off dropout_seed so the
/// same seed reproduces the same logits.
inline void forward_pass(const ModelParams& params, const NormalizedOperator& a_hat, const CsrRect& x,
                         bool training, double dropout_rate, std::uint64_t dropout_seed,
                         ForwardCache& cache) {
    if (x.cols != static_cast<int>(params.w1.rows())) throw DataError("forward: feature width mismatch");
    if (params.w1.cols() != params.w2.rows()) throw DataError("forward: hidden width mismatch");
    if (x.rows != a_hat.n()) throw DataError("forward: node count mismatch");

    cache.training = training && dropout_rate > 0.0;
    const double keep_scale = cache.training ? 1.0 / (1.0 - dropout_rate) : 1.0;

    Eigen::MatrixXd t1;
    if (cache.training) {
        Rng rng(mix_seed(dropout_seed, 1));
        cache.x_keep.resize(x.values.size());
        for (double& s : cache.x_keep) s = rng.bernoulli(dropout_rate) ? 0.0 : keep_scale;
        t1 = x.multiply_scaled(params.w1, cache.x_keep);
    } else {
        t1 = x.multiply(params.w1);
    }
    cache.h_pre = apply_filter_to(a_hat, params.filter, t1);

    Eigen::MatrixXd h = cache.h_pre.cwiseMax(0.0);
    if (cache.training) {
        Rng rng(mix_seed(dropout_seed, 2));
        cache.h_keep.resize(h.rows(), h.cols());
        for (Eigen::Index i = 0; i < h.rows(); ++i)
            for (Eigen::Index j = 0; j < h.cols(); ++j)
                cache.h_keep(i, j) = rng.bernoulli(dropout_rate) ? 0.0 : keep_scale;
        cache.h_drop = h.cwiseProduct(cache.h_keep.matrix());
    } else {
        cache.h_drop = std::move(h);
    }

    cache.logits = apply_filter_to(a_hat, params.filter, cache.h_drop * params.w2);
    if (!cache.logits.allFinite())
        throw NumericalError("forward pass produced non-finite logits (hidden=" +
                             std::to_string(params.hidden) + ")");
}

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd p(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        Eigen::ArrayXd e = (z.row(i).array() - m).exp();
        p.row(i) = (e / e.sum()).matrix();
    }
    return p;
}

inline int argmax_lowest(const Eigen::RowVectorXd& row) {
    int best = 0;
    for (int j = 1; j < row.size(); ++j)
        if (row(j) > row(best)) best = j;
    return best;
}

} // namespace detail

inline Eigen::MatrixXd forward(const ModelParams& params, const NormalizedOperator& a_hat,
                               const CsrRect& x, bool training = false, double dropout_rate = 0.0,
                               std::uint64_t dropout_seed = 0) {
    detail::ForwardCache cache;
    detail::forward_pass(params, a_hat, x, training, dropout_rate, dropout_seed, cache);
    return cache.logits;
}

inline Eigen::MatrixXd forward(const ModelParams& params, const Graph& g, const NodeFeatures& x,
                               bool training = false, double dropout_rate = 0.0,
                               std::uint64_t dropout_seed = 0) {
    return forward(params, normalized_adjacency(g), CsrRect::from_dense(x.values), training,
                   dropout_rate, dropout_seed);
}

/// Post-activation first-layer embeddings, inference mode.
inline Eigen::MatrixXd hidden_representation(const ModelParams& params, const NormalizedOperator& a_hat,
                                             const CsrRect& x) {
    if (x.cols != static_cast<int>(params.w1.rows())) throw DataError("hidden: feature width mismatch");
    return apply_filter_to(a_hat, params.filter, x.multiply(params.w1)).cwiseMax(0.0);
}

inline Eigen::MatrixXd hidden_representation(const ModelParams& params, const Graph& g,
                                             const NodeFeatures& x) {
    return hidden_representation(params, normalized_adjacency(g), CsrRect::from_dense(x.values));
}

struct LossAndGrads {
    double loss = 0.0;
    Eigen::MatrixXd g_w1, g_w2;
};

/// Softmax cross-entropy averaged over the mask plus (weight_decay/2) times
/// the squared norms of both weight matrices; exact gradients for the
/// dropout mask fixed by dropout_seed.
inline LossAndGrads loss_and_gradients(const ModelParams& params, const NormalizedOperator& a_hat,
                                       const CsrRect& x, const Labels& labels,
                                       const std::vector<int>& mask, const TrainConfig& config,
                                       std::uint64_t dropout_seed) {
    if (mask.empty()) throw DataError("loss_and_gradients: empty mask");
    detail::ForwardCache cache;
    detail::forward_pass(params, a_hat, x, true, config.dropout_rate, dropout_seed, cache);

    const Eigen::MatrixXd p = detail::softmax_rows(cache.logits);
    const double inv_m = 1.0 / static_cast<double>(mask.size());
    double ce = 0.0;
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(cache.logits.rows(), cache.logits.cols());
    for (int i : mask) {
        if (i < 0 || i >= static_cast<int>(cache.logits.rows())) throw DataError("mask index out of range");
        const int y = labels.y[static_cast<std::size_t>(i)];
        ce -= std::log(std::max(p(i, y), 1e-300));
        dz.row(i) = p.row(i) * inv_m;
        dz(i, y) -= inv_m;
    }
    ce *= inv_m;

    LossAndGrads out;
    out.loss = ce + 0.5 * config.weight_decay * (params.w1.squaredNorm() + params.w2.squaredNorm());
    if (!std::isfinite(out.loss)) throw NumericalError("loss is non-finite");

    const Eigen::MatrixXd g2 = apply_filter_to(a_hat, params.filter, dz);
    out.g_w2 = cache.h_drop.transpose() * g2 + config.weight_decay * params.w2;

    Eigen::MatrixXd dh = g2 * params.w2.transpose();
    if (cache.training) dh = dh.cwiseProduct(cache.h_keep.matrix());
    const Eigen::MatrixXd dh_pre =
        dh.cwiseProduct((cache.h_pre.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd g1 = apply_filter_to(a_hat, params.filter, dh_pre);
    if (cache.training)
        out.g_w1 = x.multiply_transposed_scaled(g1, cache.x_keep);
    else
        out.g_w1 = x.multiply_transposed(g1);
    out.g_w1 += config.weight_decay * params.w1;
    return out;
}

inline LossAndGrads loss_and_gradients(const ModelParams& params, const Graph& g, const NodeFeatures& x,
                                       const Labels& labels, const std::vector<int>& mask,
                                       const TrainConfig& config, std::uint64_t dropout_seed) {
    return loss_and_gradients(params, normalized_adjacency(g), CsrRect::from_dense(x.values), labels,
                              mask, config, dropout_seed);
}

inline double evaluate(const ModelParams& params, const NormalizedOperator& a_hat, const CsrRect& x,
                       const Labels& labels, const std::vector<int>& index_set) {
    if (index_set.empty()) throw DataError("evaluate: empty index set");
    const Eigen::MatrixXd logits = forward(params, a_hat, x, false);
    int hits = 0;
    for (int i : index_set) {
        if (i < 0 || i >= static_cast<int>(logits.rows())) throw DataError("evaluate: index out of range");
        if (detail::argmax_lowest(logits.row(i)) == labels.y[static_cast<std::size_t>(i)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(index_set.size());
}

inline double evaluate(const ModelParams& params, const Graph& g, const NodeFeatures& x,
                       const Labels& labels, const std::vector<int>& index_set) {
    return evaluate(params, normalized_adjacency(g), CsrRect::from_dense(x.values), labels, index_set);
}

inline ModelParams init_params(int f, int hidden, int c, const FilterSpec& filter, std::uint64_t seed) {
    auto glorot = [](int rows, int cols, Rng& rng) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Eigen::MatrixXd w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-limit, limit);
        return w;
    };
    ModelParams p;
    Rng r1(mix_seed(seed, 10)), r2(mix_seed(seed, 11));
    p.w1 = glorot(f, hidden, r1);
    p.w2 = glorot(hidden, c, r2);
    p.filter = filter;
    p.hidden = hidden;
    return p;
}

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

/// Full-graph Adam training with early stopping on validation accuracy;
/// returns the best-validation checkpoint.
inline TrainResult train(const Graph& g, const NodeFeatures& x, const Labels& labels,
                         const Split& split, const TrainConfig& config) {
    config.validate();
    if (g.n != x.n() || g.n != labels.n()) throw DataError("train: node count mismatch");
    if (split.train.empty() || split.val.empty() || split.test.empty())
        throw DataError("train: every split part must be non-empty");

    const auto t0 = std::chrono::steady_clock::now();
    NodeFeatures features = x;
    if (config.row_normalize_features) row_normalize(features);
    const NormalizedOperator a_hat = normalized_adjacency(g);
    const CsrRect x_csr = CsrRect::from_dense(features.values);

    TrainResult result;
    result.params = init_params(features.f(), config.hidden, labels.num_classes, config.filter, config.seed);
    ModelParams& params = result.params;

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
    Eigen::MatrixXd v1 = m1, m2 = Eigen::MatrixXd::Zero(params.w2.rows(), params.w2.cols()), v2 = m2;

    ModelParams best = params;
    double best_val = -1.0;
    int best_epoch = 0, since_best = 0;

    TrainReport& report = result.report;
    for (int epoch = 1; epoch <= config.epochs_max; ++epoch) {
        LossAndGrads lg;
        try {
            lg = loss_and_gradients(params, a_hat, x_csr, labels, split.train, config,
                                    mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
        } catch (const NumericalError& e) {
            throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
        }

        const double bc1 = 1.0 - std::pow(beta1, epoch);
        const double bc2 = 1.0 - std::pow(beta2, epoch);
        m1 = beta1 * m1 + (1.0 - beta1) * lg.g_w1;
        v1 = beta2 * v1 + (1.0 - beta2) * lg.g_w1.cwiseProduct(lg.g_w1);
        m2 = beta1 * m2 + (1.0 - beta1) * lg.g_w2;
        v2 = beta2 * v2 + (1.0 - beta2) * lg.g_w2.cwiseProduct(lg.g_w2);
        params.w1 -= (config.learning_rate * (m1 / bc1).array() / ((v1 / bc2).array().sqrt() + eps)).matrix();
        params.w2 -= (config.learning_rate * (m2 / bc1).array() / ((v2 / bc2).array().sqrt() + eps)).matrix();

        const double val_acc = evaluate(params, a_hat, x_csr, labels, split.val);
        report.train_loss.push_back(lg.loss);
        report.val_accuracy.push_back(val_acc);
        report.epochs_run = epoch;

        if (val_acc > best_val) {
            best_val = val_acc;
            best = params;
            best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    result.params = best;
    report.best_epoch = best_epoch;
    report.test_accuracy = evaluate(result.params, a_hat, x_csr, labels, split.test);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint file: magic "MGCNCKPT", u32 version = 1, then little-endian
// u32 filter kind, f64 alpha, u32 f, u32 hidden, u32 c, W1 row-major f64,
// W2 row-major f64.
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DataError(path + ": truncated checkpoint");
    return v;
}

} // namespace detail

inline void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out.write("MGCNCKPT", 8);
    detail::write_pod<std::uint32_t>(out, 1u);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.filter.kind));
    detail::write_pod<double>(out, params.filter.alpha);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.w1.rows()));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.w1.cols()));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.w2.cols()));
    for (Eigen::Index i = 0; i < params.w1.rows(); ++i)
        for (Eigen::Index j = 0; j < params.w1.cols(); ++j) detail::write_pod<double>(out, params.w1(i, j));
    for (Eigen::Index i = 0; i < params.w2.rows(); ++i)
        for (Eigen::Index j = 0; j < params.w2.cols(); ++j) detail::write_pod<double>(out, params.w2(i, j));
    if (!out) throw DataError("short write: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "MGCNCKPT", 8) != 0) throw DataError(path + ": not a checkpoint file");
    const auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != 1u) throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
    const auto kind = detail::read_pod<std::uint32_t>(in, path);
    if (kind > 3u) throw DataError(path + ": bad filter kind");
    const double alpha = detail::read_pod<double>(in, path);
    const auto f = detail::read_pod<std::uint32_t>(in, path);
    const auto h = detail::read_pod<std::uint32_t>(in, path);
    const auto c = detail::read_pod<std::uint32_t>(in, path);
    if (f == 0 || h == 0 || c == 0) throw DataError(path + ": bad checkpoint shapes");
    ModelParams params;
    params.filter = FilterSpec::make(static_cast<FilterKind>(kind), alpha);
    params.hidden = static_cast<int>(h);
    params.w1.resize(f, h);
    params.w2.resize(h, c);
    for (std::uint32_t i = 0; i < f; ++i)
        for (std::uint32_t j = 0; j < h; ++j) params.w1(i, j) = detail::read_pod<double>(in, path);
    for (std::uint32_t i = 0; i < h; ++i)
        for (std::uint32_t j = 0; j < c; ++j) params.w2(i, j) = detail::read_pod<double>(in, path);
    if (!params.w1.allFinite() || !params.w2.allFinite())
        throw DataError(path + ": checkpoint weights not finite");
    return params;
}

} // namespace midgcn
