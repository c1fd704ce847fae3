// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#include "faukit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "faukit/error.hpp"

namespace faukit {

std::string_view to_string(OptimizerKind kind) noexcept { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "adam") return OptimizerKind::adam;
    if (text == "sgd") return OptimizerKind::sgd;
    throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning rate must be a finite value >= 0");
    if (batch_size == 0) throw ConfigError("batch size must be at least 1");
    if (!(l2_weight >= 0.0)) throw ConfigError("l2 weight must be >= 0");
}

Optimizer::Optimizer(OptimizerKind kind, const BottleneckModel& model, double learning_rate)
    : kind_(kind), learning_rate_(learning_rate) {
    if (kind_ == OptimizerKind::adam) {
        first_moment_ = Gradients::zeros_like(model);
        second_moment_ = Gradients::zeros_like(model);
    }
}

void Optimizer::step(BottleneckModel& model, const Gradients& grads) {
    ++steps_;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        DenseLayer& layer = model.layer(l);
        const LayerGradient& g = grads.layers[l];
        if (kind_ == OptimizerKind::sgd) {
            kernels::sgd_step(layer.weights, g.weights, learning_rate_);
            kernels::sgd_step(layer.bias, g.bias, learning_rate_);
        } else {
            kernels::AdamCoeffs c;
            c.learning_rate = learning_rate_;
            c.step = steps_;
            kernels::adam_step(layer.weights, g.weights, first_moment_.layers[l].weights,
                               second_moment_.layers[l].weights, c);
            kernels::adam_step(layer.bias, g.bias, first_moment_.layers[l].bias, second_moment_.layers[l].bias, c);
        }
    }
}

double accuracy_on(const BottleneckModel& model, const LabeledMatrix& data) {
    if (data.rows == 0) throw InputError("cannot compute accuracy on an empty set");
    const auto preds = predict_batch(model, data.x, data.rows);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.rows; ++i) correct += preds[i].label == data.y[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(data.rows);
}

TrainResult train(const BottleneckModel& initial, const LabeledMatrix& train_set, const LabeledMatrix& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    if (train_set.rows == 0) throw InputError("training set is empty");
    if (val_set.rows == 0) throw InputError("validation set is empty");
    if (train_set.cols != initial.input_dim() || val_set.cols != initial.input_dim())
        throw DimensionError("features have " + std::to_string(train_set.cols) + " values, model expects " +
                             std::to_string(initial.input_dim()));

    TrainResult result{initial, {}, 0, -1.0};
    BottleneckModel model = initial;
    Optimizer optimizer(cfg.optimizer, model, cfg.learning_rate);
    Gradients grads = Gradients::zeros_like(model);
    BackwardWorkspace ws;

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> batch_x;
    std::vector<Emotion> batch_y;
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t n = std::min(cfg.batch_size, order.size() - start);
            batch_x.resize(n * train_set.cols);
            batch_y.resize(n);
            for (std::size_t b = 0; b < n; ++b) {
                const auto row = train_set.row(order[start + b]);
                std::copy(row.begin(), row.end(), batch_x.begin() + static_cast<std::ptrdiff_t>(b * train_set.cols));
                batch_y[b] = train_set.y[order[start + b]];
            }
            const double loss = backward_batch(model, batch_x, batch_y, cfg.l2_weight, grads, ws);
            if (!std::isfinite(loss)) throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
            loss_sum += loss * static_cast<double>(n);
            optimizer.step(model, grads);
        }

        EpochRecord rec{epoch, loss_sum / static_cast<double>(train_set.rows), accuracy_on(model, val_set)};
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (rec.val_accuracy > result.best_val_accuracy) {
            result.best_val_accuracy = rec.val_accuracy;
            result.best_epoch = epoch;
            result.model = model;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            break;
        }
    }
    if (result.best_epoch == 0) result.best_val_accuracy = accuracy_on(result.model, val_set);
    return result;
}

}  // namespace faukit
