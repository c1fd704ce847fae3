// Copyright (c) faukit contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "faukit/dataset.hpp"
#include "faukit/kernels.hpp"
#include "faukit/model.hpp"

namespace faukit {

enum class OptimizerKind : std::uint8_t { sgd, adam };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    /// Seeds the per-epoch shuffle. Weight init has its own seed on the model.
    std::uint64_t seed = 42;
    double l2_weight = 0.0;
    /// Stop after this many epochs without a validation accuracy improvement;
    /// 0 disables early stopping.
    std::size_t patience = 10;

    /// Throws ConfigError.
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    BottleneckModel model;  // best validation checkpoint
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
};

/// Owns optimizer state (moments for Adam) for one model.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, const BottleneckModel& model, double learning_rate);
    void step(BottleneckModel& model, const Gradients& grads);
    std::size_t steps_taken() const noexcept { return steps_; }

private:
    OptimizerKind kind_;
    double learning_rate_;
    std::size_t steps_ = 0;
    Gradients first_moment_;
    Gradients second_moment_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with a seeded per-epoch shuffle. Returns the
/// parameters of the epoch with the highest validation accuracy (earliest on
/// ties). Throws InputError for an empty training or validation set and
/// DimensionError when feature widths disagree with the model.
TrainResult train(const BottleneckModel& initial, const LabeledMatrix& train_set, const LabeledMatrix& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

double accuracy_on(const BottleneckModel& model, const LabeledMatrix& data);

}  // namespace faukit
