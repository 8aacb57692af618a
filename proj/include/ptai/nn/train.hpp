#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptai/data/batch.hpp"
#include "ptai/losses/losses.hpp"
#include "ptai/nn/mlp.hpp"

namespace ptai::nn {

struct TrainConfig {
    std::size_t batch_size = 256;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    double lr_min = 4e-4;
    std::uint64_t seed = 0;
    std::size_t hidden = 512;                 // adapter hidden width (4096 for large backbones)
    std::optional<std::size_t> out_dim;       // adapter output width; defaults to d_in
    losses::LossConfig loss;                  // loss.s is the per-input augmentation count
    std::size_t probe_epochs = 50;
    double probe_weight_decay = 0.0;
    std::size_t probe_hidden = 512;
    std::size_t collapse_patience = 10;       // abort after more consecutive collapsed epochs

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;             // mean over the epoch's steps
    double correlation = 0.0;      // mean raw SC (waco variants), NaN otherwise
    std::size_t steps = 0;
    std::size_t collapsed_steps = 0;
    double lr_last = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
    std::size_t total_steps = 0;
    std::vector<std::string> warnings;  // first occurrence of each distinct warning

    double final_loss() const;
};

struct TrainedAdapter {
    AdapterMlp adapter;
    std::optional<DecoderMlp> decoder;
    TrainingHistory history;
};

struct TrainHooks {
    std::optional<AdapterMlp> initial_adapter;  // replaces the seeded initialization
    std::function<void(const EpochRecord&)> on_epoch;
};

/// Steps per epoch: all full batches, plus the partial one for mawa. For the
/// other losses a dataset smaller than one batch trains on a single batch of
/// everything.
std::size_t steps_per_epoch(std::size_t n, std::size_t batch_size, losses::LossKind kind);

TrainedAdapter train_adapter(const data::BatchSource& source, const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Cross-entropy probe trained on clean features, AdamW with the probe weight
/// decay and the same cosine schedule shape.
ProbeHead train_probe(const Matrix& features, std::span<const std::size_t> labels, ProbeKind kind,
                      const TrainConfig& cfg);

std::vector<std::size_t> predict(const ProbeHead& probe, const Matrix& features);

}  // namespace ptai::nn
