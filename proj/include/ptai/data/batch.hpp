#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "ptai/augment/augment.hpp"
#include "ptai/core/rng.hpp"
#include "ptai/data/dataset.hpp"
#include "ptai/losses/losses.hpp"

namespace ptai::data {

/// Feature batch: s of the s_file stored views per input, drawn without
/// replacement. `raw` is filled with the clean rows.
losses::AugmentedBatch make_batch(const FeatureDataset& ds, std::span<const std::size_t> indices, std::size_t s,
                                  RngStream rng);

/// Image batch: s fresh augmentations per input in image space, flattened and
/// passed through `feature_map` when given. `raw` holds the clean encoder inputs.
losses::AugmentedBatch make_batch(const ImageDataset& ds, std::span<const std::size_t> indices,
                                  const augment::AugmentationEnsemble& ensemble, std::size_t s, RngStream rng,
                                  const RandomProjection* feature_map = nullptr);

/// Uniform interface over both dataset kinds for the trainer.
class BatchSource {
public:
    virtual ~BatchSource() = default;
    virtual std::size_t size() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual losses::AugmentedBatch batch(std::span<const std::size_t> indices, std::size_t s, RngStream rng) const = 0;
    /// Clean encoder inputs for all rows, in dataset order.
    virtual Matrix clean_inputs() const = 0;
    virtual std::vector<std::size_t> labels() const = 0;
};

class FeatureBatchSource final : public BatchSource {
public:
    explicit FeatureBatchSource(const FeatureDataset& ds) : ds_(ds) {}
    std::size_t size() const override { return ds_.size(); }
    std::size_t input_dim() const override { return ds_.dim(); }
    losses::AugmentedBatch batch(std::span<const std::size_t> indices, std::size_t s, RngStream rng) const override {
        return make_batch(ds_, indices, s, rng);
    }
    Matrix clean_inputs() const override { return ds_.clean; }
    std::vector<std::size_t> labels() const override { return to_size_labels(ds_.labels); }

private:
    const FeatureDataset& ds_;
};

class ImageBatchSource final : public BatchSource {
public:
    ImageBatchSource(const ImageDataset& ds, augment::AugmentationEnsemble ensemble,
                     std::optional<RandomProjection> feature_map = std::nullopt);
    std::size_t size() const override { return ds_.size(); }
    std::size_t input_dim() const override;
    losses::AugmentedBatch batch(std::span<const std::size_t> indices, std::size_t s, RngStream rng) const override;
    Matrix clean_inputs() const override;
    std::vector<std::size_t> labels() const override { return to_size_labels(ds_.labels); }

private:
    const ImageDataset& ds_;
    augment::AugmentationEnsemble ensemble_;
    std::optional<RandomProjection> feature_map_;
};

}  // namespace ptai::data
