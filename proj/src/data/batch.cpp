#include "ptai/data/batch.hpp"

#include <algorithm>
#include <string>

#include "ptai/core/error.hpp"

namespace ptai::data {

namespace {

void check_indices(std::span<const std::size_t> indices, std::size_t n) {
    require(!indices.empty(), ErrorKind::invalid_input, "make_batch: no indices");
    for (std::size_t i : indices)
        require(i < n, ErrorKind::invalid_input, "make_batch: index " + std::to_string(i) + " out of range");
}

}  // namespace

losses::AugmentedBatch make_batch(const FeatureDataset& ds, std::span<const std::size_t> indices, std::size_t s,
                                  RngStream rng) {
    check_indices(indices, ds.size());
    require(s <= ds.s_file, ErrorKind::insufficient_augmentations,
            "make_batch: requested s=" + std::to_string(s) + " but the dataset stores " +
                std::to_string(ds.s_file) + " augmentations per input");
    const std::size_t n = indices.size(), d = ds.dim();
    losses::AugmentedBatch b;
    b.s = s;
    b.clean = gather_rows(ds.clean, indices);
    b.augmented = Matrix(n * s, d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = indices[i];
        RngStream pick = rng.split("input", i);
        const auto order = pick.permutation(ds.s_file);
        for (std::size_t k = 0; k < s; ++k) {
            const auto from = ds.aug.row(src * ds.s_file + order[k]);
            std::copy(from.begin(), from.end(), b.augmented.row(i * s + k).begin());
        }
        b.labels.push_back(ds.labels[src]);
        b.source.push_back(src);
    }
    b.raw = b.clean;
    return b;
}

losses::AugmentedBatch make_batch(const ImageDataset& ds, std::span<const std::size_t> indices,
                                  const augment::AugmentationEnsemble& ensemble, std::size_t s, RngStream rng,
                                  const RandomProjection* feature_map) {
    check_indices(indices, ds.size());
    ensemble.validate();
    const std::size_t n = indices.size(), pixels = ds.pixel_count();
    Matrix clean(n, pixels), aug(n * s, pixels);
    losses::AugmentedBatch b;
    b.s = s;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& img = ds.images[indices[i]];
        std::copy(img.pixels.begin(), img.pixels.end(), clean.row(i).begin());
        for (std::size_t k = 0; k < s; ++k) {
            RngStream sample_rng = rng.split("input", i).split("view", k);
            const auto& chain = ensemble.sample_entry(sample_rng);
            const auto view = augment::apply_chain(chain, img, sample_rng);
            std::copy(view.pixels.begin(), view.pixels.end(), aug.row(i * s + k).begin());
        }
        b.labels.push_back(ds.labels[indices[i]]);
        b.source.push_back(indices[i]);
    }
    if (feature_map) {
        b.clean = feature_map->apply(clean);
        b.augmented = s ? feature_map->apply(aug) : Matrix(0, feature_map->output_dim());
    } else {
        b.clean = std::move(clean);
        b.augmented = std::move(aug);
    }
    b.raw = b.clean;
    return b;
}

ImageBatchSource::ImageBatchSource(const ImageDataset& ds, augment::AugmentationEnsemble ensemble,
                                   std::optional<RandomProjection> feature_map)
    : ds_(ds), ensemble_(std::move(ensemble)), feature_map_(std::move(feature_map)) {
    ds_.validate();
    ensemble_.validate();
    if (feature_map_)
        require(feature_map_->input_dim() == ds_.pixel_count(), ErrorKind::invalid_dimension,
                "feature map input width differs from the image size");
}

std::size_t ImageBatchSource::input_dim() const {
    return feature_map_ ? feature_map_->output_dim() : ds_.pixel_count();
}

losses::AugmentedBatch ImageBatchSource::batch(std::span<const std::size_t> indices, std::size_t s,
                                               RngStream rng) const {
    return make_batch(ds_, indices, ensemble_, s, rng, feature_map_ ? &*feature_map_ : nullptr);
}

Matrix ImageBatchSource::clean_inputs() const {
    Matrix x = flatten(ds_.images);
    return feature_map_ ? feature_map_->apply(x) : x;
}

}  // namespace ptai::data
