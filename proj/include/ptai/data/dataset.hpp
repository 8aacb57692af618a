#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ptai/augment/image.hpp"
#include "ptai/core/matrix.hpp"
#include "ptai/core/rng.hpp"

namespace ptai::data {

/// Precomputed features: clean rows, labels, and s_file stored augmented rows
/// per input (rows [i*s_file, (i+1)*s_file) of `aug` belong to input i).
struct FeatureDataset {
    Matrix clean;
    std::vector<std::uint32_t> labels;
    std::uint32_t classes = 0;
    Matrix aug;
    std::size_t s_file = 0;
    std::string metadata;  // JSON text: augmentation, normalization, source tag

    std::size_t size() const noexcept { return clean.rows(); }
    std::size_t dim() const noexcept { return clean.cols(); }
    void validate() const;

    bool operator==(const FeatureDataset&) const = default;
};

enum class Split { train, test };

struct ImageDataset {
    std::vector<augment::RasterImage> images;
    std::vector<std::uint32_t> labels;
    std::uint32_t classes = 0;
    Split split = Split::train;

    std::size_t size() const noexcept { return images.size(); }
    std::size_t pixel_count() const;
    void validate() const;
};

/// Frozen linear feature map x -> W x with W ~ N(0, 1/in).
struct RandomProjection {
    Matrix weight;  // out x in

    static RandomProjection gaussian(std::size_t in, std::size_t out, RngStream rng);
    std::size_t input_dim() const noexcept { return weight.cols(); }
    std::size_t output_dim() const noexcept { return weight.rows(); }
    Matrix apply(const Matrix& x) const;
};

/// Images flattened to one row each (HWC order).
Matrix flatten(const std::vector<augment::RasterImage>& images);
Matrix flatten(const augment::RasterImage& image);

std::vector<std::size_t> to_size_labels(const std::vector<std::uint32_t>& labels);

}  // namespace ptai::data
