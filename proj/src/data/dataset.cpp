#include "ptai/data/dataset.hpp"

#include <cmath>
#include <string>

#include "ptai/core/error.hpp"

namespace ptai::data {

void FeatureDataset::validate() const {
    const std::size_t n = clean.rows(), d = clean.cols();
    require(labels.size() == n, ErrorKind::invalid_input, "feature dataset: label count mismatch");
    require(aug.rows() == n * s_file, ErrorKind::invalid_input,
            "feature dataset: expected " + std::to_string(n * s_file) + " augmented rows, got " +
                std::to_string(aug.rows()));
    require(s_file == 0 || aug.cols() == d, ErrorKind::invalid_dimension,
            "feature dataset: augmented width differs from clean width");
    for (std::uint32_t y : labels)
        require(y < classes, ErrorKind::invalid_input, "feature dataset: label out of range");
    require(clean.all_finite() && aug.all_finite(), ErrorKind::invalid_input, "feature dataset: non-finite value");
}

std::size_t ImageDataset::pixel_count() const {
    return images.empty() ? 0 : images.front().size();
}

void ImageDataset::validate() const {
    require(labels.size() == images.size(), ErrorKind::invalid_input, "image dataset: label count mismatch");
    for (const auto& img : images)
        require(img.same_shape(images.front()) && img.pixels.size() == img.height * img.width * img.channels,
                ErrorKind::invalid_input, "image dataset: images differ in shape");
    for (std::uint32_t y : labels)
        require(y < classes, ErrorKind::invalid_input, "image dataset: label out of range");
}

RandomProjection RandomProjection::gaussian(std::size_t in, std::size_t out, RngStream rng) {
    require(in > 0 && out > 0, ErrorKind::invalid_dimension, "random projection: zero dimension");
    RandomProjection p{Matrix(out, in)};
    const double scale = 1.0 / std::sqrt(double(in));
    for (double& v : p.weight.values()) v = scale * rng.normal();
    return p;
}

Matrix RandomProjection::apply(const Matrix& x) const {
    require(x.cols() == input_dim(), ErrorKind::invalid_input, "random projection: input width mismatch");
    return matmul_nt(x, weight);
}

Matrix flatten(const augment::RasterImage& image) {
    return Matrix(1, image.size(), image.pixels);
}

Matrix flatten(const std::vector<augment::RasterImage>& images) {
    if (images.empty()) return Matrix();
    Matrix out(images.size(), images.front().size());
    for (std::size_t r = 0; r < images.size(); ++r) {
        require(images[r].size() == out.cols(), ErrorKind::invalid_input, "flatten: images differ in size");
        std::copy(images[r].pixels.begin(), images[r].pixels.end(), out.row(r).begin());
    }
    return out;
}

std::vector<std::size_t> to_size_labels(const std::vector<std::uint32_t>& labels) {
    return {labels.begin(), labels.end()};
}

}  // namespace ptai::data
