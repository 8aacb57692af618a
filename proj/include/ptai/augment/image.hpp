#pragma once

#include <cstddef>
#include <vector>

namespace ptai::augment {

/// Interleaved (HWC) float image.
struct RasterImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    std::vector<double> pixels;

    RasterImage() = default;
    RasterImage(std::size_t h, std::size_t w, std::size_t c = 1, double fill = 0.0)
        : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

    double& at(std::size_t y, std::size_t x, std::size_t c = 0) { return pixels[(y * width + x) * channels + c]; }
    double at(std::size_t y, std::size_t x, std::size_t c = 0) const {
        return pixels[(y * width + x) * channels + c];
    }
    std::size_t size() const noexcept { return pixels.size(); }
    bool same_shape(const RasterImage& o) const noexcept {
        return height == o.height && width == o.width && channels == o.channels;
    }

    bool operator==(const RasterImage&) const = default;
};

}  // namespace ptai::augment
