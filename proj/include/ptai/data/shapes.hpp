#pragma once

#include <cstddef>

#include "ptai/augment/image.hpp"
#include "ptai/core/rng.hpp"
#include "ptai/data/dataset.hpp"

namespace ptai::data {

inline constexpr std::size_t kMaxShapeClasses = 8;

/// Class order: horizontal bar, cross, box, dot grid, L, T, vertical bar,
/// diagonal. The first four are pairwise distinct under rotation.
const char* shape_name(std::size_t cls);

augment::RasterImage render_shape(std::size_t cls, std::size_t image_size, double jitter, RngStream& rng);

/// n_per_class glyphs per class, grouped by class, single channel in [0, 1].
ImageDataset gen_shapes(std::size_t n_per_class, std::size_t classes, std::size_t image_size, double jitter,
                        RngStream rng, Split split = Split::train);

}  // namespace ptai::data
