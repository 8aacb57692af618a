#include "ptai/data/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ptai/core/error.hpp"

namespace ptai::data {

const char* shape_name(std::size_t cls) {
    static constexpr const char* names[kMaxShapeClasses] = {"horizontal_bar", "cross", "box", "dot_grid",
                                                             "l_shape",        "t_shape", "vertical_bar", "diagonal"};
    require(cls < kMaxShapeClasses, ErrorKind::unsupported, "shape class out of range");
    return names[cls];
}

augment::RasterImage render_shape(std::size_t cls, std::size_t image_size, double jitter, RngStream& rng) {
    require(cls < kMaxShapeClasses, ErrorKind::unsupported, "shape class out of range");
    const double size = double(image_size);
    const double cy = size / 2 + rng.uniform(-1.0, 1.0) * jitter * size;
    const double cx = size / 2 + rng.uniform(-1.0, 1.0) * jitter * size;
    const double thickness = std::max(1.0, std::round(2.0 + rng.uniform(-1.0, 1.0) * jitter * 4.0));
    const double h = 0.3 * size * (1.0 + rng.uniform(-1.0, 1.0) * jitter);
    const double half = thickness / 2 + 0.5;  // half stroke width

    augment::RasterImage img(image_size, image_size, 1);
    for (std::size_t y = 0; y < image_size; ++y)
        for (std::size_t x = 0; x < image_size; ++x) {
            const double dy = double(y) + 0.5 - cy, dx = double(x) + 0.5 - cx;
            const double ax = std::abs(dx), ay = std::abs(dy);
            bool on = false;
            switch (cls) {
                case 0: on = ay < half && ax < h; break;
                case 1: on = (ay < half && ax < h) || (ax < half && ay < h); break;
                case 2: {
                    const double r = std::max(ax, ay);
                    on = r < h && r > h - thickness;
                    break;
                }
                case 3:
                    for (double oy : {-0.8 * h, 0.0, 0.8 * h})
                        for (double ox : {-0.8 * h, 0.0, 0.8 * h})
                            on = on || (std::abs(dx - ox) < half && std::abs(dy - oy) < half);
                    break;
                case 4: on = (std::abs(dx + h / 2) < half && ay < h) || (std::abs(dy - h + thickness / 2) < half && ax < h); break;
                case 5: on = (std::abs(dy + h - thickness / 2) < half && ax < h) || (ax < half && ay < h); break;
                case 6: on = ax < half && ay < h; break;
                case 7: {
                    const double along = std::abs(dx + dy) / std::numbers::sqrt2;
                    const double across = std::abs(dx - dy) / std::numbers::sqrt2;
                    on = across < half && along < h;
                    break;
                }
            }
            img.at(y, x) = on ? 1.0 : 0.0;
        }
    return img;
}

ImageDataset gen_shapes(std::size_t n_per_class, std::size_t classes, std::size_t image_size, double jitter,
                        RngStream rng, Split split) {
    require(classes >= 1 && classes <= kMaxShapeClasses, ErrorKind::unsupported,
            "gen_shapes: classes must be in [1, 8], got " + std::to_string(classes));
    require(image_size >= 16, ErrorKind::invalid_config, "gen_shapes: image_size must be >= 16");
    require(jitter >= 0.0 && jitter < 0.5, ErrorKind::invalid_config, "gen_shapes: jitter must be in [0, 0.5)");
    ImageDataset ds;
    ds.classes = static_cast<std::uint32_t>(classes);
    ds.split = split;
    for (std::size_t cls = 0; cls < classes; ++cls) {
        RngStream class_rng = rng.split("class", cls);
        for (std::size_t i = 0; i < n_per_class; ++i) {
            ds.images.push_back(render_shape(cls, image_size, jitter, class_rng));
            ds.labels.push_back(static_cast<std::uint32_t>(cls));
        }
    }
    return ds;
}

}  // namespace ptai::data
